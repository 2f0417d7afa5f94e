#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ldikit/corpus.hpp"
#include "ldikit/experiment.hpp"

namespace testing {

std::filesystem::path data_dir();
std::filesystem::path cli_path();

/// Removed with its contents on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

ldikit::experiment::CollectionSpec toy_spec();
ldikit::corpus::Corpus toy_corpus();

/// Document ids of the toy corpus, in order.
enum ToyDoc { T1 = 1, T2, T3, B1, B2, D1, D2, D3, G1, G2 };

struct SyntheticSpec {
  int topics = 4;
  int words_per_topic = 40;
  int shared_words = 30;
  int docs_per_topic = 20;
  int doc_length = 60;
  /// Fraction of a document's tokens drawn from a second topic.
  double secondary = 0.2;
  /// Fraction drawn from the shared pool.
  double noise = 0.15;
  int queries_per_topic = 3;
  int query_length = 6;
  std::uint64_t seed = 7;
};

/// Writes <name>.all, <name>.qry and <name>.rel in SMART format with
/// topical structure: a query is relevant to the documents of its topic.
ldikit::experiment::CollectionSpec write_synthetic_collection(const std::filesystem::path& dir,
                                                              const std::string& name,
                                                              const SyntheticSpec& spec = {});

/// Runs the command line tool; returns its exit status and captures stdout+stderr.
int run_cli(const std::string& args, std::string* output = nullptr);

}  // namespace testing
