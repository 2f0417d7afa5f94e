#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ldikit/bundle.hpp"
#include "ldikit/corpus.hpp"
#include "ldikit/ensemble.hpp"
#include "ldikit/lda.hpp"
#include "ldikit/ldi.hpp"
#include "ldikit/lsa.hpp"
#include "ldikit/plsa.hpp"
#include "ldikit/score_matrix.hpp"
#include "ldikit/vsm.hpp"

namespace ldikit::experiment {

enum class Method { Tfidf, Lsi, Plsi, Lda };

std::string to_string(Method method);
/// Accepts tfidf, lsi, plsi (or plsa), lda (or ldi).
Method method_from_string(const std::string& name);
/// Tag written on score matrices: tfidf, lsi, plsi, ldi.
std::string ranker_tag(Method method);

struct CollectionSpec {
  std::string name;
  corpus::Source source = corpus::Source::Other;
  std::filesystem::path docs;
  std::filesystem::path queries;
  std::filesystem::path qrels;
  corpus::QrelsDialect dialect = corpus::QrelsDialect::Auto;
  /// Replace query ids by their 1-based position in the query file.
  bool renumber_queries = false;
};

/// Locates the standard SMART file names (MED.ALL, cran.all.1400, ...) under
/// `dir` or `dir/<name>`. Returns nothing when a file is missing.
std::optional<CollectionSpec> find_smart_collection(const std::filesystem::path& dir,
                                                     const std::string& name);

struct LoadedCollection {
  corpus::Collection collection;
  std::vector<corpus::ParseWarning> warnings;
};

/// Throws DataError naming the path when a file cannot be opened.
LoadedCollection load_collection(const CollectionSpec& spec);

struct ExperimentConfig {
  std::vector<CollectionSpec> collections;
  /// collection name (upper case) -> method -> topic count
  std::map<std::string, std::map<Method, int>> topics;
  std::uint64_t seed = 42;
  lda::LdaOptions lda;
  plsa::PlsaOptions plsa;
  /// After perplexity tempering, keep lowering the pLSI temperature while
  /// MAP on the corpus's own judged queries improves.
  bool plsa_precision_tempering = false;
  lsa::SvdOptions svd;
  ensemble::EnmOptions enm;
  std::filesystem::path output_dir = "ldikit-out";

  /// Configured count, else the default for known collections, else 100.
  int topics_for(const std::string& collection, Method method) const;

  /// Keys missing from the JSON keep their defaults. Relative collection
  /// paths are resolved against `base`.
  static ExperimentConfig from_json(const bundle::Json& json, const std::filesystem::path& base = {});
  static ExperimentConfig from_file(const std::filesystem::path& path);
  bundle::Json to_json() const;
};

/// Default topic counts per collection and method.
int default_topics(const std::string& collection, Method method);

/// LDIKIT_OUTPUT_DIR when set, otherwise `fallback`.
std::filesystem::path output_dir(const std::filesystem::path& fallback);

struct TrainedModel {
  Method method = Method::Tfidf;
  int k = 0;
  std::uint64_t seed = 0;
  std::string corpus_checksum;
  vsm::TfIdfModel tfidf;
  lsa::LsiModel lsi;
  plsa::PlsaModel plsa;
  lda::LdaModel lda;
  ldi::LdiIndex ldi;
  /// Iteration counts and objective traces.
  bundle::Json log = bundle::Json::object();
};

/// k is ignored for tf-idf.
TrainedModel train_model(Method method, const corpus::Corpus& corpus, int k, std::uint64_t seed,
                         const ExperimentConfig& config = {});

bundle::ModelBundle to_bundle(const TrainedModel& model);

/// Rebuilds a model against `corpus`. A checksum mismatch is reported in
/// `warnings`; a vocabulary or document count mismatch is a DataError.
TrainedModel from_bundle(const bundle::ModelBundle& bundle, const corpus::Corpus& corpus,
                         std::vector<std::string>* warnings = nullptr);

ScoreVector score_query(const TrainedModel& model, std::span<const corpus::TermCount> query);

/// Every query of the corpus against every document.
ScoreMatrix score_queries(const TrainedModel& model, const corpus::Corpus& corpus);

struct SweepRow {
  Method method = Method::Lda;
  int k = 0;
  std::uint64_t seed = 0;
  double map = 0.0;
  double seconds = 0.0;
};

/// Trains and evaluates every (k, seed) pair. Throws DataError on an empty list.
std::vector<SweepRow> sweep(const corpus::Corpus& corpus, Method method, const std::vector<int>& ks,
                            const std::vector<std::uint64_t>& seeds,
                            const ExperimentConfig& config = {});

/// Score matrices for tf-idf, LSI, pLSI and LDI, in that order, using the
/// configured topic counts for `collection`.
std::vector<ScoreMatrix> score_all_methods(const corpus::Corpus& corpus,
                                           const std::string& collection,
                                           const ExperimentConfig& config);

}  // namespace ldikit::experiment
