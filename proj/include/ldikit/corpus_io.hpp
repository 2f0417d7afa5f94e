#pragma once

#include <filesystem>
#include <string>

#include "ldikit/bundle.hpp"
#include "ldikit/corpus.hpp"

namespace ldikit::corpus {

/// On-disk corpus bundle:
///   manifest.json  collection tags, counts, dialects, tokenizer version, ids
///   vocab.txt      one term per line, index = line number (0-based)
///   counts.csv     "doc,term,count" (document id, term index)
///   queries.csv    "query,term,count"
///   qrels.csv      "qid,did"
struct CorpusBundleInfo {
  bundle::Json collections = bundle::Json::array();  ///< per-collection provenance
};

/// Writes the bundle and returns its checksum.
std::string write_corpus_bundle(const std::filesystem::path& dir, const Corpus& corpus,
                                const CorpusBundleInfo& info = {});

struct LoadedCorpus {
  Corpus corpus;
  bundle::Json manifest;
  std::string checksum;
};

LoadedCorpus read_corpus_bundle(const std::filesystem::path& dir);

/// Checksum over the serialized vocabulary, counts, queries and qrels.
std::string corpus_checksum(const Corpus& corpus);

}  // namespace ldikit::corpus
