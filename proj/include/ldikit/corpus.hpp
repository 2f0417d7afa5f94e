#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ldikit/text.hpp"

namespace ldikit::corpus {

enum class Source { Med, Cran, Cisi, Cacm, Other };

std::string_view to_string(Source source);
/// Case-insensitive; unknown tags map to Source::Other.
Source source_from_string(std::string_view tag);

struct RawDocument {
  int id = 0;
  std::string title;
  std::string body;
  Source source = Source::Other;

  /// Title and body joined by a single space (authors and bibliography are
  /// never indexed).
  std::string indexed_text() const;
};

struct Query {
  int id = 0;
  std::string text;
  Source source = Source::Other;
};

/// Query id -> ids of the documents judged relevant.
using Qrels = std::map<int, std::set<int>>;

struct ParseWarning {
  std::size_t line = 0;
  std::string message;
};

std::vector<RawDocument> parse_smart(std::istream& in, Source source,
                                     std::vector<ParseWarning>* warnings = nullptr);

std::vector<Query> parse_queries(std::istream& in, Source source,
                                 std::vector<ParseWarning>* warnings = nullptr);

/// Column layout of a relevance-judgment file.
enum class QrelsDialect {
  Auto,         ///< column 2 if it is ever non-zero, otherwise column 3
  QidDid,       ///< "qid did ..."
  QidZeroDid,   ///< "qid 0 did rel"
};

std::string_view to_string(QrelsDialect dialect);
QrelsDialect qrels_dialect_from_string(std::string_view name);

Qrels parse_qrels(std::istream& in, QrelsDialect dialect = QrelsDialect::Auto);

class Vocabulary {
 public:
  Vocabulary() = default;

  /// Rebuilds a vocabulary from stored columns; all three must have equal length.
  Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> df,
             std::vector<std::uint64_t> cf);

  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }

  std::optional<std::uint32_t> index_of(std::string_view term) const;
  const std::string& term(std::size_t index) const { return terms_.at(index); }
  std::uint32_t df(std::size_t index) const { return df_.at(index); }
  std::uint64_t cf(std::size_t index) const { return cf_.at(index); }

  const std::vector<std::string>& terms() const noexcept { return terms_; }

 private:
  std::vector<std::string> terms_;
  std::vector<std::uint32_t> df_;
  std::vector<std::uint64_t> cf_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct TermCount {
  std::uint32_t term = 0;
  std::uint32_t count = 0;

  friend bool operator==(const TermCount&, const TermCount&) = default;
};

/// Sparse row-per-document count matrix n_ij. Rows are sorted by term index
/// and contain no zero entries; empty documents are empty rows.
class TermDocCounts {
 public:
  TermDocCounts() = default;
  explicit TermDocCounts(std::size_t num_terms) : num_terms_(num_terms) {}

  /// Appends a row; entries are merged and sorted, zero counts dropped.
  void add_row(std::vector<TermCount> entries);

  std::size_t rows() const noexcept { return row_ptr_.size() - 1; }
  std::size_t num_terms() const noexcept { return num_terms_; }
  std::size_t nnz() const noexcept { return entries_.size(); }

  std::span<const TermCount> row(std::size_t i) const;
  /// N_di, the number of in-vocabulary tokens in row i.
  std::uint64_t row_total(std::size_t i) const { return totals_.at(i); }
  std::uint64_t total() const noexcept;

  /// Number of rows in which each term occurs.
  std::vector<std::uint32_t> document_frequencies() const;

  friend bool operator==(const TermDocCounts&, const TermDocCounts&) = default;

 private:
  std::size_t num_terms_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<TermCount> entries_;
  std::vector<std::uint64_t> totals_;
};

/// All tokens minus stop words minus hapax terms (corpus frequency 1), indexed
/// in first-occurrence order. Throws DataError when nothing survives.
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& tokenized_docs,
                            const StopList& stoplist);
Vocabulary build_vocabulary(const std::vector<RawDocument>& docs, const StopList& stoplist);

TermDocCounts build_counts(const std::vector<std::vector<std::string>>& tokenized_docs,
                           const Vocabulary& vocab);
TermDocCounts build_counts(const std::vector<RawDocument>& docs, const Vocabulary& vocab);

/// In-vocabulary tokens with multiplicity, sorted by term index.
std::vector<TermCount> count_terms(const std::vector<std::string>& tokens,
                                   const Vocabulary& vocab);

/// A parsed collection before preprocessing.
struct Collection {
  std::string name;
  Source source = Source::Other;
  std::vector<RawDocument> docs;
  std::vector<Query> queries;
  Qrels qrels;
};

struct MergeResult {
  Collection merged;
  /// Per input collection, the amount added to its document ids.
  std::vector<int> doc_offsets;
  std::vector<int> query_offsets;
};

/// Re-identifies documents and queries with globally unique ids by offsetting
/// each collection past the largest id of the collections before it.
MergeResult merge_collections(const std::vector<Collection>& collections,
                              std::string name = "MC");

struct QrelsViolation {
  int query_id = 0;
  int doc_id = 0;  ///< 0 when the query itself is unknown
};

/// Judgments that reference an unknown query or document.
std::vector<QrelsViolation> validate_qrels(const Collection& collection);

/// A preprocessed collection: vocabulary plus document and query counts.
struct Corpus {
  std::string name;
  std::vector<int> doc_ids;
  std::vector<int> query_ids;
  std::vector<Source> doc_sources;
  Vocabulary vocab;
  TermDocCounts docs;
  TermDocCounts queries;
  Qrels qrels;
  std::vector<QrelsViolation> qrels_violations;

  std::optional<std::size_t> doc_index(int doc_id) const;
};

Corpus build_corpus(const Collection& collection, const StopList& stoplist = StopList::smart());

}  // namespace ldikit::corpus
