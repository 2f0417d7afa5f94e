#include "ldikit/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <sstream>

#include "ldikit/error.hpp"

namespace ldikit::corpus {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

void append_line(std::string& section, std::string_view line) {
  line = trim(line);
  if (line.empty()) return;
  if (!section.empty()) section.push_back(' ');
  section.append(line);
}

// A SMART record: the id plus the raw text of each section, keyed by marker letter.
struct SmartRecord {
  int id = 0;
  std::map<char, std::string> sections;
};

bool is_marker(std::string_view line) {
  return line.size() >= 2 && line[0] == '.' && std::isalpha(static_cast<unsigned char>(line[1])) &&
         (line.size() == 2 || std::isspace(static_cast<unsigned char>(line[2])));
}

std::vector<SmartRecord> read_records(std::istream& in, std::vector<ParseWarning>* warnings) {
  std::vector<SmartRecord> records;
  std::string line;
  std::size_t line_no = 0;
  std::string* current = nullptr;
  auto warn = [&](std::string message) {
    if (warnings) warnings->push_back({line_no, std::move(message)});
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_marker(line)) {
      const char marker = static_cast<char>(std::toupper(static_cast<unsigned char>(line[1])));
      if (marker == 'I') {
        auto rest = trim(std::string_view(line).substr(2));
        int id = 0;
        auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), id);
        if (rest.empty() || ec != std::errc() || ptr != rest.data() + rest.size()) {
          throw ParseError("malformed record id '" + std::string(rest) + "'", line_no);
        }
        records.push_back({id, {}});
        current = nullptr;
        continue;
      }
      if (records.empty()) {
        warn("section marker before first .I record ignored");
        current = nullptr;
        continue;
      }
      switch (marker) {
        case 'T':
        case 'A':
        case 'B':
        case 'W':
        case 'X':
        case 'N':
          current = &records.back().sections[marker];
          break;
        default:
          warn(std::string("unknown section marker '.") + marker + "' ignored");
          current = nullptr;
          break;
      }
      // Text sharing the marker line belongs to the section.
      if (current && line.size() > 2) append_line(*current, std::string_view(line).substr(2));
      continue;
    }
    if (current) {
      append_line(*current, line);
    } else if (!trim(line).empty() && records.empty()) {
      warn("text before first .I record ignored");
    }
  }
  return records;
}

std::string section(const SmartRecord& r, char marker) {
  auto it = r.sections.find(marker);
  return it == r.sections.end() ? std::string() : it->second;
}

}  // namespace

std::string_view to_string(Source source) {
  switch (source) {
    case Source::Med: return "MED";
    case Source::Cran: return "CRAN";
    case Source::Cisi: return "CISI";
    case Source::Cacm: return "CACM";
    case Source::Other: break;
  }
  return "OTHER";
}

Source source_from_string(std::string_view tag) {
  const auto t = lower(tag);
  if (t == "med") return Source::Med;
  if (t == "cran") return Source::Cran;
  if (t == "cisi") return Source::Cisi;
  if (t == "cacm") return Source::Cacm;
  return Source::Other;
}

std::string RawDocument::indexed_text() const {
  if (title.empty()) return body;
  if (body.empty()) return title;
  return title + " " + body;
}

std::vector<RawDocument> parse_smart(std::istream& in, Source source,
                                     std::vector<ParseWarning>* warnings) {
  std::vector<RawDocument> docs;
  for (auto& r : read_records(in, warnings)) {
    docs.push_back({r.id, section(r, 'T'), section(r, 'W'), source});
  }
  return docs;
}

std::vector<Query> parse_queries(std::istream& in, Source source,
                                 std::vector<ParseWarning>* warnings) {
  std::vector<Query> queries;
  for (auto& r : read_records(in, warnings)) {
    queries.push_back({r.id, section(r, 'W'), source});
  }
  return queries;
}

std::string_view to_string(QrelsDialect dialect) {
  switch (dialect) {
    case QrelsDialect::Auto: return "auto";
    case QrelsDialect::QidDid: return "qid-did";
    case QrelsDialect::QidZeroDid: return "qid-0-did-rel";
  }
  return "auto";
}

QrelsDialect qrels_dialect_from_string(std::string_view name) {
  const auto n = lower(name);
  if (n == "auto") return QrelsDialect::Auto;
  if (n == "qid-did" || n == "2col") return QrelsDialect::QidDid;
  if (n == "qid-0-did-rel" || n == "trec") return QrelsDialect::QidZeroDid;
  throw DataError("unknown qrels dialect '" + std::string(name) + "'");
}

Qrels parse_qrels(std::istream& in, QrelsDialect dialect) {
  struct Row {
    std::size_t line;
    std::vector<std::string> cols;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    Row row{line_no, {}};
    for (std::string tok; ss >> tok;) row.cols.push_back(tok);
    if (!row.cols.empty()) rows.push_back(std::move(row));
  }

  auto as_number = [](const std::string& tok, std::size_t line_no) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(value)) {
      throw ParseError("non-numeric qrels token '" + tok + "'", line_no);
    }
    return value;
  };
  auto as_id = [&](const std::string& tok, std::size_t line_no) {
    const double value = as_number(tok, line_no);
    if (value != std::floor(value)) throw ParseError("non-integer id '" + tok + "'", line_no);
    return static_cast<int>(value);
  };

  if (dialect == QrelsDialect::Auto) {
    bool second_always_zero = !rows.empty();
    for (const auto& r : rows) {
      if (r.cols.size() < 3 || as_number(r.cols[1], r.line) != 0.0) {
        second_always_zero = false;
        break;
      }
    }
    dialect = second_always_zero ? QrelsDialect::QidZeroDid : QrelsDialect::QidDid;
  }

  Qrels qrels;
  for (const auto& r : rows) {
    const std::size_t did_col = dialect == QrelsDialect::QidZeroDid ? 2 : 1;
    if (r.cols.size() <= did_col) {
      throw ParseError("expected at least " + std::to_string(did_col + 1) + " columns", r.line);
    }
    const int qid = as_id(r.cols[0], r.line);
    const int did = as_id(r.cols[did_col], r.line);
    if (dialect == QrelsDialect::QidZeroDid && r.cols.size() > 3 &&
        as_number(r.cols[3], r.line) <= 0.0) {
      continue;  // judged non-relevant
    }
    qrels[qid].insert(did);
  }
  return qrels;
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> df,
                       std::vector<std::uint64_t> cf)
    : terms_(std::move(terms)), df_(std::move(df)), cf_(std::move(cf)) {
  if (df_.size() != terms_.size() || cf_.size() != terms_.size()) {
    throw DataError("vocabulary columns have different lengths");
  }
  for (std::uint32_t i = 0; i < terms_.size(); ++i) {
    if (!index_.emplace(terms_[i], i).second) {
      throw DataError("duplicate vocabulary term '" + terms_[i] + "'");
    }
  }
}

std::optional<std::uint32_t> Vocabulary::index_of(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void TermDocCounts::add_row(std::vector<TermCount> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const TermCount& a, const TermCount& b) { return a.term < b.term; });
  std::uint64_t total = 0;
  const std::size_t start = entries_.size();
  for (const auto& e : entries) {
    if (e.term >= num_terms_) throw DataError("term index out of range");
    if (e.count == 0) continue;
    if (entries_.size() > start && entries_.back().term == e.term) {
      entries_.back().count += e.count;
    } else {
      entries_.push_back(e);
    }
    total += e.count;
  }
  row_ptr_.push_back(entries_.size());
  totals_.push_back(total);
}

std::span<const TermCount> TermDocCounts::row(std::size_t i) const {
  if (i + 1 >= row_ptr_.size()) throw DataError("row index out of range");
  return {entries_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
}

std::uint64_t TermDocCounts::total() const noexcept {
  return std::accumulate(totals_.begin(), totals_.end(), std::uint64_t{0});
}

std::vector<std::uint32_t> TermDocCounts::document_frequencies() const {
  std::vector<std::uint32_t> df(num_terms_, 0);
  for (const auto& e : entries_) ++df[e.term];
  return df;
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& tokenized_docs,
                            const StopList& stoplist) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::pair<std::uint32_t, std::uint64_t>> stats;  // df, cf
  for (const auto& doc : tokenized_docs) {
    std::unordered_map<std::string, bool> seen;
    for (const auto& tok : doc) {
      if (stoplist.contains(tok)) continue;
      auto [it, inserted] = stats.try_emplace(tok, 0u, 0u);
      if (inserted) order.push_back(tok);
      ++it->second.second;
      if (seen.emplace(tok, true).second) ++it->second.first;
    }
  }
  std::vector<std::string> terms;
  std::vector<std::uint32_t> df;
  std::vector<std::uint64_t> cf;
  for (const auto& t : order) {
    const auto& [d, c] = stats.at(t);
    if (c < 2) continue;  // hapax
    terms.push_back(t);
    df.push_back(d);
    cf.push_back(c);
  }
  if (terms.empty()) throw DataError("vocabulary is empty after stop-word and hapax removal");
  return Vocabulary(std::move(terms), std::move(df), std::move(cf));
}

namespace {

std::vector<std::vector<std::string>> tokenize_all(const std::vector<RawDocument>& docs) {
  std::vector<std::vector<std::string>> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(tokenize(d.indexed_text()));
  return out;
}

}  // namespace

Vocabulary build_vocabulary(const std::vector<RawDocument>& docs, const StopList& stoplist) {
  return build_vocabulary(tokenize_all(docs), stoplist);
}

std::vector<TermCount> count_terms(const std::vector<std::string>& tokens,
                                   const Vocabulary& vocab) {
  std::map<std::uint32_t, std::uint32_t> counts;
  for (const auto& tok : tokens) {
    if (auto idx = vocab.index_of(tok)) ++counts[*idx];
  }
  std::vector<TermCount> row;
  row.reserve(counts.size());
  for (auto [term, count] : counts) row.push_back({term, count});
  return row;
}

TermDocCounts build_counts(const std::vector<std::vector<std::string>>& tokenized_docs,
                           const Vocabulary& vocab) {
  TermDocCounts counts(vocab.size());
  for (const auto& doc : tokenized_docs) counts.add_row(count_terms(doc, vocab));
  return counts;
}

TermDocCounts build_counts(const std::vector<RawDocument>& docs, const Vocabulary& vocab) {
  return build_counts(tokenize_all(docs), vocab);
}

MergeResult merge_collections(const std::vector<Collection>& collections, std::string name) {
  MergeResult result;
  result.merged.name = std::move(name);
  result.merged.source = Source::Other;
  int doc_offset = 0;
  int query_offset = 0;
  for (const auto& c : collections) {
    result.doc_offsets.push_back(doc_offset);
    result.query_offsets.push_back(query_offset);
    int max_doc = 0;
    int max_query = 0;
    for (auto d : c.docs) {
      max_doc = std::max(max_doc, d.id);
      d.id += doc_offset;
      result.merged.docs.push_back(std::move(d));
    }
    for (auto q : c.queries) {
      max_query = std::max(max_query, q.id);
      q.id += query_offset;
      result.merged.queries.push_back(std::move(q));
    }
    for (const auto& [qid, dids] : c.qrels) {
      max_query = std::max(max_query, qid);
      auto& target = result.merged.qrels[qid + query_offset];
      for (int did : dids) {
        max_doc = std::max(max_doc, did);
        target.insert(did + doc_offset);
      }
    }
    doc_offset += max_doc;
    query_offset += max_query;
  }
  return result;
}

std::vector<QrelsViolation> validate_qrels(const Collection& collection) {
  std::set<int> doc_ids;
  std::set<int> query_ids;
  for (const auto& d : collection.docs) doc_ids.insert(d.id);
  for (const auto& q : collection.queries) query_ids.insert(q.id);
  std::vector<QrelsViolation> violations;
  for (const auto& [qid, dids] : collection.qrels) {
    if (!query_ids.contains(qid)) violations.push_back({qid, 0});
    for (int did : dids) {
      if (!doc_ids.contains(did)) violations.push_back({qid, did});
    }
  }
  return violations;
}

std::optional<std::size_t> Corpus::doc_index(int doc_id) const {
  auto it = std::find(doc_ids.begin(), doc_ids.end(), doc_id);
  if (it == doc_ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - doc_ids.begin());
}

Corpus build_corpus(const Collection& collection, const StopList& stoplist) {
  Corpus corpus;
  corpus.name = collection.name;
  auto tokenized = tokenize_all(collection.docs);
  corpus.vocab = build_vocabulary(tokenized, stoplist);
  corpus.docs = build_counts(tokenized, corpus.vocab);
  for (const auto& d : collection.docs) {
    corpus.doc_ids.push_back(d.id);
    corpus.doc_sources.push_back(d.source);
  }
  corpus.queries = TermDocCounts(corpus.vocab.size());
  for (const auto& q : collection.queries) {
    corpus.query_ids.push_back(q.id);
    corpus.queries.add_row(count_terms(tokenize(q.text), corpus.vocab));
  }
  corpus.qrels = collection.qrels;
  corpus.qrels_violations = validate_qrels(collection);
  return corpus;
}

}  // namespace ldikit::corpus
