#include "ldikit/corpus_io.hpp"

#include <charconv>
#include <sstream>
#include <unordered_map>

#include "ldikit/error.hpp"
#include "ldikit/version.hpp"

namespace ldikit::corpus {

namespace fs = std::filesystem;
using bundle::Json;

namespace {

std::string serialize_vocab(const Vocabulary& vocab) {
  std::string out;
  for (const auto& t : vocab.terms()) {
    out += t;
    out += '\n';
  }
  return out;
}

std::string serialize_counts(const char* id_column, const std::vector<int>& ids,
                             const TermDocCounts& counts) {
  std::ostringstream out;
  out << id_column << ",term,count\n";
  for (std::size_t i = 0; i < counts.rows(); ++i) {
    for (const auto& e : counts.row(i)) out << ids[i] << ',' << e.term << ',' << e.count << '\n';
  }
  return out.str();
}

std::string serialize_qrels(const Qrels& qrels) {
  std::ostringstream out;
  out << "qid,did\n";
  for (const auto& [qid, dids] : qrels)
    for (int did : dids) out << qid << ',' << did << '\n';
  return out.str();
}

std::string checksum_of(const std::string& vocab, const std::string& counts,
                        const std::string& queries, const std::string& qrels) {
  std::string all;
  all.reserve(vocab.size() + counts.size() + queries.size() + qrels.size() + 3);
  all.append(vocab).push_back('\0');
  all.append(counts).push_back('\0');
  all.append(queries).push_back('\0');
  all.append(qrels);
  return bundle::sha256_hex(all);
}

std::vector<std::vector<long long>> parse_csv_ints(const std::string& text, std::size_t columns,
                                                   const std::string& what) {
  std::vector<std::vector<long long>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;  // header
    std::vector<long long> row;
    std::string_view rest(line);
    while (true) {
      auto comma = rest.find(',');
      auto field = rest.substr(0, comma);
      long long v = 0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError(what + ": bad integer field '" + std::string(field) + "'", line_no);
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (row.size() != columns) {
      throw ParseError(what + ": expected " + std::to_string(columns) + " fields", line_no);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

TermDocCounts counts_from_rows(const std::vector<std::vector<long long>>& rows,
                               const std::vector<int>& ids, std::size_t num_terms,
                               const std::string& what) {
  std::unordered_map<int, std::size_t> position;
  for (std::size_t i = 0; i < ids.size(); ++i) position.emplace(ids[i], i);
  std::vector<std::vector<TermCount>> per_row(ids.size());
  for (const auto& r : rows) {
    auto it = position.find(static_cast<int>(r[0]));
    if (it == position.end()) throw DataError(what + ": unknown id " + std::to_string(r[0]));
    if (r[1] < 0 || static_cast<std::size_t>(r[1]) >= num_terms || r[2] <= 0) {
      throw DataError(what + ": bad entry for id " + std::to_string(r[0]));
    }
    per_row[it->second].push_back(
        {static_cast<std::uint32_t>(r[1]), static_cast<std::uint32_t>(r[2])});
  }
  TermDocCounts counts(num_terms);
  for (auto& row : per_row) counts.add_row(std::move(row));
  return counts;
}

}  // namespace

std::string corpus_checksum(const Corpus& corpus) {
  return checksum_of(serialize_vocab(corpus.vocab),
                     serialize_counts("doc", corpus.doc_ids, corpus.docs),
                     serialize_counts("query", corpus.query_ids, corpus.queries),
                     serialize_qrels(corpus.qrels));
}

std::string write_corpus_bundle(const fs::path& dir, const Corpus& corpus,
                                const CorpusBundleInfo& info) {
  fs::create_directories(dir);
  const auto vocab = serialize_vocab(corpus.vocab);
  const auto counts = serialize_counts("doc", corpus.doc_ids, corpus.docs);
  const auto queries = serialize_counts("query", corpus.query_ids, corpus.queries);
  const auto qrels = serialize_qrels(corpus.qrels);
  const auto checksum = checksum_of(vocab, counts, queries, qrels);

  Json sources = Json::array();
  for (auto s : corpus.doc_sources) sources.push_back(std::string(to_string(s)));
  Json violations = Json::array();
  for (const auto& v : corpus.qrels_violations) violations.push_back({v.query_id, v.doc_id});

  std::size_t judged = 0;
  for (const auto& [qid, dids] : corpus.qrels) judged += dids.empty() ? 0 : 1;

  Json manifest = {
      {"format", "ldikit-corpus"},
      {"version", 1},
      {"toolkit_version", kToolkitVersion},
      {"name", corpus.name},
      {"collections", info.collections},
      {"tokenizer", std::string(kTokenizerVersion)},
      {"stoplist_entries", StopList::smart().entry_count()},
      {"summary",
       {{"documents", corpus.doc_ids.size()},
        {"queries", corpus.query_ids.size()},
        {"judged_queries", judged},
        {"terms", corpus.vocab.size()},
        {"tokens", corpus.docs.total()}}},
      {"doc_ids", corpus.doc_ids},
      {"doc_sources", sources},
      {"query_ids", corpus.query_ids},
      {"qrels_violations", violations},
      {"checksum", checksum},
  };

  bundle::write_file(dir / "vocab.txt", vocab);
  bundle::write_file(dir / "counts.csv", counts);
  bundle::write_file(dir / "queries.csv", queries);
  bundle::write_file(dir / "qrels.csv", qrels);
  bundle::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return checksum;
}

LoadedCorpus read_corpus_bundle(const fs::path& dir) {
  LoadedCorpus loaded;
  try {
    loaded.manifest = Json::parse(bundle::read_file(dir / "manifest.json"));
  } catch (const Json::exception& e) {
    throw DataError("bad corpus manifest in '" + dir.string() + "': " + e.what());
  }
  const auto& m = loaded.manifest;
  if (m.value("format", "") != "ldikit-corpus") {
    throw DataError("'" + dir.string() + "' is not a corpus bundle");
  }
  Corpus& c = loaded.corpus;
  c.name = m.value("name", "");
  c.doc_ids = m.at("doc_ids").get<std::vector<int>>();
  c.query_ids = m.at("query_ids").get<std::vector<int>>();
  for (const auto& s : m.at("doc_sources")) c.doc_sources.push_back(source_from_string(s.get<std::string>()));
  for (const auto& v : m.at("qrels_violations")) c.qrels_violations.push_back({v[0], v[1]});

  const auto vocab_text = bundle::read_file(dir / "vocab.txt");
  const auto counts_text = bundle::read_file(dir / "counts.csv");
  const auto queries_text = bundle::read_file(dir / "queries.csv");
  const auto qrels_text = bundle::read_file(dir / "qrels.csv");

  std::vector<std::string> terms;
  {
    std::istringstream in(vocab_text);
    for (std::string line; std::getline(in, line);) terms.push_back(line);
  }
  const std::size_t v = terms.size();
  c.docs = counts_from_rows(parse_csv_ints(counts_text, 3, "counts.csv"), c.doc_ids, v, "counts.csv");
  c.queries = counts_from_rows(parse_csv_ints(queries_text, 3, "queries.csv"), c.query_ids, v,
                               "queries.csv");
  for (const auto& r : parse_csv_ints(qrels_text, 2, "qrels.csv")) {
    c.qrels[static_cast<int>(r[0])].insert(static_cast<int>(r[1]));
  }

  const auto df = c.docs.document_frequencies();
  std::vector<std::uint64_t> cf(v, 0);
  for (std::size_t i = 0; i < c.docs.rows(); ++i)
    for (const auto& e : c.docs.row(i)) cf[e.term] += e.count;
  c.vocab = Vocabulary(std::move(terms), df, std::move(cf));

  loaded.checksum = checksum_of(vocab_text, counts_text, queries_text, qrels_text);
  if (m.contains("checksum") && m.at("checksum") != loaded.checksum) {
    throw DataError("corpus bundle '" + dir.string() + "' fails its checksum");
  }
  return loaded;
}

}  // namespace ldikit::corpus
