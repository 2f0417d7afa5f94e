#include "ldikit/score_matrix.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <map>
#include <sstream>
#include <unordered_map>

#include "ldikit/bundle.hpp"
#include "ldikit/error.hpp"

namespace ldikit {

namespace {

constexpr char kMagic[8] = {'L', 'D', 'I', 'K', 'S', 'C', 'M', '1'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

void put_f64(std::string& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

}  // namespace

void ScoreMatrix::validate() const {
  if (scores.rows() != static_cast<Eigen::Index>(query_ids.size()) ||
      scores.cols() != static_cast<Eigen::Index>(doc_ids.size())) {
    throw DataError("score matrix '" + model + "' is " + std::to_string(scores.rows()) + "x" +
                    std::to_string(scores.cols()) + " but lists " +
                    std::to_string(query_ids.size()) + " queries and " +
                    std::to_string(doc_ids.size()) + " documents");
  }
  if (!scores.allFinite()) throw DataError("score matrix '" + model + "' has non-finite entries");
}

ScoreMatrix ScoreMatrix::select_queries(const std::vector<int>& ids) const {
  std::unordered_map<int, Eigen::Index> row_of;
  for (std::size_t i = 0; i < query_ids.size(); ++i) row_of.emplace(query_ids[i], static_cast<Eigen::Index>(i));
  ScoreMatrix out{model, ids, doc_ids, Eigen::MatrixXd(static_cast<Eigen::Index>(ids.size()), scores.cols())};
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto it = row_of.find(ids[i]);
    if (it == row_of.end()) throw DataError("query " + std::to_string(ids[i]) + " not in '" + model + "'");
    out.scores.row(static_cast<Eigen::Index>(i)) = scores.row(it->second);
  }
  return out;
}

void write_score_matrix(const std::filesystem::path& path, const ScoreMatrix& matrix) {
  matrix.validate();
  const bundle::Json header = {{"model", matrix.model},
                               {"rows", matrix.scores.rows()},
                               {"cols", matrix.scores.cols()},
                               {"dtype", "float64-le"},
                               {"order", "row-major"},
                               {"query_ids", matrix.query_ids},
                               {"doc_ids", matrix.doc_ids}};
  const std::string text = header.dump();
  std::string out(kMagic, sizeof(kMagic));
  put_u64(out, text.size());
  out += text;
  out.reserve(out.size() + static_cast<std::size_t>(matrix.scores.size()) * 8);
  for (Eigen::Index r = 0; r < matrix.scores.rows(); ++r)
    for (Eigen::Index c = 0; c < matrix.scores.cols(); ++c) put_f64(out, matrix.scores(r, c));
  bundle::write_file(path, out);
}

void write_score_matrix_csv(const std::filesystem::path& path, const ScoreMatrix& matrix) {
  matrix.validate();
  std::ostringstream out;
  out << "qid,did,score\n" << std::setprecision(17);
  for (Eigen::Index r = 0; r < matrix.scores.rows(); ++r)
    for (Eigen::Index c = 0; c < matrix.scores.cols(); ++c)
      out << matrix.query_ids[static_cast<std::size_t>(r)] << ','
          << matrix.doc_ids[static_cast<std::size_t>(c)] << ',' << matrix.scores(r, c) << '\n';
  bundle::write_file(path, out.str());
}

namespace {

ScoreMatrix read_csv(const std::filesystem::path& path, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<int> qids;
  std::vector<int> dids;
  std::map<std::pair<int, int>, double> cells;
  std::unordered_map<int, bool> seen_q;
  std::unordered_map<int, bool> seen_d;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    int q = 0;
    int d = 0;
    double s = 0.0;
    if (!(fields >> q >> d >> s)) throw ParseError("expected qid,did,score", line_no);
    if (seen_q.emplace(q, true).second) qids.push_back(q);
    if (seen_d.emplace(d, true).second) dids.push_back(d);
    cells[{q, d}] = s;
  }
  ScoreMatrix m{path.stem().string(), qids, dids,
                Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(qids.size()),
                                      static_cast<Eigen::Index>(dids.size()))};
  std::unordered_map<int, Eigen::Index> qi;
  std::unordered_map<int, Eigen::Index> di;
  for (std::size_t i = 0; i < qids.size(); ++i) qi[qids[i]] = static_cast<Eigen::Index>(i);
  for (std::size_t i = 0; i < dids.size(); ++i) di[dids[i]] = static_cast<Eigen::Index>(i);
  if (cells.size() != qids.size() * dids.size()) {
    throw DataError("'" + path.string() + "' does not list every query/document pair");
  }
  for (const auto& [key, s] : cells) m.scores(qi[key.first], di[key.second]) = s;
  return m;
}

}  // namespace

ScoreMatrix read_score_matrix(const std::filesystem::path& path) {
  const std::string bytes = bundle::read_file(path);
  if (path.extension() == ".csv") return read_csv(path, bytes);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw DataError("'" + path.string() + "' is not a score matrix file");
  }
  const std::uint64_t header_len = get_u64(bytes, 8);
  if (16 + header_len > bytes.size()) throw DataError("truncated score matrix header");
  bundle::Json header;
  try {
    header = bundle::Json::parse(bytes.substr(16, header_len));
  } catch (const bundle::Json::exception& e) {
    throw DataError("bad score matrix header: " + std::string(e.what()));
  }
  ScoreMatrix m;
  m.model = header.at("model").get<std::string>();
  m.query_ids = header.at("query_ids").get<std::vector<int>>();
  m.doc_ids = header.at("doc_ids").get<std::vector<int>>();
  const auto rows = header.at("rows").get<Eigen::Index>();
  const auto cols = header.at("cols").get<Eigen::Index>();
  const std::size_t start = 16 + header_len;
  if (bytes.size() - start != static_cast<std::size_t>(rows * cols) * 8) {
    throw DataError("score matrix payload does not match its header");
  }
  m.scores.resize(rows, cols);
  std::size_t pos = start;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c, pos += 8) m.scores(r, c) = std::bit_cast<double>(get_u64(bytes, pos));
  m.validate();
  return m;
}

}  // namespace ldikit
