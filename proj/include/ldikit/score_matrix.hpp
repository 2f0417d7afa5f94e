#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ldikit {

/// Scores of one ranker: one row per query, one column per document.
struct ScoreMatrix {
  std::string model;
  std::vector<int> query_ids;
  std::vector<int> doc_ids;
  Eigen::MatrixXd scores;

  /// Throws DataError unless the id lists match the matrix shape and every entry is finite.
  void validate() const;

  /// The rows for the given query ids, in that order.
  ScoreMatrix select_queries(const std::vector<int>& ids) const;
};

/// Binary layout: 8-byte magic "LDIKSCM1", uint64 little-endian header
/// length, JSON header (model, rows, cols, query_ids, doc_ids), then
/// rows * cols float64 little-endian values, row-major.
void write_score_matrix(const std::filesystem::path& path, const ScoreMatrix& matrix);

/// Long-form CSV "qid,did,score", one line per cell.
void write_score_matrix_csv(const std::filesystem::path& path, const ScoreMatrix& matrix);

/// Reads either format; ".csv" files are parsed as CSV.
ScoreMatrix read_score_matrix(const std::filesystem::path& path);

}  // namespace ldikit
