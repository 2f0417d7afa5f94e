#pragma once

#include <array>
#include <set>
#include <span>
#include <vector>

#include "ldikit/corpus.hpp"
#include "ldikit/score_matrix.hpp"
#include "ldikit/types.hpp"

namespace ldikit::eval {

/// Every document id, best first. Ties go to the smaller document id.
struct RankedList {
  int query_id = 0;
  std::vector<int> doc_ids;
};

RankedList rank(const Eigen::Ref<const Eigen::VectorXd>& scores, std::span<const int> doc_ids,
                int query_id = 0);

/// (1/|D|) sum_j j / R(d_j), where R(d_j) is the 1-based rank of the j-th
/// relevant document in ranking order. Throws on an empty relevant set or a
/// relevant id missing from the ranking.
double average_precision(const RankedList& ranked, const std::set<int>& relevant);

double mean_average_precision(std::span<const double> per_query_ap);

/// 11-point interpolated precision at recall 0.0, 0.1, ..., 1.0.
struct PrCurve {
  std::array<double, 11> precision{};

  static constexpr double recall_at(std::size_t i) { return static_cast<double>(i) / 10.0; }
};

PrCurve pr_curve(const RankedList& ranked, const std::set<int>& relevant);
PrCurve macro_average(std::span<const PrCurve> curves);

/// Per-query results for a whole score matrix. Queries without judgments
/// (or whose judged documents are all absent) are listed in `skipped` and
/// left out of the mean.
struct EvalReport {
  std::vector<int> query_ids;
  std::vector<double> ap;
  std::vector<int> skipped;
  double map = 0.0;
  PrCurve curve;
};

/// Throws DataError when no query is judged.
EvalReport evaluate(const ScoreMatrix& matrix, const corpus::Qrels& qrels);

/// AP for every row of the matrix, in row order. Every row must be judged.
std::vector<double> per_query_ap(const ScoreMatrix& matrix, const corpus::Qrels& qrels);

}  // namespace ldikit::eval
