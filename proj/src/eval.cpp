#include "ldikit/eval.hpp"

#include <algorithm>
#include <numeric>

#include "ldikit/error.hpp"

namespace ldikit::eval {

RankedList rank(const Eigen::Ref<const Eigen::VectorXd>& scores, std::span<const int> doc_ids,
                int query_id) {
  if (static_cast<std::size_t>(scores.size()) != doc_ids.size()) {
    throw DataError("score vector and document id list differ in length");
  }
  std::vector<std::size_t> order(doc_ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = scores[static_cast<Eigen::Index>(a)];
    const double sb = scores[static_cast<Eigen::Index>(b)];
    if (sa != sb) return sa > sb;
    return doc_ids[a] < doc_ids[b];
  });
  RankedList out{query_id, {}};
  out.doc_ids.reserve(order.size());
  for (auto i : order) out.doc_ids.push_back(doc_ids[i]);
  return out;
}

namespace {

// 1-based ranks of the relevant documents, ascending.
std::vector<std::size_t> relevant_ranks(const RankedList& ranked, const std::set<int>& relevant) {
  if (relevant.empty()) throw DataError("average precision needs at least one relevant document");
  std::vector<std::size_t> ranks;
  ranks.reserve(relevant.size());
  for (std::size_t pos = 0; pos < ranked.doc_ids.size(); ++pos) {
    if (relevant.contains(ranked.doc_ids[pos])) ranks.push_back(pos + 1);
  }
  if (ranks.size() != relevant.size()) {
    throw DataError("query " + std::to_string(ranked.query_id) +
                    " has relevant documents missing from the ranking");
  }
  return ranks;
}

}  // namespace

double average_precision(const RankedList& ranked, const std::set<int>& relevant) {
  const auto ranks = relevant_ranks(ranked, relevant);
  double sum = 0.0;
  for (std::size_t j = 0; j < ranks.size(); ++j) {
    sum += static_cast<double>(j + 1) / static_cast<double>(ranks[j]);
  }
  return sum / static_cast<double>(ranks.size());
}

double mean_average_precision(std::span<const double> per_query_ap) {
  if (per_query_ap.empty()) throw DataError("mean average precision over an empty query set");
  return std::accumulate(per_query_ap.begin(), per_query_ap.end(), 0.0) /
         static_cast<double>(per_query_ap.size());
}

PrCurve pr_curve(const RankedList& ranked, const std::set<int>& relevant) {
  const auto ranks = relevant_ranks(ranked, relevant);
  const double n_rel = static_cast<double>(ranks.size());
  // Precision is only worth recording where recall changes.
  std::vector<std::pair<double, double>> points;  // recall, precision
  for (std::size_t j = 0; j < ranks.size(); ++j) {
    points.emplace_back((j + 1) / n_rel, (j + 1) / static_cast<double>(ranks[j]));
  }
  PrCurve curve;
  for (std::size_t i = 0; i < curve.precision.size(); ++i) {
    const double r = PrCurve::recall_at(i);
    double best = 0.0;
    for (const auto& [recall, precision] : points) {
      if (recall >= r - 1e-12) best = std::max(best, precision);
    }
    curve.precision[i] = best;
  }
  return curve;
}

PrCurve macro_average(std::span<const PrCurve> curves) {
  if (curves.empty()) throw DataError("macro average of no curves");
  PrCurve avg;
  for (const auto& c : curves)
    for (std::size_t i = 0; i < avg.precision.size(); ++i) avg.precision[i] += c.precision[i];
  for (auto& p : avg.precision) p /= static_cast<double>(curves.size());
  return avg;
}

namespace {

std::set<int> judged_present(const corpus::Qrels& qrels, int qid, const std::set<int>& docs) {
  std::set<int> out;
  auto it = qrels.find(qid);
  if (it == qrels.end()) return out;
  for (int d : it->second)
    if (docs.contains(d)) out.insert(d);
  return out;
}

}  // namespace

EvalReport evaluate(const ScoreMatrix& matrix, const corpus::Qrels& qrels) {
  matrix.validate();
  const std::set<int> docs(matrix.doc_ids.begin(), matrix.doc_ids.end());
  EvalReport report;
  std::vector<PrCurve> curves;
  for (std::size_t r = 0; r < matrix.query_ids.size(); ++r) {
    const int qid = matrix.query_ids[r];
    const auto relevant = judged_present(qrels, qid, docs);
    if (relevant.empty()) {
      report.skipped.push_back(qid);
      continue;
    }
    const auto ranked = rank(matrix.scores.row(static_cast<Eigen::Index>(r)).transpose(),
                             matrix.doc_ids, qid);
    report.query_ids.push_back(qid);
    report.ap.push_back(average_precision(ranked, relevant));
    curves.push_back(pr_curve(ranked, relevant));
  }
  if (report.ap.empty()) throw DataError("no judged queries in '" + matrix.model + "'");
  report.map = mean_average_precision(report.ap);
  report.curve = macro_average(curves);
  return report;
}

std::vector<double> per_query_ap(const ScoreMatrix& matrix, const corpus::Qrels& qrels) {
  const std::set<int> docs(matrix.doc_ids.begin(), matrix.doc_ids.end());
  std::vector<double> out;
  out.reserve(matrix.query_ids.size());
  for (std::size_t r = 0; r < matrix.query_ids.size(); ++r) {
    const int qid = matrix.query_ids[r];
    const auto relevant = judged_present(qrels, qid, docs);
    if (relevant.empty()) throw DataError("query " + std::to_string(qid) + " has no judgments");
    out.push_back(average_precision(
        rank(matrix.scores.row(static_cast<Eigen::Index>(r)).transpose(), matrix.doc_ids, qid),
        relevant));
  }
  return out;
}

}  // namespace ldikit::eval
