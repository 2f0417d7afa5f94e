#include "ldikit/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "ldikit/error.hpp"
#include "ldikit/eval.hpp"

namespace ldikit::ensemble {

namespace {

using Eigen::Index;
using Eigen::VectorXd;

VectorXd clipped(const VectorXd& ap, double clip) {
  return ap.cwiseMax(clip).cwiseMin(1.0 - clip);
}

VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size()));
}

std::vector<int> judged_queries(const ScoreMatrix& matrix, const corpus::Qrels& qrels) {
  const std::set<int> docs(matrix.doc_ids.begin(), matrix.doc_ids.end());
  std::vector<int> out;
  for (int qid : matrix.query_ids) {
    auto it = qrels.find(qid);
    if (it == qrels.end()) continue;
    if (std::any_of(it->second.begin(), it->second.end(), [&](int d) { return docs.contains(d); }))
      out.push_back(qid);
  }
  return out;
}

std::vector<ScoreMatrix> restrict(std::span<const ScoreMatrix> matrices, const std::vector<int>& ids) {
  std::vector<ScoreMatrix> out;
  out.reserve(matrices.size());
  for (const auto& m : matrices) out.push_back(m.select_queries(ids));
  return out;
}

std::vector<std::string> model_names(std::span<const ScoreMatrix> matrices) {
  std::vector<std::string> out;
  for (const auto& m : matrices) out.push_back(m.model);
  return out;
}

}  // namespace

void check_consistent(std::span<const ScoreMatrix> matrices) {
  if (matrices.empty()) throw DataError("no score matrices given");
  for (const auto& m : matrices) {
    m.validate();
    if (m.query_ids != matrices.front().query_ids || m.doc_ids != matrices.front().doc_ids) {
      throw DataError("score matrices '" + matrices.front().model + "' and '" + m.model +
                      "' cover different queries or documents");
    }
  }
}

ScoreMatrix minmax_rows(const ScoreMatrix& matrix) {
  ScoreMatrix out = matrix;
  for (Index r = 0; r < out.scores.rows(); ++r) {
    auto row = out.scores.row(r);
    const double lo = row.minCoeff();
    const double hi = row.maxCoeff();
    if (hi > lo) {
      row = (row.array() - lo) / (hi - lo);
    } else {
      row.setZero();
    }
  }
  return out;
}

EnsembleScore ensemble_score(const VectorXd& alpha, std::span<const ScoreMatrix> matrices,
                             bool minmax_normalize) {
  check_consistent(matrices);
  if (alpha.size() != static_cast<Index>(matrices.size())) {
    throw DataError("weight vector has " + std::to_string(alpha.size()) + " entries for " +
                    std::to_string(matrices.size()) + " models");
  }
  EnsembleScore out;
  out.matrix.model = "ensemble";
  out.matrix.query_ids = matrices.front().query_ids;
  out.matrix.doc_ids = matrices.front().doc_ids;
  out.matrix.scores = Eigen::MatrixXd::Zero(matrices.front().scores.rows(),
                                            matrices.front().scores.cols());
  for (std::size_t k = 0; k < matrices.size(); ++k) {
    const double a = alpha[static_cast<Index>(k)];
    if (a == 0.0) continue;
    if (minmax_normalize) {
      out.matrix.scores += a * minmax_rows(matrices[k]).scores;
    } else {
      out.matrix.scores += a * matrices[k].scores;
    }
  }
  out.degenerate = (alpha.array() == 0.0).all();
  return out;
}

int select_model(const QueryWeights& weights, const ApTable& per_model_ap,
                 std::span<const int> candidates, SelectionRule rule, double ap_clip) {
  if (candidates.empty()) throw DataError("model selection needs at least one candidate");
  int best = -1;
  double best_value = 0.0;
  for (int j : candidates) {
    const VectorXd ap = per_model_ap.row(j).transpose();
    double value = 0.0;
    if (rule == SelectionRule::WeightedAp) {
      value = weights.dot(ap);
    } else {
      const VectorXd c = clipped(ap, ap_clip);
      value = -weights.dot(((1.0 + c.array()) * (1.0 - c.array())).sqrt().matrix());
    }
    if (best < 0 || value > best_value || (value == best_value && j < best)) {
      best = j;
      best_value = value;
    }
  }
  return best;
}

double step_size(const QueryWeights& weights, const VectorXd& ap, double ap_clip) {
  const VectorXd c = clipped(ap, ap_clip);
  const double plus = weights.dot((1.0 + c.array()).matrix());
  const double minus = weights.dot((1.0 - c.array()).matrix());
  return 0.5 * std::log(plus / minus);
}

QueryWeights update_query_weights(const VectorXd& ensemble_ap) {
  const VectorXd e = (-ensemble_ap.array()).exp().matrix();
  return e / e.sum();
}

double loss(const VectorXd& ensemble_ap) { return (1.0 - ensemble_ap.array()).sum(); }

double exp_loss_bound(const VectorXd& ensemble_ap) { return (-ensemble_ap.array()).exp().sum(); }

double surrogate(const QueryWeights& weights, const VectorXd& ap, double delta) {
  return weights.dot(((1.0 + ap.array()) / 2.0 * std::exp(-delta) +
                      (1.0 - ap.array()) / 2.0 * std::exp(delta))
                         .matrix());
}

double surrogate_slope(const QueryWeights& weights, const VectorXd& ap, double delta) {
  return weights.dot((-(1.0 + ap.array()) / 2.0 * std::exp(-delta) +
                      (1.0 - ap.array()) / 2.0 * std::exp(delta))
                         .matrix());
}

double surrogate_curvature(const QueryWeights& weights, const VectorXd& ap, double delta) {
  return surrogate(weights, ap, delta);
}

ApTable constituent_ap(std::span<const ScoreMatrix> matrices, const corpus::Qrels& qrels) {
  check_consistent(matrices);
  ApTable table(static_cast<Index>(matrices.size()), matrices.front().scores.rows());
  for (std::size_t k = 0; k < matrices.size(); ++k) {
    table.row(static_cast<Index>(k)) = to_vector(eval::per_query_ap(matrices[k], qrels)).transpose();
  }
  return table;
}

double ensemble_map(const VectorXd& alpha, std::span<const ScoreMatrix> matrices,
                    const corpus::Qrels& qrels, bool minmax_normalize) {
  return eval::evaluate(ensemble_score(alpha, matrices, minmax_normalize).matrix, qrels).map;
}

EnsembleWeights enm_train(std::span<const ScoreMatrix> all, const corpus::Qrels& qrels,
                          const EnmOptions& options) {
  check_consistent(all);
  if (!(options.epsilon > 0.0)) throw DataError("epsilon must be positive");
  if (options.max_rounds < 1) throw DataError("max_rounds must be at least 1");
  const auto ids = judged_queries(all.front(), qrels);
  if (ids.empty()) throw DataError("no judged queries to train on");
  const auto matrices = restrict(all, ids);

  const Index n_models = static_cast<Index>(matrices.size());
  const Index n_queries = static_cast<Index>(ids.size());
  const ApTable ap = constituent_ap(matrices, qrels);

  EnsembleWeights result;
  result.models = model_names(matrices);
  VectorXd alpha = VectorXd::Zero(n_models);
  QueryWeights weights = VectorXd::Constant(n_queries, 1.0 / static_cast<double>(n_queries));
  double previous = 0.0;
  double best_map = -1.0;
  std::vector<int> all_models(static_cast<std::size_t>(n_models));
  std::iota(all_models.begin(), all_models.end(), 0);
  std::vector<int> active = all_models;

  for (int round = 1; round <= options.max_rounds; ++round) {
    if (active.empty()) active = all_models;
    const int chosen = select_model(weights, ap, active, options.rule, options.ap_clip);
    const double delta = step_size(weights, ap.row(chosen).transpose(), options.ap_clip);
    alpha[chosen] += delta;

    const auto combined = ensemble_score(alpha, matrices, options.minmax_normalize);
    const auto per_query = eval::per_query_ap(combined.matrix, qrels);
    const VectorXd h_ap = to_vector(per_query);
    const double map = eval::mean_average_precision(per_query);
    result.trace.push_back({round, chosen, delta, map, alpha, weights, loss(h_ap), exp_loss_bound(h_ap)});
    if (map > best_map) {
      best_map = map;
      result.alpha = alpha;
      result.best_round = round;
    }
    if (std::abs(map - previous) <= options.epsilon) {
      result.converged = true;
      break;
    }
    active.erase(std::find(active.begin(), active.end(), chosen));
    weights = update_query_weights(h_ap);
    previous = map;
  }
  result.train_map = best_map;
  return result;
}

EnsembleWeights uni_enm(std::span<const ScoreMatrix> matrices) {
  check_consistent(matrices);
  EnsembleWeights result;
  result.models = model_names(matrices);
  result.alpha = VectorXd::Constant(static_cast<Index>(matrices.size()),
                                    1.0 / static_cast<double>(matrices.size()));
  result.converged = true;
  return result;
}

VectorXd normalize_weights(const VectorXd& alpha) {
  const double s = alpha.sum();
  if (!(s > 0.0)) throw DataError("cannot normalize weights with a non-positive sum");
  return alpha / s;
}

CrossValidationReport cross_validate(std::span<const ScoreMatrix> matrices,
                                     const corpus::Qrels& qrels, int folds, std::uint64_t seed,
                                     const EnmOptions& options) {
  check_consistent(matrices);
  if (folds < 2) throw DataError("cross-validation needs at least two folds");
  auto ids = judged_queries(matrices.front(), qrels);
  if (ids.size() < 2 * static_cast<std::size_t>(folds)) {
    throw DataError("cross-validation needs at least 2 judged queries per fold, have " +
                    std::to_string(ids.size()));
  }
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);

  std::vector<std::vector<int>> parts(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < ids.size(); ++i) parts[i % parts.size()].push_back(ids[i]);
  for (auto& p : parts) std::sort(p.begin(), p.end());

  CrossValidationReport report;
  report.models = model_names(matrices);
  const Index n_models = static_cast<Index>(matrices.size());
  report.mean_normalized_weights = VectorXd::Zero(n_models);
  const VectorXd uniform = uni_enm(matrices).alpha;

  for (std::size_t f = 0; f < parts.size(); ++f) {
    FoldReport fold;
    fold.test_queries = parts[f];
    for (std::size_t g = 0; g < parts.size(); ++g)
      if (g != f) fold.train_queries.insert(fold.train_queries.end(), parts[g].begin(), parts[g].end());
    std::sort(fold.train_queries.begin(), fold.train_queries.end());

    const auto train = restrict(matrices, fold.train_queries);
    const auto test = restrict(matrices, fold.test_queries);
    fold.weights = enm_train(train, qrels, options);
    fold.train_map = fold.weights.train_map;
    fold.test_map = ensemble_map(fold.weights.alpha, test, qrels, options.minmax_normalize);
    fold.uniform_train_map = ensemble_map(uniform, train, qrels, options.minmax_normalize);
    fold.uniform_test_map = ensemble_map(uniform, test, qrels, options.minmax_normalize);
    for (Index k = 0; k < n_models; ++k) {
      fold.constituent_train_map.push_back(eval::evaluate(train[static_cast<std::size_t>(k)], qrels).map);
      fold.constituent_test_map.push_back(eval::evaluate(test[static_cast<std::size_t>(k)], qrels).map);
    }
    if (fold.weights.alpha.sum() > 0.0)
      report.mean_normalized_weights += normalize_weights(fold.weights.alpha);
    report.mean_test_map += fold.test_map;
    report.mean_uniform_test_map += fold.uniform_test_map;
    report.folds.push_back(std::move(fold));
  }
  const double n = static_cast<double>(report.folds.size());
  report.mean_test_map /= n;
  report.mean_uniform_test_map /= n;
  report.mean_normalized_weights /= n;
  for (std::size_t f = 1; f < report.folds.size(); ++f)
    if (report.folds[f].test_map > report.folds[static_cast<std::size_t>(report.best_fold)].test_map)
      report.best_fold = static_cast<int>(f);
  return report;
}

}  // namespace ldikit::ensemble
