#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ldikit/corpus.hpp"
#include "ldikit/score_matrix.hpp"

namespace ldikit::ensemble {

/// One positive weight per training query, summing to 1.
using QueryWeights = Eigen::VectorXd;

/// Rows of per_model_ap: one per constituent model; columns: one per query.
using ApTable = Eigen::MatrixXd;

enum class SelectionRule {
  WeightedAp,    ///< argmax_j sum_i D_i AP_ji
  PrintedBound,  ///< argmin_j sum_i D_i sqrt((1 + AP_ji)(1 - AP_ji))
};

struct RoundTrace {
  int round = 0;
  int chosen = 0;
  double delta = 0.0;
  double map = 0.0;
  Eigen::VectorXd alpha;
  /// Weights used to select this round's model.
  QueryWeights query_weights;
  double loss = 0.0;
  double bound = 0.0;
};

struct EnsembleWeights {
  std::vector<std::string> models;
  Eigen::VectorXd alpha;
  std::vector<RoundTrace> trace;
  bool converged = false;
  /// Training MAP of the returned alpha.
  double train_map = 0.0;
  int best_round = 0;
};

struct EnmOptions {
  double epsilon = 1e-4;
  int max_rounds = 200;
  double ap_clip = 1e-6;
  SelectionRule rule = SelectionRule::WeightedAp;
  /// Rescale each constituent's query row to [0, 1] before combining.
  bool minmax_normalize = false;
};

struct EnsembleScore {
  ScoreMatrix matrix;
  /// Set when every weight is zero; the ranking then falls back to id order.
  bool degenerate = false;
};

/// Throws DataError unless all matrices share query and document ids.
void check_consistent(std::span<const ScoreMatrix> matrices);

ScoreMatrix minmax_rows(const ScoreMatrix& matrix);

EnsembleScore ensemble_score(const Eigen::VectorXd& alpha, std::span<const ScoreMatrix> matrices,
                             bool minmax_normalize = false);

/// Ties go to the lowest model index. Candidates must be non-empty.
int select_model(const QueryWeights& weights, const ApTable& per_model_ap,
                 std::span<const int> candidates, SelectionRule rule = SelectionRule::WeightedAp,
                 double ap_clip = 1e-6);

/// 0.5 ln[sum D (1 + AP) / sum D (1 - AP)], AP clipped to [clip, 1 - clip].
double step_size(const QueryWeights& weights, const Eigen::VectorXd& ap, double ap_clip = 1e-6);

/// D_i = exp(-AP_i) / Z.
QueryWeights update_query_weights(const Eigen::VectorXd& ensemble_ap);

/// sum (1 - AP_i)
double loss(const Eigen::VectorXd& ensemble_ap);
/// sum exp(-AP_i)
double exp_loss_bound(const Eigen::VectorXd& ensemble_ap);

/// The convex surrogate sum_i D_i {(1 + AP_i)/2 e^-d + (1 - AP_i)/2 e^d}
/// and its first two derivatives in d.
double surrogate(const QueryWeights& weights, const Eigen::VectorXd& ap, double delta);
double surrogate_slope(const QueryWeights& weights, const Eigen::VectorXd& ap, double delta);
double surrogate_curvature(const QueryWeights& weights, const Eigen::VectorXd& ap, double delta);

/// AP of every constituent on every query (rows in matrix order). Every
/// query must be judged. Row rescaling never changes these, so there is no
/// normalization switch.
ApTable constituent_ap(std::span<const ScoreMatrix> matrices, const corpus::Qrels& qrels);

/// Boosting trainer. Queries without judgments are dropped first.
EnsembleWeights enm_train(std::span<const ScoreMatrix> matrices, const corpus::Qrels& qrels,
                          const EnmOptions& options = {});

EnsembleWeights uni_enm(std::span<const ScoreMatrix> matrices);

/// alpha / sum(alpha). Throws DataError when the sum is not positive.
Eigen::VectorXd normalize_weights(const Eigen::VectorXd& alpha);

/// MAP of the ensemble over the judged queries of the matrices.
double ensemble_map(const Eigen::VectorXd& alpha, std::span<const ScoreMatrix> matrices,
                    const corpus::Qrels& qrels, bool minmax_normalize = false);

struct FoldReport {
  std::vector<int> train_queries;
  std::vector<int> test_queries;
  EnsembleWeights weights;
  double train_map = 0.0;
  double test_map = 0.0;
  double uniform_train_map = 0.0;
  double uniform_test_map = 0.0;
  std::vector<double> constituent_train_map;
  std::vector<double> constituent_test_map;
};

struct CrossValidationReport {
  std::vector<std::string> models;
  std::vector<FoldReport> folds;
  double mean_test_map = 0.0;
  double mean_uniform_test_map = 0.0;
  Eigen::VectorXd mean_normalized_weights;
  int best_fold = 0;
};

/// Judged queries are shuffled with the seed and split into `folds` nearly
/// equal parts; each part is the test set once.
CrossValidationReport cross_validate(std::span<const ScoreMatrix> matrices,
                                     const corpus::Qrels& qrels, int folds = 2,
                                     std::uint64_t seed = 42, const EnmOptions& options = {});

}  // namespace ldikit::ensemble
