#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ldikit/corpus.hpp"
#include "ldikit/types.hpp"

namespace ldikit::plsa {

struct PlsaOptions {
  int max_iterations_per_block = 100;
  /// A block also ends when the tempered log-likelihood improves by less
  /// than this relative amount.
  double tolerance = 1e-5;
  double heldout_fraction = 0.1;
  double temper_factor = 0.9;
  int max_blocks = 30;
  /// EM passes on the full counts at the selected temperature.
  int refit_iterations = 20;
};

/// Asymmetric aspect model: P(w|z) is K x V, P(z|d) is M x K, rows on the simplex.
struct PlsaModel {
  Eigen::MatrixXd word_given_topic;
  Eigen::MatrixXd topic_given_doc;
  double beta_temp = 1.0;

  int num_topics() const noexcept { return static_cast<int>(word_given_topic.rows()); }
};

/// One fixed-temperature stretch of tempered EM.
struct TemperatureBlock {
  double beta_temp = 1.0;
  /// sum n_dw log sum_z P(z|d) P(w|z)^beta on the training tokens, starting
  /// with the value before the block's first iteration. EM never lowers it.
  std::vector<double> tempered_loglik;
  std::vector<double> heldout_perplexity;
};

struct PlsaTrainLog {
  double initial_perplexity = 0.0;
  std::vector<TemperatureBlock> blocks;
  double selected_perplexity = 0.0;
  double final_perplexity = 0.0;
};

/// Tempered EM. beta_temp starts at 1 and shrinks by temper_factor whenever
/// held-out perplexity stops improving; training ends once a reduction no
/// longer helps. The best held-out snapshot is refit on all tokens.
PlsaModel train_plsa(const corpus::TermDocCounts& counts, int k, const PlsaOptions& options,
                     std::uint64_t seed, PlsaTrainLog* log = nullptr);

/// Runs EM at a fixed temperature; returns the tempered log-likelihood after
/// each iteration (the first entry is the starting value).
std::vector<double> run_em(PlsaModel& model, const corpus::TermDocCounts& counts,
                           int iterations, double tolerance);

double tempered_log_likelihood(const PlsaModel& model, const corpus::TermDocCounts& counts);

/// exp(-sum n log sum_z P(z|d) P(w|z) / sum n).
double perplexity(const PlsaModel& model, const corpus::TermDocCounts& counts);

struct FoldResult {
  Eigen::VectorXd topics;
  bool zero_evidence = false;
  int iterations = 0;
};

/// EM over P(z|q) with P(w|z) frozen. All-OOV queries fold to uniform, flagged.
FoldResult fold_in_query(const PlsaModel& model, std::span<const corpus::TermCount> query,
                         int max_iterations = 50, double tolerance = 1e-6);

/// Cosine between P(z|q) and each P(z|d).
ScoreVector score_plsa(const PlsaModel& model, const Eigen::VectorXd& query_topics);

struct ValidationSet {
  const corpus::TermDocCounts* queries = nullptr;
  std::vector<int> query_ids;
  std::vector<int> doc_ids;
  const corpus::Qrels* qrels = nullptr;
};

double validation_map(const PlsaModel& model, const ValidationSet& validation);

struct TemperingStep {
  double beta_temp = 1.0;
  double validation_map = 0.0;
};

/// Keeps lowering beta_temp (with EM passes on the full counts) while
/// validation MAP strictly improves; returns the best model seen.
PlsaModel continue_tempering_by_precision(const PlsaModel& model,
                                          const corpus::TermDocCounts& counts,
                                          const ValidationSet& validation,
                                          const PlsaOptions& options,
                                          std::vector<TemperingStep>* trace = nullptr);

}  // namespace ldikit::plsa
