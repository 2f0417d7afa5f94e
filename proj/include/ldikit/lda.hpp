#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ldikit/corpus.hpp"

namespace ldikit::lda {

struct LdaOptions {
  /// Symmetric Dirichlet parameter to start from; <= 0 means 50 / K.
  double alpha_init = 0.0;
  bool estimate_alpha = true;
  double alpha_min = 1e-3;
  double alpha_max = 10.0;
  int max_em_iterations = 100;
  /// Outer loop stops when the relative ELBO change falls below this.
  double em_tolerance = 1e-4;
  int estep_max_iterations = 100;
  /// Per-document E-step stops when the relative change of gamma falls below this.
  double estep_tolerance = 1e-6;
  /// Added to every expected count before the topic rows are normalized.
  double eta = 1e-9;
};

/// beta is K x V with beta(k, j) = p(w^j | z^k); rows sum to 1.
struct LdaModel {
  double alpha = 0.0;
  Eigen::MatrixXd beta;

  int num_topics() const noexcept { return static_cast<int>(beta.rows()); }
  std::size_t vocabulary_size() const noexcept { return static_cast<std::size_t>(beta.cols()); }
};

/// Variational parameters for a set of documents. phi[d] has one row per
/// distinct term of document d (in row order of the counts), K columns.
struct VariationalState {
  Eigen::MatrixXd gamma;
  std::vector<Eigen::MatrixXd> phi;
};

struct LdaTrainResult {
  LdaModel model;
  VariationalState state;
  /// ELBO after each E-step, one entry per outer iteration.
  std::vector<double> elbo_trace;
  std::vector<double> alpha_trace;
  int iterations = 0;
  bool converged = false;
};

LdaTrainResult train_lda(const corpus::TermDocCounts& counts, int k, const LdaOptions& options,
                         std::uint64_t seed);

struct DocumentPosterior {
  Eigen::VectorXd gamma;
  Eigen::MatrixXd phi;
  int iterations = 0;
};

/// E-step for one document with beta frozen; an empty document gets gamma = alpha.
DocumentPosterior infer_document(const LdaModel& model, std::span<const corpus::TermCount> doc,
                                 const LdaOptions& options = {});

/// Evidence lower bound of the counts under the model and variational state.
double elbo(const LdaModel& model, const corpus::TermDocCounts& counts,
           const VariationalState& state);

/// Per-document ELBO term.
double document_elbo(const LdaModel& model, std::span<const corpus::TermCount> doc,
                     const Eigen::Ref<const Eigen::VectorXd>& gamma,
                     const Eigen::Ref<const Eigen::MatrixXd>& phi);

}  // namespace ldikit::lda
