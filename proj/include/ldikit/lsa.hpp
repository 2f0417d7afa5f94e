#pragma once

#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ldikit/types.hpp"
#include "ldikit/vsm.hpp"

namespace ldikit::lsa {

struct SvdOptions {
  int oversampling = 10;
  int min_power_iterations = 4;
  /// Subspace iteration continues past the minimum until every retained
  /// triplet meets the residual tolerance or this cap is reached.
  int max_power_iterations = 100;
  /// Bound on ||A v_i - s_i u_i|| / s_1 for each retained triplet.
  double tolerance = 1e-8;
  std::uint64_t seed = 42;
};

struct SvdFactors {
  Eigen::MatrixXd u;   ///< rows(A) x k, orthonormal columns
  Eigen::VectorXd s;   ///< k singular values, descending
  Eigen::MatrixXd vt;  ///< k x cols(A), orthonormal rows
  int requested_rank = 0;
  /// Set when the matrix has numerical rank below the requested k; only the
  /// achievable factors are returned.
  bool rank_deficient = false;
  bool converged = false;
  double max_residual = 0.0;
  int power_iterations = 0;

  int rank() const noexcept { return static_cast<int>(s.size()); }
};

/// Top-k factors by randomized subspace iteration.
SvdFactors truncated_svd(const Eigen::SparseMatrix<double>& matrix, int k,
                         const SvdOptions& options = {});
SvdFactors truncated_svd(const Eigen::MatrixXd& matrix, int k, const SvdOptions& options = {});

/// q_hat = S^-1 U^T q.
Eigen::VectorXd lsi_fold_query(const SvdFactors& factors, const Eigen::VectorXd& query);

/// Cosine between S q_hat and each document's latent vector (column of S Vt).
ScoreVector score_lsi(const SvdFactors& factors, const Eigen::VectorXd& latent_query);

/// LSI over the normalized tf-idf document vectors of a vsm model.
class LsiModel {
 public:
  LsiModel() = default;
  LsiModel(vsm::TfIdfModel tfidf, SvdFactors factors);

  static LsiModel train(vsm::TfIdfModel tfidf, int k, const SvdOptions& options = {});

  const vsm::TfIdfModel& tfidf() const noexcept { return tfidf_; }
  const SvdFactors& factors() const noexcept { return factors_; }

  ScoreVector score(std::span<const corpus::TermCount> query) const;

 private:
  vsm::TfIdfModel tfidf_;
  SvdFactors factors_;
  Eigen::MatrixXd unit_docs_;  // columns of S Vt scaled to unit length
};

}  // namespace ldikit::lsa
