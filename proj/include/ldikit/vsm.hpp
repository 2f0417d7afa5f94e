#pragma once

#include <span>

#include <Eigen/Sparse>

#include "ldikit/corpus.hpp"
#include "ldikit/types.hpp"

namespace ldikit::vsm {

/// tf-idf vector space model: w_ij = n_ij * ln(M / df_j), documents L2-normalized.
class TfIdfModel {
 public:
  using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  TfIdfModel() = default;
  TfIdfModel(Eigen::VectorXd idf, const corpus::TermDocCounts& counts);

  const Eigen::VectorXd& idf() const noexcept { return idf_; }
  /// M x V, one unit (or zero) row per document.
  const RowMatrix& documents() const noexcept { return docs_; }
  std::size_t num_documents() const noexcept { return static_cast<std::size_t>(docs_.rows()); }
  std::size_t num_terms() const noexcept { return static_cast<std::size_t>(idf_.size()); }

  /// Weighted, L2-normalized dense vector for a bag of terms (zero if nothing weighs).
  Eigen::VectorXd weigh(std::span<const corpus::TermCount> terms) const;

 private:
  Eigen::VectorXd idf_;
  RowMatrix docs_;
};

TfIdfModel train_tfidf(const corpus::TermDocCounts& counts);

/// Cosine of the query against every document, in [0, 1].
ScoreVector score_tfidf(const TfIdfModel& model, std::span<const corpus::TermCount> query);

}  // namespace ldikit::vsm
