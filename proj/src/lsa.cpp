#include "ldikit/lsa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ldikit/error.hpp"

namespace ldikit::lsa {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd orthonormal_basis(const MatrixXd& y) {
  Eigen::HouseholderQR<MatrixXd> qr(y);
  return qr.householderQ() * MatrixXd::Identity(y.rows(), y.cols());
}

template <class Matrix>
SvdFactors randomized_svd(const Matrix& a, int k, const SvdOptions& opt) {
  const Index rows = a.rows();
  const Index cols = a.cols();
  const Index full = std::min(rows, cols);
  if (k < 1 || k > full) {
    throw DataError("requested rank " + std::to_string(k) + " outside [1, " +
                    std::to_string(full) + "]");
  }
  const Index width = std::min<Index>(k + std::max(opt.oversampling, 0), full);

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXd omega(cols, width);
  for (Index j = 0; j < width; ++j)
    for (Index i = 0; i < cols; ++i) omega(i, j) = gauss(rng);

  MatrixXd q = orthonormal_basis(a * omega);
  SvdFactors out;
  out.requested_rank = k;

  for (int iter = 0;; ++iter) {
    if (iter > 0) {
      const MatrixXd z = orthonormal_basis(a.transpose() * q);
      q = orthonormal_basis(a * z);
    }
    if (iter < opt.min_power_iterations && iter < opt.max_power_iterations) continue;

    const MatrixXd bt = a.transpose() * q;  // cols x width, = (Q^T A)^T
    Eigen::BDCSVD<MatrixXd> svd(bt, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd& sv = svd.singularValues();
    if (sv.size() == 0 || sv[0] <= 0.0) throw DataError("cannot factor a zero matrix");

    const double floor = sv[0] * static_cast<double>(std::max(rows, cols)) *
                         std::numeric_limits<double>::epsilon();
    Index rank = 0;
    while (rank < std::min<Index>(k, sv.size()) && sv[rank] > floor) ++rank;

    // B^T = W S X^T with B = Q^T A, so A ~ (Q X) S W^T.
    MatrixXd u = q * svd.matrixV().leftCols(rank);
    MatrixXd v = svd.matrixU().leftCols(rank);
    VectorXd s = sv.head(rank);

    const MatrixXd av = a * v;
    double worst = 0.0;
    for (Index i = 0; i < rank; ++i) {
      worst = std::max(worst, (av.col(i) - s[i] * u.col(i)).norm() / sv[0]);
    }
    out.power_iterations = iter;
    const bool done = worst <= opt.tolerance;
    if (done || iter >= opt.max_power_iterations) {
      out.u = std::move(u);
      out.s = std::move(s);
      out.vt = v.transpose();
      out.rank_deficient = rank < k;
      out.converged = done;
      out.max_residual = worst;
      return out;
    }
  }
}

}  // namespace

SvdFactors truncated_svd(const Eigen::SparseMatrix<double>& matrix, int k,
                         const SvdOptions& options) {
  return randomized_svd(matrix, k, options);
}

SvdFactors truncated_svd(const Eigen::MatrixXd& matrix, int k, const SvdOptions& options) {
  return randomized_svd(matrix, k, options);
}

Eigen::VectorXd lsi_fold_query(const SvdFactors& factors, const Eigen::VectorXd& query) {
  if (query.size() != factors.u.rows()) throw DataError("query length does not match U");
  return (factors.u.transpose() * query).cwiseQuotient(factors.s);
}

ScoreVector score_lsi(const SvdFactors& factors, const Eigen::VectorXd& latent_query) {
  if (latent_query.size() != factors.s.size()) throw DataError("latent query has wrong rank");
  const Eigen::VectorXd scaled_query = latent_query.cwiseProduct(factors.s);
  const Eigen::MatrixXd docs = factors.s.asDiagonal() * factors.vt;
  ScoreVector scores(docs.cols());
  for (Eigen::Index i = 0; i < docs.cols(); ++i) scores[i] = cosine(scaled_query, docs.col(i));
  return scores;
}

LsiModel::LsiModel(vsm::TfIdfModel tfidf, SvdFactors factors)
    : tfidf_(std::move(tfidf)), factors_(std::move(factors)) {
  if (factors_.u.rows() != static_cast<Eigen::Index>(tfidf_.num_terms()) ||
      factors_.vt.cols() != static_cast<Eigen::Index>(tfidf_.num_documents())) {
    throw DataError("SVD factors do not match the tf-idf model");
  }
  unit_docs_ = factors_.s.asDiagonal() * factors_.vt;
  for (Eigen::Index i = 0; i < unit_docs_.cols(); ++i) {
    const double n = unit_docs_.col(i).norm();
    if (n > 0.0) unit_docs_.col(i) /= n;
  }
}

LsiModel LsiModel::train(vsm::TfIdfModel tfidf, int k, const SvdOptions& options) {
  const Eigen::SparseMatrix<double> term_doc = tfidf.documents().transpose();
  auto factors = truncated_svd(term_doc, k, options);
  return LsiModel(std::move(tfidf), std::move(factors));
}

ScoreVector LsiModel::score(std::span<const corpus::TermCount> query) const {
  Eigen::VectorXd scaled = lsi_fold_query(factors_, tfidf_.weigh(query)).cwiseProduct(factors_.s);
  const double n = scaled.norm();
  if (n == 0.0) return ScoreVector::Zero(unit_docs_.cols());
  scaled /= n;
  return unit_docs_.transpose() * scaled;
}

}  // namespace ldikit::lsa
