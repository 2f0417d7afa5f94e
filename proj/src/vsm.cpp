#include "ldikit/vsm.hpp"

#include <cmath>

#include "ldikit/error.hpp"

namespace ldikit::vsm {

TfIdfModel::TfIdfModel(Eigen::VectorXd idf, const corpus::TermDocCounts& counts)
    : idf_(std::move(idf)) {
  if (static_cast<std::size_t>(idf_.size()) != counts.num_terms()) {
    throw DataError("idf length does not match the vocabulary");
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(counts.nnz());
  for (std::size_t i = 0; i < counts.rows(); ++i) {
    double norm2 = 0.0;
    for (const auto& e : counts.row(i)) {
      const double w = e.count * idf_[e.term];
      norm2 += w * w;
    }
    if (norm2 == 0.0) continue;
    const double inv = 1.0 / std::sqrt(norm2);
    for (const auto& e : counts.row(i)) {
      const double w = e.count * idf_[e.term];
      if (w != 0.0) triplets.emplace_back(static_cast<int>(i), static_cast<int>(e.term), w * inv);
    }
  }
  docs_.resize(static_cast<Eigen::Index>(counts.rows()), idf_.size());
  docs_.setFromTriplets(triplets.begin(), triplets.end());
}

Eigen::VectorXd TfIdfModel::weigh(std::span<const corpus::TermCount> terms) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(idf_.size());
  for (const auto& e : terms) {
    if (e.term >= idf_.size()) throw DataError("term index out of range");
    v[e.term] += e.count * idf_[e.term];
  }
  const double n = v.norm();
  if (n > 0.0) v /= n;
  return v;
}

TfIdfModel train_tfidf(const corpus::TermDocCounts& counts) {
  const double m = static_cast<double>(counts.rows());
  const auto df = counts.document_frequencies();
  Eigen::VectorXd idf(static_cast<Eigen::Index>(df.size()));
  for (std::size_t j = 0; j < df.size(); ++j) {
    // Every vocabulary term occurs somewhere, so df >= 1; guard anyway for foreign counts.
    idf[static_cast<Eigen::Index>(j)] = df[j] > 0 ? std::log(m / df[j]) : 0.0;
  }
  return TfIdfModel(std::move(idf), counts);
}

ScoreVector score_tfidf(const TfIdfModel& model, std::span<const corpus::TermCount> query) {
  const Eigen::VectorXd q = model.weigh(query);
  ScoreVector scores = model.documents() * q;
  // Rounding can push an identical-vector cosine a hair past 1.
  return scores.cwiseMin(1.0).cwiseMax(0.0);
}

}  // namespace ldikit::vsm
