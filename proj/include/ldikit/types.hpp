#pragma once

#include <Eigen/Dense>

namespace ldikit {

/// One similarity score per document, in corpus document order.
using ScoreVector = Eigen::VectorXd;

/// Cosine of two vectors; 0 when either is the zero vector.
inline double cosine(const Eigen::Ref<const Eigen::VectorXd>& a,
                     const Eigen::Ref<const Eigen::VectorXd>& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

}  // namespace ldikit
