#include "ldikit/lda.hpp"

#include <cmath>
#include <random>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "ldikit/error.hpp"

namespace ldikit::lda {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using boost::math::digamma;
using boost::math::trigamma;

VectorXd digamma_of(const VectorXd& v) {
  VectorXd out(v.size());
  for (Index i = 0; i < v.size(); ++i) out[i] = digamma(v[i]);
  return out;
}

// Coordinate ascent on (phi, gamma) for one document, starting from the
// gamma passed in. Never lowers the document's ELBO.
int estep(const MatrixXd& log_beta, double alpha, std::span<const corpus::TermCount> doc,
          VectorXd& gamma, MatrixXd& phi, const LdaOptions& opt) {
  const Index k = log_beta.rows();
  const Index u = static_cast<Index>(doc.size());
  phi.resize(u, k);
  if (u == 0) {
    gamma.setConstant(k, alpha);
    return 0;
  }
  VectorXd logits(k);
  int it = 0;
  while (it < opt.estep_max_iterations) {
    ++it;
    const VectorXd dig = digamma_of(gamma);
    VectorXd next = VectorXd::Constant(k, alpha);
    for (Index i = 0; i < u; ++i) {
      const auto& e = doc[static_cast<std::size_t>(i)];
      logits = log_beta.col(e.term) + dig;
      const double top = logits.maxCoeff();
      logits = (logits.array() - top).exp();
      logits /= logits.sum();
      phi.row(i) = logits.transpose();
      next += static_cast<double>(e.count) * logits;
    }
    const double change = (next - gamma).lpNorm<1>() / gamma.lpNorm<1>();
    gamma = next;
    if (change < opt.estep_tolerance) break;
  }
  return it;
}

double alpha_objective_slope(double a, double k, double m, double ss) {
  return m * k * (digamma(k * a) - digamma(a)) + ss;
}

// Maximizes M (lnG(Ka) - K lnG(a)) + (a - 1) ss over [lo, hi]; the
// objective is concave in a.
double update_alpha(double current, int k, std::size_t m, double ss, const LdaOptions& opt) {
  const double kk = k;
  const double mm = static_cast<double>(m);
  const double lo = opt.alpha_min;
  const double hi = opt.alpha_max;
  if (alpha_objective_slope(lo, kk, mm, ss) <= 0.0) return lo;
  if (alpha_objective_slope(hi, kk, mm, ss) >= 0.0) return hi;
  auto fn = [&](double a) {
    return std::make_pair(alpha_objective_slope(a, kk, mm, ss),
                          mm * kk * (kk * trigamma(kk * a) - trigamma(a)));
  };
  std::uintmax_t max_iter = 100;
  const double guess = std::clamp(current, lo, hi);
  return boost::math::tools::newton_raphson_iterate(fn, guess, lo, hi, 50, max_iter);
}

}  // namespace

double document_elbo(const LdaModel& model, std::span<const corpus::TermCount> doc,
                     const Eigen::Ref<const VectorXd>& gamma, const Eigen::Ref<const MatrixXd>& phi) {
  const Index k = model.beta.rows();
  const double alpha = model.alpha;
  const double gamma_sum = gamma.sum();
  const double dig_sum = digamma(gamma_sum);
  VectorXd dig(k);
  for (Index j = 0; j < k; ++j) dig[j] = digamma(gamma[j]) - dig_sum;

  double value = std::lgamma(k * alpha) - k * std::lgamma(alpha) + (alpha - 1.0) * dig.sum();
  value += -std::lgamma(gamma_sum);
  for (Index j = 0; j < k; ++j) value += std::lgamma(gamma[j]) - (gamma[j] - 1.0) * dig[j];

  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& e = doc[i];
    double term = 0.0;
    for (Index j = 0; j < k; ++j) {
      const double p = phi(static_cast<Index>(i), j);
      if (p <= 0.0) continue;
      term += p * (dig[j] + std::log(model.beta(j, e.term)) - std::log(p));
    }
    value += e.count * term;
  }
  return value;
}

double elbo(const LdaModel& model, const corpus::TermDocCounts& counts,
            const VariationalState& state) {
  if (state.gamma.rows() != static_cast<Index>(counts.rows()) ||
      state.phi.size() != counts.rows() || state.gamma.cols() != model.beta.rows()) {
    throw DataError("variational state does not match the counts");
  }
  double total = 0.0;
  for (std::size_t d = 0; d < counts.rows(); ++d) {
    total += document_elbo(model, counts.row(d), state.gamma.row(static_cast<Index>(d)).transpose(),
                           state.phi[d]);
  }
  if (!std::isfinite(total)) throw NumericalError("ELBO is not finite");
  return total;
}

DocumentPosterior infer_document(const LdaModel& model, std::span<const corpus::TermCount> doc,
                                 const LdaOptions& options) {
  const MatrixXd log_beta = model.beta.array().log().matrix();
  DocumentPosterior post;
  double n = 0.0;
  for (const auto& e : doc) n += e.count;
  const Index k = model.beta.rows();
  post.gamma = VectorXd::Constant(k, model.alpha + n / static_cast<double>(k));
  post.iterations = estep(log_beta, model.alpha, doc, post.gamma, post.phi, options);
  return post;
}

LdaTrainResult train_lda(const corpus::TermDocCounts& counts, int k, const LdaOptions& options,
                         std::uint64_t seed) {
  if (k < 1) throw DataError("LDA needs at least one topic");
  const std::size_t v = counts.num_terms();
  if (static_cast<std::size_t>(k) > v) {
    throw DataError("LDA topic count " + std::to_string(k) + " exceeds vocabulary size " +
                    std::to_string(v));
  }
  if (counts.total() == 0) throw DataError("LDA on an all-zero count matrix");

  LdaTrainResult result;
  LdaModel& model = result.model;
  model.alpha = options.alpha_init > 0.0 ? options.alpha_init : 50.0 / k;
  model.alpha = std::clamp(model.alpha, options.alpha_min, options.alpha_max);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  model.beta.resize(k, static_cast<Index>(v));
  for (Index j = 0; j < k; ++j) {
    for (Index w = 0; w < static_cast<Index>(v); ++w) model.beta(j, w) = 1.0 / v + unif(rng);
    model.beta.row(j) /= model.beta.row(j).sum();
  }

  const std::size_t m = counts.rows();
  VariationalState& state = result.state;
  state.gamma.resize(static_cast<Index>(m), k);
  state.phi.assign(m, MatrixXd());
  for (std::size_t d = 0; d < m; ++d) {
    state.gamma.row(static_cast<Index>(d)).setConstant(
        model.alpha + static_cast<double>(counts.row_total(d)) / k);
  }

  VectorXd gamma(k);
  for (int iter = 0; iter < options.max_em_iterations; ++iter) {
    // E-step, warm-started from the previous gamma.
    const MatrixXd log_beta = model.beta.array().log().matrix();
    double bound = 0.0;
    for (std::size_t d = 0; d < m; ++d) {
      const auto row = counts.row(d);
      gamma = state.gamma.row(static_cast<Index>(d)).transpose();
      estep(log_beta, model.alpha, row, gamma, state.phi[d], options);
      state.gamma.row(static_cast<Index>(d)) = gamma.transpose();
      bound += document_elbo(model, row, gamma, state.phi[d]);
    }
    if (!std::isfinite(bound)) {
      throw NumericalError("ELBO became non-finite at EM iteration " + std::to_string(iter + 1));
    }
    result.elbo_trace.push_back(bound);
    result.alpha_trace.push_back(model.alpha);
    result.iterations = iter + 1;
    if (result.elbo_trace.size() >= 2) {
      const double prev = result.elbo_trace[result.elbo_trace.size() - 2];
      if (std::abs(bound - prev) / std::abs(prev) < options.em_tolerance) {
        result.converged = true;
        break;
      }
    }
    if (iter + 1 == options.max_em_iterations) break;

    // M-step. Accumulated in document order so the result is reproducible.
    MatrixXd expected = MatrixXd::Constant(k, static_cast<Index>(v), options.eta);
    double suff = 0.0;
    for (std::size_t d = 0; d < m; ++d) {
      const auto row = counts.row(d);
      for (std::size_t i = 0; i < row.size(); ++i) {
        expected.col(row[i].term) += row[i].count * state.phi[d].row(static_cast<Index>(i)).transpose();
      }
      const auto g = state.gamma.row(static_cast<Index>(d));
      const double dig_sum = digamma(g.sum());
      for (Index j = 0; j < k; ++j) suff += digamma(g[j]) - dig_sum;
    }
    for (Index j = 0; j < k; ++j) expected.row(j) /= expected.row(j).sum();
    model.beta = std::move(expected);
    if (options.estimate_alpha && k > 1) {
      model.alpha = update_alpha(model.alpha, k, m, suff, options);
    }
  }
  return result;
}

}  // namespace ldikit::lda
