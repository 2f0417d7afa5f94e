#include "ldikit/plsa.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "ldikit/error.hpp"
#include "ldikit/eval.hpp"

namespace ldikit::plsa {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kTiny = 1e-300;

void normalize_rows(MatrixXd& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    const double s = m.row(r).sum();
    if (s > 0.0) m.row(r) /= s;
  }
}

MatrixXd tempered(const MatrixXd& word_given_topic, double beta) {
  if (beta == 1.0) return word_given_topic;
  return word_given_topic.array().pow(beta).matrix();
}

// One tempered EM iteration in place.
void em_step(PlsaModel& model, const corpus::TermDocCounts& counts) {
  const Index k = model.word_given_topic.rows();
  const MatrixXd pw = tempered(model.word_given_topic, model.beta_temp);
  MatrixXd word_acc = MatrixXd::Zero(k, model.word_given_topic.cols());
  VectorXd q(k);
  for (std::size_t d = 0; d < counts.rows(); ++d) {
    const auto row = counts.row(d);
    if (row.empty()) continue;
    const VectorXd pzd = model.topic_given_doc.row(static_cast<Index>(d)).transpose();
    VectorXd doc_acc = VectorXd::Zero(k);
    for (const auto& e : row) {
      q = pzd.cwiseProduct(pw.col(e.term));
      const double s = q.sum();
      if (s <= 0.0) continue;
      q *= e.count / s;
      doc_acc += q;
      word_acc.col(e.term) += q;
    }
    const double total = doc_acc.sum();
    if (total > 0.0) model.topic_given_doc.row(static_cast<Index>(d)) = doc_acc.transpose() / total;
  }
  normalize_rows(word_acc);
  // Topics that lost all mass keep their previous distribution.
  for (Index z = 0; z < k; ++z) {
    if (word_acc.row(z).sum() > 0.0) model.word_given_topic.row(z) = word_acc.row(z);
  }
}

double mixture_log_likelihood(const PlsaModel& model, const MatrixXd& pw,
                              const corpus::TermDocCounts& counts) {
  double ll = 0.0;
  for (std::size_t d = 0; d < counts.rows(); ++d) {
    const auto pzd = model.topic_given_doc.row(static_cast<Index>(d));
    for (const auto& e : counts.row(d)) {
      const double p = pzd.dot(pw.col(e.term).transpose());
      ll += e.count * std::log(std::max(p, kTiny));
    }
  }
  return ll;
}

struct Split {
  corpus::TermDocCounts train;
  corpus::TermDocCounts heldout;
};

// Holds out about `fraction` of the tokens while every term keeps at least
// one training occurrence.
Split split_tokens(const corpus::TermDocCounts& counts, double fraction, std::mt19937_64& rng) {
  std::vector<std::vector<std::uint32_t>> held(counts.rows());
  std::vector<std::uint64_t> train_cf(counts.num_terms(), 0);
  for (std::size_t d = 0; d < counts.rows(); ++d) {
    for (const auto& e : counts.row(d)) {
      std::binomial_distribution<std::uint32_t> draw(e.count, fraction);
      const auto h = fraction > 0.0 ? draw(rng) : 0u;
      held[d].push_back(h);
      train_cf[e.term] += e.count - h;
    }
  }
  for (std::size_t d = 0; d < counts.rows(); ++d) {
    const auto row = counts.row(d);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (train_cf[row[i].term] == 0 && held[d][i] > 0) {
        --held[d][i];
        ++train_cf[row[i].term];
      }
    }
  }
  Split s{corpus::TermDocCounts(counts.num_terms()), corpus::TermDocCounts(counts.num_terms())};
  for (std::size_t d = 0; d < counts.rows(); ++d) {
    const auto row = counts.row(d);
    std::vector<corpus::TermCount> tr;
    std::vector<corpus::TermCount> ho;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i].count > held[d][i]) tr.push_back({row[i].term, row[i].count - held[d][i]});
      if (held[d][i] > 0) ho.push_back({row[i].term, held[d][i]});
    }
    s.train.add_row(std::move(tr));
    s.heldout.add_row(std::move(ho));
  }
  return s;
}

}  // namespace

double tempered_log_likelihood(const PlsaModel& model, const corpus::TermDocCounts& counts) {
  return mixture_log_likelihood(model, tempered(model.word_given_topic, model.beta_temp), counts);
}

double perplexity(const PlsaModel& model, const corpus::TermDocCounts& counts) {
  const auto n = counts.total();
  if (n == 0) return 1.0;
  return std::exp(-mixture_log_likelihood(model, model.word_given_topic, counts) /
                  static_cast<double>(n));
}

std::vector<double> run_em(PlsaModel& model, const corpus::TermDocCounts& counts, int iterations,
                           double tolerance) {
  std::vector<double> trace{tempered_log_likelihood(model, counts)};
  for (int it = 0; it < iterations; ++it) {
    em_step(model, counts);
    const double now = tempered_log_likelihood(model, counts);
    if (!std::isfinite(now)) throw NumericalError("pLSA log-likelihood is not finite");
    const double prev = trace.back();
    trace.push_back(now);
    if (now - prev < tolerance * std::abs(prev)) break;
  }
  return trace;
}

PlsaModel train_plsa(const corpus::TermDocCounts& counts, int k, const PlsaOptions& options,
                     std::uint64_t seed, PlsaTrainLog* log) {
  if (k < 1) throw DataError("pLSA needs at least one topic");
  if (static_cast<std::size_t>(k) > counts.num_terms()) {
    throw DataError("pLSA topic count " + std::to_string(k) + " exceeds vocabulary size " +
                    std::to_string(counts.num_terms()));
  }
  if (counts.total() == 0) throw DataError("pLSA on an all-zero count matrix");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.01, 1.0);
  PlsaModel model;
  model.word_given_topic.resize(k, static_cast<Index>(counts.num_terms()));
  model.topic_given_doc.resize(static_cast<Index>(counts.rows()), k);
  for (Index z = 0; z < k; ++z)
    for (Index w = 0; w < model.word_given_topic.cols(); ++w) model.word_given_topic(z, w) = unif(rng);
  for (Index d = 0; d < model.topic_given_doc.rows(); ++d)
    for (Index z = 0; z < k; ++z) model.topic_given_doc(d, z) = unif(rng);
  normalize_rows(model.word_given_topic);
  normalize_rows(model.topic_given_doc);

  const Split split = split_tokens(counts, options.heldout_fraction, rng);

  PlsaTrainLog local_log;
  PlsaTrainLog& lg = log ? *log : local_log;
  lg = {};
  double best_perplexity = perplexity(model, split.heldout);
  lg.initial_perplexity = best_perplexity;
  PlsaModel best = model;
  PlsaModel current = model;

  for (int block = 0; block < options.max_blocks; ++block) {
    TemperatureBlock tb;
    tb.beta_temp = current.beta_temp;
    tb.tempered_loglik.push_back(tempered_log_likelihood(current, split.train));
    double block_best = std::numeric_limits<double>::infinity();
    PlsaModel block_model = current;
    for (int it = 0; it < options.max_iterations_per_block; ++it) {
      em_step(current, split.train);
      const double ll = tempered_log_likelihood(current, split.train);
      if (!std::isfinite(ll)) throw NumericalError("pLSA log-likelihood is not finite");
      const double prev = tb.tempered_loglik.back();
      tb.tempered_loglik.push_back(ll);
      const double perp = perplexity(current, split.heldout);
      tb.heldout_perplexity.push_back(perp);
      if (perp < block_best) {
        block_best = perp;
        block_model = current;
      } else {
        break;  // held-out perplexity stopped improving
      }
      if (ll - prev < options.tolerance * std::abs(prev)) break;
    }
    lg.blocks.push_back(std::move(tb));
    if (block_best < best_perplexity) {
      best_perplexity = block_best;
      best = block_model;
      current = block_model;
      current.beta_temp *= options.temper_factor;
    } else {
      break;
    }
  }
  lg.selected_perplexity = best_perplexity;

  if (options.refit_iterations > 0) {
    run_em(best, counts, options.refit_iterations, options.tolerance);
  }
  lg.final_perplexity = perplexity(best, split.heldout);
  return best;
}

FoldResult fold_in_query(const PlsaModel& model, std::span<const corpus::TermCount> query,
                         int max_iterations, double tolerance) {
  const Index k = model.word_given_topic.rows();
  FoldResult out;
  out.topics = VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  double n = 0.0;
  for (const auto& e : query) n += e.count;
  if (n == 0.0) {
    out.zero_evidence = true;
    return out;
  }
  const MatrixXd pw = tempered(model.word_given_topic, model.beta_temp);
  VectorXd q(k);
  for (int it = 0; it < max_iterations; ++it) {
    VectorXd acc = VectorXd::Zero(k);
    for (const auto& e : query) {
      q = out.topics.cwiseProduct(pw.col(e.term));
      const double s = q.sum();
      if (s > 0.0) acc += q * (e.count / s);
    }
    if (acc.sum() <= 0.0) break;
    acc /= acc.sum();
    const double change = (acc - out.topics).lpNorm<1>();
    out.topics = acc;
    out.iterations = it + 1;
    if (change < tolerance) break;
  }
  return out;
}

ScoreVector score_plsa(const PlsaModel& model, const Eigen::VectorXd& query_topics) {
  const Index m = model.topic_given_doc.rows();
  ScoreVector scores(m);
  for (Index d = 0; d < m; ++d) {
    scores[d] = cosine(model.topic_given_doc.row(d).transpose(), query_topics);
  }
  return scores;
}

double validation_map(const PlsaModel& model, const ValidationSet& validation) {
  if (!validation.queries || !validation.qrels) throw DataError("incomplete validation set");
  std::vector<double> aps;
  for (std::size_t i = 0; i < validation.query_ids.size(); ++i) {
    auto it = validation.qrels->find(validation.query_ids[i]);
    if (it == validation.qrels->end() || it->second.empty()) continue;
    const auto fold = fold_in_query(model, validation.queries->row(i));
    const ScoreVector scores =
        fold.zero_evidence ? ScoreVector::Zero(model.topic_given_doc.rows())
                           : score_plsa(model, fold.topics);
    const auto ranked = eval::rank(scores, validation.doc_ids, validation.query_ids[i]);
    aps.push_back(eval::average_precision(ranked, it->second));
  }
  if (aps.empty()) throw DataError("validation set has no judged queries");
  return eval::mean_average_precision(aps);
}

PlsaModel continue_tempering_by_precision(const PlsaModel& model,
                                          const corpus::TermDocCounts& counts,
                                          const ValidationSet& validation,
                                          const PlsaOptions& options,
                                          std::vector<TemperingStep>* trace) {
  PlsaModel best = model;
  double best_map = validation_map(model, validation);
  if (trace) trace->push_back({model.beta_temp, best_map});
  PlsaModel current = model;
  for (int step = 0; step < options.max_blocks; ++step) {
    current.beta_temp *= options.temper_factor;
    run_em(current, counts, options.max_iterations_per_block, options.tolerance);
    const double map = validation_map(current, validation);
    if (trace) trace->push_back({current.beta_temp, map});
    if (map > best_map) {
      best_map = map;
      best = current;
    } else {
      break;
    }
  }
  return best;
}

}  // namespace ldikit::plsa
