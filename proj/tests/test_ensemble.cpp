#include <cmath>
#include <random>

#include "doctest.h"
#include "ldikit/ensemble.hpp"
#include "ldikit/error.hpp"
#include "ldikit/eval.hpp"

using namespace ldikit;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

ScoreMatrix matrix(const std::string& name, int queries, int docs, std::initializer_list<double> values) {
  ScoreMatrix m;
  m.model = name;
  for (int q = 1; q <= queries; ++q) m.query_ids.push_back(q);
  for (int d = 1; d <= docs; ++d) m.doc_ids.push_back(d);
  m.scores.resize(queries, docs);
  auto it = values.begin();
  for (int q = 0; q < queries; ++q)
    for (int d = 0; d < docs; ++d) m.scores(q, d) = *it++;
  return m;
}

// Model a ranks query 2 badly; model b ranks only query 2 well.
std::vector<ScoreMatrix> complementary() {
  return {matrix("a", 3, 4, {0.9, 0.1, 0.2, 0.3,
                             0.5, 0.4, 0.1, 0.2,
                             0.1, 0.2, 0.3, 0.9}),
          matrix("b", 3, 4, {0.1, 0.2, 0.3, 0.4,
                             0.1, 0.2, 0.8, 0.9,
                             0.4, 0.3, 0.2, 0.1})};
}

const corpus::Qrels kComplementaryQrels = {{1, {1}}, {2, {3, 4}}, {3, {4}}};

}  // namespace

TEST_CASE("step size") {
  CHECK(ensemble::step_size(vec({0.5, 0.5}), vec({0.0, 0.0})) == doctest::Approx(0.0));
  CHECK(ensemble::step_size(vec({0.5, 0.5}), vec({0.5, 0.5})) == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-14));
  CHECK(ensemble::step_size(vec({0.5, 0.5}), vec({0.5, 0.5})) == doctest::Approx(0.549306144334).epsilon(1e-11));
  const double eta = 1e-6;
  const double top = ensemble::step_size(vec({0.5, 0.5}), vec({1.0, 1.0}), eta);
  CHECK(std::isfinite(top));
  CHECK(top == doctest::Approx(0.5 * std::log((2.0 - eta) / eta)));
}

TEST_CASE("query weights") {
  const auto d = ensemble::update_query_weights(vec({0.0, 1.0}));
  CHECK(d[0] == doctest::Approx(0.731058578630).epsilon(1e-11));
  CHECK(d[1] == doctest::Approx(0.268941421370).epsilon(1e-11));
  const auto u = ensemble::update_query_weights(vec({0.4, 0.4, 0.4}));
  for (double x : u) CHECK(x == doctest::Approx(1.0 / 3.0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    VectorXd ap(7);
    for (auto& x : ap) x = unif(rng);
    const auto w = ensemble::update_query_weights(ap);
    CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK((w.array() > 0.0).all());
  }
}

TEST_CASE("model selection") {
  Eigen::MatrixXd ap(2, 2);
  ap << 0.9, 0.9,
        0.5, 0.5;
  const std::vector<int> both = {0, 1};
  CHECK(ensemble::select_model(vec({0.5, 0.5}), ap, both) == 0);
  ap << 0.1, 1.0,
        0.5, 0.5;
  // 0.99 * 0.5 + 0.01 * 0.5 = 0.5 beats 0.99 * 0.1 + 0.01 * 1.0 = 0.109.
  CHECK(ensemble::select_model(vec({0.99, 0.01}), ap, both) == 1);
  const std::vector<int> only_first = {0};
  CHECK(ensemble::select_model(vec({0.99, 0.01}), ap, only_first) == 0);
  ap << 0.5, 0.5,
        0.5, 0.5;
  CHECK(ensemble::select_model(vec({0.5, 0.5}), ap, both) == 0);
  CHECK_THROWS_AS(ensemble::select_model(vec({0.5, 0.5}), ap, std::vector<int>{}), DataError);
}

TEST_CASE("loss and its exponential bound") {
  CHECK(ensemble::loss(vec({1, 1, 1})) == doctest::Approx(0.0));
  CHECK(ensemble::exp_loss_bound(vec({1, 1, 1})) == doctest::Approx(3.0 * std::exp(-1.0)));
  CHECK(ensemble::loss(vec({0, 0})) == doctest::Approx(2.0));
  CHECK(ensemble::exp_loss_bound(vec({0, 0})) == doctest::Approx(2.0));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    VectorXd ap(5);
    for (auto& x : ap) x = unif(rng);
    CHECK(ensemble::loss(ap) <= ensemble::exp_loss_bound(ap));
  }
}

TEST_CASE("the step is the stationary point of the convex surrogate") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 9;
    VectorXd ap(n);
    VectorXd raw(n);
    for (auto& x : ap) x = unif(rng);
    for (auto& x : raw) x = unif(rng) + 1e-3;
    const VectorXd d = raw / raw.sum();
    const double delta = ensemble::step_size(d, ap);
    CHECK(std::abs(ensemble::surrogate_slope(d, ap, delta)) < 1e-10);
    CHECK(ensemble::surrogate_curvature(d, ap, delta) > 0.0);
    CHECK(ensemble::surrogate(d, ap, delta) <= ensemble::surrogate(d, ap, delta + 1e-3));
    CHECK(ensemble::surrogate(d, ap, delta) <= ensemble::surrogate(d, ap, delta - 1e-3));
  }
}

TEST_CASE("ensemble score") {
  const auto ms = complementary();
  SUBCASE("sums weighted rows") {
    const auto h = ensemble::ensemble_score(vec({1.0, 1.0}), ms);
    CHECK_FALSE(h.degenerate);
    CHECK(h.matrix.scores(0, 0) == doctest::Approx(1.0));
    CHECK(h.matrix.scores(1, 3) == doctest::Approx(1.1));
    // Query 3 under a + b: 0.5, 0.5, 0.5, 1.0 -> doc 4, then ties in id order.
    const auto r = eval::rank(h.matrix.scores.row(2).transpose(), h.matrix.doc_ids);
    CHECK(r.doc_ids == std::vector<int>{4, 1, 2, 3});
  }
  SUBCASE("positive scaling of one model keeps its ranking") {
    const std::vector<ScoreMatrix> one = {ms[0]};
    const auto h = ensemble::ensemble_score(vec({3.5}), one);
    CHECK(eval::evaluate(h.matrix, kComplementaryQrels).map ==
          doctest::Approx(eval::evaluate(ms[0], kComplementaryQrels).map));
  }
  SUBCASE("all-zero weights are flagged") {
    const auto h = ensemble::ensemble_score(vec({0.0, 0.0}), ms);
    CHECK(h.degenerate);
    CHECK(h.matrix.scores.isZero());
  }
  SUBCASE("shape mismatch") {
    auto bad = ms;
    bad[1].doc_ids[0] = 99;
    CHECK_THROWS_AS(ensemble::ensemble_score(vec({1.0, 1.0}), bad), DataError);
    CHECK_THROWS_AS(ensemble::ensemble_score(vec({1.0}), ms), DataError);
  }
}

TEST_CASE("boosting on complementary rankers") {
  const auto ms = complementary();
  const auto w = ensemble::enm_train(ms, kComplementaryQrels);
  REQUIRE(w.trace.size() >= 2);
  CHECK(w.trace[0].chosen == 0);
  CHECK(w.trace[1].chosen == 1);
  // Query 2 failed under model a, so its weight rises for round 2.
  CHECK(w.trace[1].query_weights[1] > w.trace[0].query_weights[1]);
  CHECK(w.train_map == doctest::Approx(1.0));
  CHECK((w.alpha.array() > 0.0).all());
  for (const auto& r : w.trace) {
    CHECK(r.query_weights.sum() == doctest::Approx(1.0));
    CHECK(r.loss <= r.bound);
  }
  const auto again = ensemble::enm_train(ms, kComplementaryQrels);
  CHECK(again.alpha == w.alpha);
  CHECK(again.trace.size() == w.trace.size());
}

TEST_CASE("boosting never ends below the best constituent") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    std::vector<ScoreMatrix> ms;
    for (int k = 0; k < 3; ++k) {
      ScoreMatrix m{"m" + std::to_string(k), {}, {}, Eigen::MatrixXd(6, 15)};
      for (int q = 1; q <= 6; ++q) m.query_ids.push_back(q);
      for (int d = 1; d <= 15; ++d) m.doc_ids.push_back(d);
      for (Eigen::Index i = 0; i < m.scores.size(); ++i) m.scores.data()[i] = unif(rng);
      ms.push_back(m);
    }
    corpus::Qrels qrels;
    for (int q = 1; q <= 6; ++q) qrels[q] = {1 + (q * 3) % 15, 1 + (q * 7) % 15};
    const auto w = ensemble::enm_train(ms, qrels);
    double best = 0.0;
    for (const auto& m : ms) best = std::max(best, eval::evaluate(m, qrels).map);
    CHECK(w.train_map >= best - 1e-12);
    CHECK(ensemble::ensemble_map(w.alpha, ms, qrels) == doctest::Approx(w.train_map));
    CHECK((w.alpha.array() >= 0.0).all());
    CHECK(w.alpha.sum() > 0.0);
  }
}

TEST_CASE("single and duplicated constituents") {
  const auto ms = complementary();
  const std::vector<ScoreMatrix> one = {ms[0]};
  const auto w = ensemble::enm_train(one, kComplementaryQrels);
  CHECK(w.best_round == 1);
  CHECK(w.alpha[0] == doctest::Approx(w.trace[0].delta));
  CHECK(w.train_map == doctest::Approx(eval::evaluate(ms[0], kComplementaryQrels).map));

  const std::vector<ScoreMatrix> twice = {ms[0], ms[0]};
  const auto d = ensemble::enm_train(twice, kComplementaryQrels);
  CHECK(d.train_map == doctest::Approx(w.train_map));
}

TEST_CASE("unjudged queries are left out of training") {
  auto ms = complementary();
  corpus::Qrels qrels = kComplementaryQrels;
  qrels.erase(3);
  const auto w = ensemble::enm_train(ms, qrels);
  for (const auto& r : w.trace) CHECK(r.query_weights.size() == 2);
}

TEST_CASE("uniform ensemble and weight normalization") {
  std::vector<ScoreMatrix> four(4, complementary()[0]);
  for (int k = 0; k < 4; ++k) four[static_cast<std::size_t>(k)].model = "m" + std::to_string(k);
  const auto u = ensemble::uni_enm(four);
  for (double a : u.alpha) CHECK(a == doctest::Approx(0.25));
  const auto n = ensemble::normalize_weights(vec({2.0, 2.0}));
  CHECK(n[0] == doctest::Approx(0.5));
  CHECK(n[1] == doctest::Approx(0.5));
  CHECK_THROWS_AS(ensemble::normalize_weights(vec({0.0, 0.0})), DataError);
}

TEST_CASE("printed-bound selection differs only in the rule") {
  Eigen::MatrixXd ap(2, 2);
  ap << 0.0, 1.0,
        0.5, 0.5;
  const std::vector<int> both = {0, 1};
  // sum D sqrt(1 - AP^2): model 0 gives 0.5, model 1 gives 0.866, so model 0 wins;
  // weighted AP ties at 0.5 and picks model 0 as well.
  CHECK(ensemble::select_model(vec({0.5, 0.5}), ap, both, ensemble::SelectionRule::PrintedBound) == 0);
  ap << 0.0, 0.9,
        0.5, 0.5;
  // Weighted AP prefers model 1 (0.5 > 0.45); the printed bound prefers the
  // spread-out model 0 (0.718 < 0.866).
  CHECK(ensemble::select_model(vec({0.5, 0.5}), ap, both) == 1);
  CHECK(ensemble::select_model(vec({0.5, 0.5}), ap, both, ensemble::SelectionRule::PrintedBound) == 0);
}

TEST_CASE("cross validation") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ScoreMatrix base{"a", {}, {}, Eigen::MatrixXd(10, 12)};
  for (int q = 1; q <= 10; ++q) base.query_ids.push_back(q);
  for (int d = 1; d <= 12; ++d) base.doc_ids.push_back(d);
  for (Eigen::Index i = 0; i < base.scores.size(); ++i) base.scores.data()[i] = unif(rng);
  corpus::Qrels qrels;
  for (int q = 1; q <= 10; ++q) qrels[q] = {1 + q % 12, 1 + (q * 5) % 12};
  ScoreMatrix copy = base;
  copy.model = "b";
  const std::vector<ScoreMatrix> ms = {base, copy};

  const auto r = ensemble::cross_validate(ms, qrels, 2, 99);
  REQUIRE(r.folds.size() == 2);
  std::set<int> seen;
  for (const auto& f : r.folds) {
    for (int q : f.test_queries) CHECK(seen.insert(q).second);
    CHECK(f.test_queries.size() == 5);
    CHECK(f.test_map == doctest::Approx(f.constituent_test_map[0]));
  }
  CHECK(seen.size() == 10);
  const auto again = ensemble::cross_validate(ms, qrels, 2, 99);
  CHECK(again.folds[0].test_queries == r.folds[0].test_queries);
  CHECK(again.mean_test_map == r.mean_test_map);
  CHECK(r.mean_normalized_weights.sum() == doctest::Approx(1.0));

  corpus::Qrels few = {{1, {2}}, {2, {3}}, {3, {4}}};
  CHECK_THROWS_AS(ensemble::cross_validate(ms, few, 2, 1), DataError);
}
