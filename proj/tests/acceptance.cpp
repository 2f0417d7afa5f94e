// Acceptance checks. Each run evaluates one criterion and prints a single
// "criterion N: PASS|FAIL|SKIP <details>" line. Exit status: 0 pass, 1 fail,
// 77 skip (required SMART data not found under LDIKIT_SMART_DIR).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "ldikit/bundle.hpp"
#include "ldikit/ensemble.hpp"
#include "ldikit/error.hpp"
#include "ldikit/eval.hpp"
#include "ldikit/experiment.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace ldikit;
using experiment::Method;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kSkip = 77;

struct Outcome {
  int status = kFail;
  std::string detail;
};

Outcome pass(std::string d) { return {kPass, std::move(d)}; }
Outcome fail(std::string d) { return {kFail, std::move(d)}; }
Outcome skip(std::string d) { return {kSkip, std::move(d)}; }
Outcome verdict(bool ok, std::string d) { return {ok ? kPass : kFail, std::move(d)}; }

std::string num(double v, int precision = 4) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(precision) << v;
  return o.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::optional<std::filesystem::path> smart_dir() {
  const char* env = std::getenv("LDIKIT_SMART_DIR");
  if (!env || !*env) return std::nullopt;
  return std::filesystem::path(env);
}

std::optional<corpus::Collection> load_smart(const std::string& name) {
  const auto dir = smart_dir();
  if (!dir) return std::nullopt;
  const auto spec = experiment::find_smart_collection(*dir, name);
  if (!spec) return std::nullopt;
  return experiment::load_collection(*spec).collection;
}

const std::vector<std::string> kCollections = {"MED", "CRAN", "CISI", "CACM"};

std::string missing_data(const std::string& what) {
  return what + " not found (set LDIKIT_SMART_DIR to the directory holding the SMART files)";
}

double map_of(const experiment::TrainedModel& model, const corpus::Corpus& corpus) {
  return eval::evaluate(experiment::score_queries(model, corpus), corpus.qrels).map;
}

// 1. tf-idf baseline on MED.
Outcome criterion1() {
  const auto med = load_smart("MED");
  if (!med) return skip(missing_data("MED"));
  const auto t0 = std::chrono::steady_clock::now();
  const auto corpus = corpus::build_corpus(*med);
  const double map = map_of(experiment::train_model(Method::Tfidf, corpus, 0, 42), corpus);
  const double secs = seconds_since(t0);
  return verdict(std::abs(map - 0.4605) <= 0.05 && secs < 60.0,
                 "MED tf-idf MAP " + num(map) + " (target 0.4605 +- 0.05), " + num(secs, 1) + " s");
}

// 2. LDI on MED at K = 100 over three seeds.
Outcome criterion2() {
  const auto med = load_smart("MED");
  if (!med) return skip(missing_data("MED"));
  const auto corpus = corpus::build_corpus(*med);
  const double tfidf = map_of(experiment::train_model(Method::Tfidf, corpus, 0, 42), corpus);
  double sum = 0.0;
  bool beats = true;
  std::string per_seed;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto t0 = std::chrono::steady_clock::now();
    const double map = map_of(experiment::train_model(Method::Lda, corpus, 100, seed), corpus);
    sum += map;
    beats = beats && map > tfidf;
    per_seed += " seed " + std::to_string(seed) + "=" + num(map) + " (" + num(seconds_since(t0), 0) + " s)";
  }
  const double mean = sum / 3.0;
  return verdict(mean >= 0.50 && beats, "LDI K=100 mean MAP " + num(mean) + ", tf-idf " + num(tfidf) +
                                            ";" + per_seed);
}

// 3. MAP versus K peaks at an interior K.
Outcome criterion3() {
  const auto med = load_smart("MED");
  if (!med) return skip(missing_data("MED"));
  const auto corpus = corpus::build_corpus(*med);
  const std::vector<int> ks = {50, 75, 100, 125};
  const auto rows = experiment::sweep(corpus, Method::Lda, ks, {1, 2, 3});
  int interior = 0;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    int best_k = 0;
    double best = -1.0;
    for (const auto& r : rows) {
      if (r.seed == seed && r.map > best) {
        best = r.map;
        best_k = r.k;
      }
    }
    if (best_k != 50) ++interior;
    detail += " seed " + std::to_string(seed) + " peaks at K=" + std::to_string(best_k);
  }
  return verdict(interior >= 2, std::to_string(interior) + "/3 seeds peak above K=50;" + detail);
}

// 4. The ten-document toy example at K = 4.
Outcome criterion4() {
  using testing::ToyDoc;
  const auto corpus = testing::toy_corpus();
  int good = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = experiment::score_queries(experiment::train_model(Method::Lda, corpus, 4, seed), corpus);
    auto col = [&](int doc) {
      return static_cast<Eigen::Index>(std::find(s.doc_ids.begin(), s.doc_ids.end(), doc) - s.doc_ids.begin());
    };
    auto row = [&](int q) {
      return static_cast<Eigen::Index>(std::find(s.query_ids.begin(), s.query_ids.end(), q) - s.query_ids.begin());
    };
    auto score = [&](int q, int doc) { return s.scores(row(q), col(doc)); };
    const std::vector<int> tech = {ToyDoc::T1, ToyDoc::T2, ToyDoc::T3};
    const std::vector<int> others = {ToyDoc::B1, ToyDoc::B2, ToyDoc::D1, ToyDoc::D2,
                                     ToyDoc::D3, ToyDoc::G1, ToyDoc::G2};
    auto min_of = [&](int q, const std::vector<int>& docs) {
      double m = INFINITY;
      for (int d : docs) m = std::min(m, score(q, d));
      return m;
    };
    auto max_of = [&](int q, const std::vector<int>& docs) {
      double m = -INFINITY;
      for (int d : docs) m = std::max(m, score(q, d));
      return m;
    };
    const bool tech_first = min_of(1, tech) > max_of(1, others) && min_of(3, tech) > max_of(3, others);
    const auto ranked2 = eval::rank(s.scores.row(row(2)).transpose(), s.doc_ids, 2);
    const std::set<int> top2(ranked2.doc_ids.begin(), ranked2.doc_ids.begin() + 2);
    const bool business_top = top2 == std::set<int>{ToyDoc::B1, ToyDoc::B2};
    bool garden_last = true;
    for (int q : {1, 2, 3}) {
      const std::vector<int> rest = {ToyDoc::T1, ToyDoc::T2, ToyDoc::T3, ToyDoc::B1,
                                     ToyDoc::B2, ToyDoc::D1, ToyDoc::D2, ToyDoc::D3};
      garden_last = garden_last && max_of(q, {ToyDoc::G1, ToyDoc::G2}) < min_of(q, rest);
    }
    const bool polysemy = score(3, ToyDoc::T3) > score(3, ToyDoc::D1);
    const bool ok = tech_first && business_top && garden_last && polysemy;
    if (ok) ++good;
    detail += " seed " + std::to_string(seed) + ":" + (ok ? "ok" : "miss") + "[" +
              (tech_first ? "T" : "-") + (business_top ? "B" : "-") + (garden_last ? "G" : "-") +
              (polysemy ? "P" : "-") + "]";
  }
  return verdict(good >= 3, std::to_string(good) + "/5 seeds satisfy all toy orderings;" + detail);
}

// 5. Boosting on the toy setup with tf-idf and LDI.
Outcome criterion5() {
  using testing::ToyDoc;
  auto corpus = testing::toy_corpus();
  corpus.qrels = {{1, {ToyDoc::T3}}, {2, {ToyDoc::B1, ToyDoc::B2}}, {3, {ToyDoc::T1, ToyDoc::T2}}};
  const std::vector<ScoreMatrix> matrices = {
      experiment::score_queries(experiment::train_model(Method::Tfidf, corpus, 0, 42), corpus),
      experiment::score_queries(experiment::train_model(Method::Lda, corpus, 4, 42), corpus)};
  ensemble::EnmOptions options;
  const auto w = ensemble::enm_train(matrices, corpus.qrels, options);
  if (w.trace.empty()) return fail("no boosting rounds recorded");

  int reached = 0;
  for (const auto& r : w.trace) {
    if (r.map >= 1.0 - 1e-12) {
      reached = r.round;
      break;
    }
  }
  const auto ap = ensemble::constituent_ap(matrices, corpus.qrels);
  const Eigen::VectorXd first = ap.row(w.trace.front().chosen);
  bool up = true;
  std::string failing;
  if (w.trace.size() < 2 || first.minCoeff() >= 1.0) {
    up = first.minCoeff() >= 1.0;
    failing = "none";
  } else {
    const auto& before = w.trace[0].query_weights;
    const auto& after = w.trace[1].query_weights;
    for (Eigen::Index i = 0; i < first.size(); ++i) {
      if (first(i) < 1.0) {
        up = up && after(i) > before(i);
        failing += (failing.empty() ? "" : ",") + std::to_string(i + 1) + ":" + num(before(i), 3) +
                   "->" + num(after(i), 3);
      }
    }
  }
  const bool positive = (w.alpha.array() > 0.0).all();
  std::ostringstream d;
  d << "MAP 1.0 at round " << reached << ", failing-query weights " << failing << ", alpha ("
    << num(w.alpha(0)) << ", " << num(w.alpha(1)) << ")";
  return verdict(reached >= 1 && reached <= 5 && up && positive, d.str());
}

// 6. Ensemble versus constituents on two-fold splits of each collection.
Outcome criterion6() {
  std::vector<corpus::Collection> collections;
  for (const auto& name : kCollections) {
    auto c = load_smart(name);
    if (!c) return skip(missing_data(name));
    collections.push_back(std::move(*c));
  }
  const experiment::ExperimentConfig config;
  bool dominance = true;
  int trend = 0;
  std::string detail;
  for (std::size_t i = 0; i < collections.size(); ++i) {
    const auto corpus = corpus::build_corpus(collections[i]);
    const auto matrices = experiment::score_all_methods(corpus, kCollections[i], config);
    const auto report = ensemble::cross_validate(matrices, corpus.qrels, 2, config.seed, config.enm);
    for (const auto& f : report.folds)
      for (double c : f.constituent_train_map) dominance = dominance && f.train_map >= c;
    if (report.mean_test_map >= report.mean_uniform_test_map - 0.01) ++trend;
    detail += " " + kCollections[i] + " EnM " + num(report.mean_test_map) + " vs UniEnM " +
              num(report.mean_uniform_test_map) + ";";
  }
  return verdict(dominance && trend >= 3,
                 std::string("training dominance ") + (dominance ? "holds" : "violated") + ", " +
                     std::to_string(trend) + "/4 collections within 0.01 of UniEnM or better;" + detail);
}

// 7. Average precision against a brute-force scorer.
Outcome criterion7() {
  std::mt19937_64 rng(2024);
  int mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    const int m = std::uniform_int_distribution<int>(1, 50)(rng);
    std::vector<int> ids(static_cast<std::size_t>(m));
    std::iota(ids.begin(), ids.end(), 1);
    Eigen::VectorXd scores(m);
    for (int j = 0; j < m; ++j) scores(j) = std::uniform_int_distribution<int>(0, 9)(rng);
    const int r = std::uniform_int_distribution<int>(1, std::min(10, m))(rng);
    std::vector<int> pool = ids;
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::set<int> relevant(pool.begin(), pool.begin() + r);
    const auto ranked = eval::rank(scores, ids);
    // Independent ordering: descending score, ascending id.
    std::vector<int> order = ids;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores(a - 1) > scores(b - 1); });
    if (ranked.doc_ids != order ||
        eval::average_precision(ranked, relevant) != oracle::brute_force_ap(order, relevant))
      ++mismatches;
  }
  return verdict(mismatches == 0, std::to_string(1000 - mismatches) + "/1000 random rankings match exactly");
}

// 8. Optimization invariants.
Outcome criterion8() {
  std::string detail;
  bool ok = true;

  corpus::Corpus corpus;
  std::string source;
  if (const auto med = load_smart("MED")) {
    corpus = corpus::build_corpus(*med);
    source = "MED";
  } else {
    testing::TempDir dir;
    corpus = corpus::build_corpus(
        experiment::load_collection(testing::write_synthetic_collection(dir.path(), "syn")).collection);
    source = "synthetic (MED not found)";
  }

  lda::LdaOptions lo;
  lo.em_tolerance = 0.0;
  lo.max_em_iterations = 30;
  const auto lda_run = lda::train_lda(corpus.docs, 20, lo, 42);
  double worst_lda = 0.0;
  for (std::size_t i = 1; i < lda_run.elbo_trace.size(); ++i)
    worst_lda = std::max(worst_lda, (lda_run.elbo_trace[i - 1] - lda_run.elbo_trace[i]) /
                                        std::abs(lda_run.elbo_trace[i - 1]));
  ok = ok && worst_lda <= 1e-8;
  detail += "LDA K=20 on " + source + ": " + std::to_string(lda_run.elbo_trace.size()) +
            " ELBO values, largest relative drop " + num(worst_lda, 12) + ";";

  plsa::PlsaTrainLog log;
  plsa::train_plsa(corpus.docs, 20, {}, 42, &log);
  double worst_plsa = 0.0;
  for (const auto& b : log.blocks)
    for (std::size_t i = 1; i < b.tempered_loglik.size(); ++i)
      worst_plsa = std::max(worst_plsa, (b.tempered_loglik[i - 1] - b.tempered_loglik[i]) /
                                            std::abs(b.tempered_loglik[i - 1]));
  ok = ok && worst_plsa <= 1e-12;
  detail += " pLSI " + std::to_string(log.blocks.size()) + " blocks, largest relative drop " +
            num(worst_plsa, 14) + ";";

  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  double worst_sv = 0.0, worst_orth = 0.0;
  for (int t = 0; t < 20; ++t) {
    Eigen::MatrixXd a(20, 10);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
    const Eigen::VectorXd oracle_s = oracle::jacobi_singular_values(a);
    for (int k : {3, 6, 10}) {
      const auto f = lsa::truncated_svd(a, k);
      worst_sv = std::max(worst_sv, (f.s - oracle_s.head(k)).cwiseAbs().maxCoeff());
      const Eigen::MatrixXd iu = Eigen::MatrixXd::Identity(k, k);
      worst_orth = std::max({worst_orth, (f.u.transpose() * f.u - iu).cwiseAbs().maxCoeff(),
                             (f.vt * f.vt.transpose() - iu).cwiseAbs().maxCoeff()});
    }
  }
  ok = ok && worst_sv <= 1e-8 && worst_orth <= 1e-8;
  detail += " SVD max singular value error " + num(worst_sv, 12) + ", orthonormality error " +
            num(worst_orth, 12);
  return verdict(ok, detail);
}

// 9. Boosting formula checks.
Outcome criterion9() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_slope = 0.0;
  bool convex = true;
  for (int t = 0; t < 100; ++t) {
    const int n = std::uniform_int_distribution<int>(2, 12)(rng);
    Eigen::VectorXd d(n), ap(n);
    for (int i = 0; i < n; ++i) {
      d(i) = u(rng) + 1e-3;
      ap(i) = u(rng);
    }
    d /= d.sum();
    const double delta = ensemble::step_size(d, ap);
    worst_slope = std::max(worst_slope, std::abs(ensemble::surrogate_slope(d, ap, delta)));
    for (double x : {-2.0, -0.5, 0.0, delta, 0.5, 2.0})
      convex = convex && ensemble::surrogate_curvature(d, ap, x) > 0.0;
  }

  // Full training runs on random score matrices: weights and loss bound per round.
  double worst_sum = 0.0;
  bool bounded = true;
  int rounds = 0;
  for (int t = 0; t < 20; ++t) {
    const int queries = 8, docs = 30, models = 3;
    std::vector<ScoreMatrix> ms;
    corpus::Qrels qrels;
    std::vector<int> qids, dids;
    for (int q = 1; q <= queries; ++q) qids.push_back(q);
    for (int dd = 1; dd <= docs; ++dd) dids.push_back(dd);
    for (int q = 1; q <= queries; ++q)
      for (int r = 0; r < 3; ++r) qrels[q].insert(std::uniform_int_distribution<int>(1, docs)(rng));
    for (int m = 0; m < models; ++m) {
      ScoreMatrix s{"m" + std::to_string(m), qids, dids, Eigen::MatrixXd(queries, docs)};
      for (Eigen::Index i = 0; i < s.scores.size(); ++i) s.scores.data()[i] = u(rng);
      ms.push_back(std::move(s));
    }
    const auto w = ensemble::enm_train(ms, qrels);
    for (const auto& r : w.trace) {
      ++rounds;
      worst_sum = std::max(worst_sum, std::abs(r.query_weights.sum() - 1.0));
      bounded = bounded && r.loss <= r.bound + 1e-12;
    }
  }
  return verdict(worst_slope <= 1e-10 && convex && worst_sum <= 1e-12 && bounded,
                 "max |J'(delta)| " + num(worst_slope, 14) + ", convexity " + (convex ? "holds" : "fails") +
                     ", max |sum D - 1| " + num(worst_sum, 14) + " over " + std::to_string(rounds) +
                     " rounds, loss bound " + (bounded ? "holds" : "fails"));
}

// 10. Merged collection pipeline at K = 50.
Outcome criterion10() {
  std::vector<corpus::Collection> collections;
  for (const auto& name : kCollections) {
    auto c = load_smart(name);
    if (!c) return skip(missing_data(name));
    collections.push_back(std::move(*c));
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto merged = corpus::merge_collections(collections).merged;
  const auto corpus = corpus::build_corpus(merged);
  experiment::ExperimentConfig config;
  for (Method m : {Method::Lsi, Method::Plsi, Method::Lda}) config.topics["MC"][m] = 50;
  const auto matrices = experiment::score_all_methods(corpus, "MC", config);
  const auto report = ensemble::cross_validate(matrices, corpus.qrels, 2, config.seed, config.enm);

  bundle::Json j;
  j["collection"] = "MC";
  j["documents"] = corpus.doc_ids.size();
  j["queries"] = corpus.query_ids.size();
  j["vocabulary"] = corpus.vocab.size();
  j["topics"] = 50;
  for (const auto& m : matrices) j["map"][m.model] = eval::evaluate(m, corpus.qrels).map;
  j["enm_test_map"] = report.mean_test_map;
  j["uniform_test_map"] = report.mean_uniform_test_map;
  j["seconds"] = seconds_since(t0);
  const auto out = experiment::output_dir("ldikit-out") / "acceptance" / "mc_report.json";
  std::filesystem::create_directories(out.parent_path());
  bundle::write_file(out, j.dump(2) + "\n");

  const auto back = bundle::Json::parse(bundle::read_file(out));
  bool ok = back.at("map").size() == 4;
  for (const auto& [name, v] : back.at("map").items()) ok = ok && v.get<double>() >= 0.0 && v.get<double>() <= 1.0;
  return verdict(ok, "report written to " + out.string() + " (" + num(back.at("seconds").get<double>(), 0) + " s)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ldikit acceptance checks"};
  int criterion = 0;
  app.add_option("--criterion", criterion, "Criterion number, 1-10")->required()->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::map<int, std::function<Outcome()>> checks = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}};

  Outcome o;
  try {
    o = checks.at(criterion)();
  } catch (const std::exception& e) {
    o = fail(std::string("error: ") + e.what());
  }
  const char* label = o.status == kPass ? "PASS" : o.status == kSkip ? "SKIP" : "FAIL";
  std::cout << "criterion " << criterion << ": " << label << " " << o.detail << std::endl;
  return o.status;
}
