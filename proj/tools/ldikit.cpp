#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ldikit/corpus.hpp"
#include "ldikit/corpus_io.hpp"
#include "ldikit/ensemble.hpp"
#include "ldikit/error.hpp"
#include "ldikit/eval.hpp"
#include "ldikit/experiment.hpp"
#include "ldikit/version.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;
using namespace ldikit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

// Relative output paths land under LDIKIT_OUTPUT_DIR when it is set.
fs::path out_path(const std::string& p) {
  const fs::path path(p);
  if (path.is_absolute()) return path;
  return experiment::output_dir(".") / path;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_text(const fs::path& p, const std::string& text) {
  ensure_parent(p);
  bundle::write_file(p, text);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(10) << v;
  return o.str();
}

const CLI::IsMember kMethodNames({"tfidf", "lsi", "plsi", "plsa", "lda", "ldi"}, CLI::ignore_case);

Json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Json weights_json(const ensemble::EnsembleWeights& w) {
  Json j = {{"models", w.models},
            {"alpha", vec_json(w.alpha)},
            {"converged", w.converged},
            {"train_map", w.train_map},
            {"best_round", w.best_round}};
  if (w.alpha.sum() > 0.0) j["normalized"] = vec_json(ensemble::normalize_weights(w.alpha));
  return j;
}

Json trace_json(const ensemble::EnsembleWeights& w) {
  Json rounds = Json::array();
  for (const auto& r : w.trace) {
    rounds.push_back({{"round", r.round},
                      {"chosen", w.models.at(static_cast<std::size_t>(r.chosen))},
                      {"delta", r.delta},
                      {"map", r.map},
                      {"alpha", vec_json(r.alpha)},
                      {"query_weights", vec_json(r.query_weights)},
                      {"loss", r.loss},
                      {"bound", r.bound}});
  }
  return rounds;
}

corpus::Qrels load_qrels(const std::string& qrels_file, const std::string& dialect,
                         const std::string& corpus_dir) {
  if (!qrels_file.empty()) {
    std::ifstream in(qrels_file);
    if (!in) throw DataError("cannot open '" + qrels_file + "'");
    return corpus::parse_qrels(in, corpus::qrels_dialect_from_string(dialect));
  }
  if (!corpus_dir.empty()) return corpus::read_corpus_bundle(corpus_dir).corpus.qrels;
  throw CLI::ValidationError("--qrels or --corpus", "one of them is required");
}

std::vector<ScoreMatrix> load_matrices(const std::vector<std::string>& files) {
  std::vector<ScoreMatrix> out;
  for (const auto& f : files) out.push_back(read_score_matrix(f));
  ensemble::check_consistent(out);
  return out;
}

// corpus build

struct CorpusArgs {
  std::string docs, queries, qrels, name = "CUSTOM", source, dialect = "auto", stoplist;
  std::string smart_dir, config;
  std::vector<std::string> collections;
  bool renumber = false;
  std::string out;
};

int cmd_corpus(const CorpusArgs& a) {
  std::vector<experiment::CollectionSpec> specs;
  if (!a.config.empty()) specs = experiment::ExperimentConfig::from_file(a.config).collections;
  if (!a.smart_dir.empty()) {
    if (a.collections.empty()) throw CLI::ValidationError("--collection", "needed with --smart-dir");
    for (const auto& c : a.collections) {
      auto spec = experiment::find_smart_collection(a.smart_dir, c);
      if (!spec) throw DataError("no " + c + " files under '" + a.smart_dir + "'");
      specs.push_back(*spec);
    }
  }
  if (!a.docs.empty()) {
    if (a.queries.empty() || a.qrels.empty())
      throw CLI::ValidationError("--docs", "needs --queries and --qrels");
    experiment::CollectionSpec s;
    s.name = a.name;
    s.source = corpus::source_from_string(a.source.empty() ? a.name : a.source);
    s.docs = a.docs;
    s.queries = a.queries;
    s.qrels = a.qrels;
    s.dialect = corpus::qrels_dialect_from_string(a.dialect);
    s.renumber_queries = a.renumber;
    specs.push_back(s);
  }
  if (specs.empty()) throw CLI::ValidationError("corpus build", "no input collection given");

  std::vector<corpus::Collection> loaded;
  Json info = Json::array();
  for (const auto& s : specs) {
    auto lc = experiment::load_collection(s);
    for (const auto& w : lc.warnings)
      std::cerr << "warning: " << s.name << " line " << w.line << ": " << w.message << "\n";
    info.push_back({{"name", s.name},
                    {"docs", s.docs.string()},
                    {"queries", s.queries.string()},
                    {"qrels", s.qrels.string()},
                    {"qrels_dialect", std::string(corpus::to_string(s.dialect))},
                    {"renumber_queries", s.renumber_queries},
                    {"documents", lc.collection.docs.size()},
                    {"query_count", lc.collection.queries.size()},
                    {"parse_warnings", lc.warnings.size()}});
    loaded.push_back(std::move(lc.collection));
  }
  corpus::Collection collection;
  if (loaded.size() == 1) {
    collection = std::move(loaded.front());
  } else {
    collection = corpus::merge_collections(loaded, a.name == "CUSTOM" ? "MC" : a.name).merged;
  }

  std::optional<corpus::StopList> custom;
  if (!a.stoplist.empty()) {
    std::ifstream in(a.stoplist);
    if (!in) throw DataError("cannot open '" + a.stoplist + "'");
    custom = corpus::StopList::from_stream(in);
  }
  const auto c = corpus::build_corpus(collection, custom ? *custom : corpus::StopList::smart());
  for (const auto& v : c.qrels_violations)
    std::cerr << "warning: judgment (" << v.query_id << ", " << v.doc_id << ") names an unknown "
              << (v.doc_id == 0 ? "query" : "document") << "\n";
  const fs::path dir = out_path(a.out);
  fs::create_directories(dir);
  const auto checksum = corpus::write_corpus_bundle(dir, c, {info});
  std::size_t judged = 0;
  for (const auto& [q, d] : c.qrels) judged += !d.empty() && c.query_ids.end() != std::find(c.query_ids.begin(), c.query_ids.end(), q);
  std::cout << c.name << ": " << c.doc_ids.size() << " documents, " << c.query_ids.size()
            << " queries (" << judged << " judged), " << c.vocab.size() << " terms, "
            << c.docs.total() << " tokens\n"
            << "checksum " << checksum << "\n"
            << "wrote " << dir.string() << "\n";
  return kExitOk;
}

// train

struct TrainArgs {
  std::string corpus, method, out, config;
  int k = 0;
  std::uint64_t seed = 42;
};

int cmd_train(const TrainArgs& a) {
  const auto cfg = a.config.empty() ? experiment::ExperimentConfig{}
                                    : experiment::ExperimentConfig::from_file(a.config);
  const auto method = experiment::method_from_string(a.method);
  const auto loaded = corpus::read_corpus_bundle(a.corpus);
  int k = a.k;
  if (method != experiment::Method::Tfidf && k == 0) k = cfg.topics_for(loaded.corpus.name, method);
  if (method != experiment::Method::Tfidf && k < 1) throw DataError("--k must be at least 1");
  const auto model = experiment::train_model(method, loaded.corpus, k, a.seed, cfg);
  const fs::path dir = out_path(a.out);
  bundle::write_model_bundle(dir, experiment::to_bundle(model));
  write_text(dir / "train_log.json", model.log.dump(2) + "\n");
  std::cout << "trained " << experiment::to_string(method);
  if (method != experiment::Method::Tfidf) std::cout << " K=" << k;
  std::cout << " seed=" << a.seed << " -> " << dir.string() << "\n";
  return kExitOk;
}

// score

struct ScoreArgs {
  std::string model, corpus, out;
  bool csv = false;
};

int cmd_score(const ScoreArgs& a) {
  const auto loaded = corpus::read_corpus_bundle(a.corpus);
  std::vector<std::string> warnings;
  const auto model =
      experiment::from_bundle(bundle::read_model_bundle(a.model), loaded.corpus, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  const auto matrix = experiment::score_queries(model, loaded.corpus);
  const fs::path path = out_path(a.out);
  ensure_parent(path);
  if (a.csv || path.extension() == ".csv") {
    write_score_matrix_csv(path, matrix);
  } else {
    write_score_matrix(path, matrix);
  }
  std::cout << matrix.model << ": " << matrix.scores.rows() << " x " << matrix.scores.cols()
            << " -> " << path.string() << "\n";
  return kExitOk;
}

// eval

struct EvalArgs {
  std::string scores, qrels, dialect = "auto", corpus, out;
};

int cmd_eval(const EvalArgs& a) {
  const auto matrix = read_score_matrix(a.scores);
  const auto qrels = load_qrels(a.qrels, a.dialect, a.corpus);
  const auto report = eval::evaluate(matrix, qrels);
  const fs::path dir = out_path(a.out);
  fs::create_directories(dir);
  std::ostringstream ap;
  ap << "qid,ap\n" << std::setprecision(17);
  for (std::size_t i = 0; i < report.ap.size(); ++i) ap << report.query_ids[i] << ',' << report.ap[i] << '\n';
  std::ostringstream pr;
  pr << "recall,precision\n" << std::setprecision(17);
  for (std::size_t i = 0; i < report.curve.precision.size(); ++i)
    pr << eval::PrCurve::recall_at(i) << ',' << report.curve.precision[i] << '\n';
  const Json summary = {{"model", matrix.model},
                        {"map", report.map},
                        {"judged_queries", report.ap.size()},
                        {"skipped_queries", report.skipped}};
  write_text(dir / "ap.csv", ap.str());
  write_text(dir / "pr.csv", pr.str());
  write_text(dir / "map.json", summary.dump(2) + "\n");
  std::cout << matrix.model << " MAP " << fmt(report.map) << " over " << report.ap.size()
            << " queries";
  if (!report.skipped.empty()) std::cout << " (" << report.skipped.size() << " unjudged skipped)";
  std::cout << "\n";
  return kExitOk;
}

// ensemble

struct EnsembleArgs {
  std::vector<std::string> scores;
  std::string qrels, dialect = "auto", corpus, out, weights, rule = "weighted-ap", config;
  double epsilon = 1e-4;
  int max_rounds = 200;
  int folds = 2;
  std::uint64_t seed = 42;
  bool uniform = false;
  bool minmax = false;
};

ensemble::EnmOptions enm_options(const EnsembleArgs& a) {
  ensemble::EnmOptions o;
  if (!a.config.empty()) o = experiment::ExperimentConfig::from_file(a.config).enm;
  o.epsilon = a.epsilon;
  o.max_rounds = a.max_rounds;
  o.minmax_normalize = a.minmax || o.minmax_normalize;
  if (a.rule == "weighted-ap") {
    o.rule = ensemble::SelectionRule::WeightedAp;
  } else if (a.rule == "printed-bound") {
    o.rule = ensemble::SelectionRule::PrintedBound;
  } else {
    throw CLI::ValidationError("--rule", "expected weighted-ap or printed-bound");
  }
  return o;
}

int cmd_ensemble_train(const EnsembleArgs& a) {
  const auto matrices = load_matrices(a.scores);
  const auto qrels = load_qrels(a.qrels, a.dialect, a.corpus);
  const auto opts = enm_options(a);
  ensemble::EnsembleWeights w;
  if (a.uniform) {
    w = ensemble::uni_enm(matrices);
    w.train_map = ensemble::ensemble_map(w.alpha, matrices, qrels, opts.minmax_normalize);
  } else {
    w = ensemble::enm_train(matrices, qrels, opts);
  }
  Json weights = weights_json(w);
  weights["uniform"] = a.uniform;
  weights["minmax_normalize"] = opts.minmax_normalize;
  const fs::path dir = out_path(a.out);
  fs::create_directories(dir);
  write_text(dir / "weights.json", weights.dump(2) + "\n");
  if (!a.uniform) write_text(dir / "trace.json", trace_json(w).dump(2) + "\n");
  std::cout << (a.uniform ? "uniform" : "boosted") << " ensemble over " << matrices.size()
            << " models, training MAP " << fmt(w.train_map);
  if (!a.uniform) std::cout << (w.converged ? " (converged" : " (not converged") << " after " << w.trace.size() << " rounds)";
  std::cout << "\n";
  for (std::size_t k = 0; k < w.models.size(); ++k)
    std::cout << "  " << w.models[k] << " " << fmt(w.alpha[static_cast<Eigen::Index>(k)]) << "\n";
  return kExitOk;
}

int cmd_ensemble_apply(const EnsembleArgs& a) {
  const auto matrices = load_matrices(a.scores);
  Json w;
  try {
    w = Json::parse(bundle::read_file(a.weights));
  } catch (const Json::exception& e) {
    throw DataError("cannot parse '" + a.weights + "': " + e.what());
  }
  const auto models = w.at("models").get<std::vector<std::string>>();
  const auto alpha_v = w.at("alpha").get<std::vector<double>>();
  if (models.size() != matrices.size()) throw DataError("weights and score files differ in model count");
  for (std::size_t k = 0; k < models.size(); ++k)
    if (models[k] != matrices[k].model)
      std::cerr << "warning: weight " << k << " was learned for '" << models[k] << "', applied to '"
                << matrices[k].model << "'\n";
  const Eigen::VectorXd alpha = Eigen::Map<const Eigen::VectorXd>(alpha_v.data(), static_cast<Eigen::Index>(alpha_v.size()));
  auto combined = ensemble::ensemble_score(alpha, matrices, w.value("minmax_normalize", a.minmax));
  if (combined.degenerate) std::cerr << "warning: all weights are zero; ranking falls back to id order\n";
  const fs::path path = out_path(a.out);
  ensure_parent(path);
  if (path.extension() == ".csv") {
    write_score_matrix_csv(path, combined.matrix);
  } else {
    write_score_matrix(path, combined.matrix);
  }
  std::cout << "ensemble scores -> " << path.string() << "\n";
  return kExitOk;
}

int cmd_ensemble_crossval(const EnsembleArgs& a) {
  const auto matrices = load_matrices(a.scores);
  const auto qrels = load_qrels(a.qrels, a.dialect, a.corpus);
  const auto report = ensemble::cross_validate(matrices, qrels, a.folds, a.seed, enm_options(a));
  Json folds = Json::array();
  for (const auto& f : report.folds) {
    folds.push_back({{"train_queries", f.train_queries},
                     {"test_queries", f.test_queries},
                     {"weights", weights_json(f.weights)},
                     {"train_map", f.train_map},
                     {"test_map", f.test_map},
                     {"uniform_train_map", f.uniform_train_map},
                     {"uniform_test_map", f.uniform_test_map},
                     {"constituent_train_map", f.constituent_train_map},
                     {"constituent_test_map", f.constituent_test_map}});
  }
  const Json out = {{"models", report.models},
                    {"folds", folds},
                    {"seed", a.seed},
                    {"mean_test_map", report.mean_test_map},
                    {"mean_uniform_test_map", report.mean_uniform_test_map},
                    {"mean_normalized_weights", vec_json(report.mean_normalized_weights)},
                    {"best_fold", report.best_fold}};
  const fs::path dir = out_path(a.out);
  fs::create_directories(dir);
  write_text(dir / "crossval.json", out.dump(2) + "\n");
  std::cout << "fold  train_map  test_map  uniform_test_map\n";
  for (std::size_t i = 0; i < report.folds.size(); ++i) {
    const auto& f = report.folds[i];
    std::cout << i + 1 << "     " << fmt(f.train_map) << "  " << fmt(f.test_map) << "  "
              << fmt(f.uniform_test_map) << "\n";
  }
  std::cout << "mean test MAP " << fmt(report.mean_test_map) << ", uniform "
            << fmt(report.mean_uniform_test_map) << "\n";
  return kExitOk;
}

// sweep

struct SweepArgs {
  std::string corpus, method = "lda", ks, seeds = "42", out, config;
};

int cmd_sweep(const SweepArgs& a) {
  std::vector<int> ks;
  for (const auto& s : split_list(a.ks)) ks.push_back(std::stoi(s));
  std::vector<std::uint64_t> seeds;
  for (const auto& s : split_list(a.seeds)) seeds.push_back(std::stoull(s));
  if (ks.empty()) throw CLI::ValidationError("--k", "empty topic list");
  const auto cfg = a.config.empty() ? experiment::ExperimentConfig{}
                                    : experiment::ExperimentConfig::from_file(a.config);
  const auto loaded = corpus::read_corpus_bundle(a.corpus);
  const auto method = experiment::method_from_string(a.method);
  const auto rows = experiment::sweep(loaded.corpus, method, ks, seeds, cfg);
  std::ostringstream csv;
  csv << "method,k,seed,map,seconds\n" << std::setprecision(10);
  for (const auto& r : rows)
    csv << experiment::ranker_tag(r.method) << ',' << r.k << ',' << r.seed << ',' << r.map << ','
        << r.seconds << '\n';
  const fs::path path = out_path(a.out);
  write_text(path, csv.str());
  std::cout << csv.str();
  return kExitOk;
}

// ldi inspect

struct InspectArgs {
  std::string model, corpus, term, query;
  int doc = -1;
  int top = 10;
};

void print_topics(const Eigen::VectorXd& p, int top) {
  std::vector<int> idx(static_cast<std::size_t>(p.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) { return p[x] > p[y]; });
  for (int i = 0; i < std::min<int>(top, static_cast<int>(idx.size())); ++i)
    std::cout << "  topic " << idx[static_cast<std::size_t>(i)] << "  " << fmt(p[idx[static_cast<std::size_t>(i)]]) << "\n";
}

int cmd_ldi_inspect(const InspectArgs& a) {
  const auto loaded = corpus::read_corpus_bundle(a.corpus);
  const auto& c = loaded.corpus;
  std::vector<std::string> warnings;
  const auto model = experiment::from_bundle(bundle::read_model_bundle(a.model), c, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  if (model.method != experiment::Method::Lda) throw DataError("ldi inspect needs an lda model");
  const auto& words = model.ldi.words();
  std::cout << "K=" << words.num_topics() << " V=" << words.vocabulary_size()
            << " alpha=" << fmt(model.lda.alpha) << "\n";
  if (!a.term.empty()) {
    const auto idx = c.vocab.index_of(corpus::normalize_term(a.term));
    if (!idx) throw DataError("term '" + a.term + "' is not in the vocabulary");
    std::cout << "term " << a.term << "\n";
    print_topics(words.rows.row(*idx).transpose(), a.top);
    std::vector<std::pair<double, std::size_t>> sims;
    for (std::size_t t = 0; t < words.vocabulary_size(); ++t)
      if (t != *idx) sims.emplace_back(ldi::term_similarity(words, *idx, t), t);
    std::stable_sort(sims.begin(), sims.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    std::cout << "nearest terms\n";
    for (int i = 0; i < std::min<int>(a.top, static_cast<int>(sims.size())); ++i)
      std::cout << "  " << c.vocab.term(sims[static_cast<std::size_t>(i)].second) << "  "
                << fmt(sims[static_cast<std::size_t>(i)].first) << "\n";
  }
  if (a.doc >= 0) {
    const auto idx = c.doc_index(a.doc);
    if (!idx) throw DataError("document " + std::to_string(a.doc) + " is not in the corpus");
    const auto& d = model.ldi.documents()[*idx];
    std::cout << "document " << a.doc << (d.zero_evidence ? " (no evidence)" : "") << "\n";
    print_topics(d.p, a.top);
  }
  if (!a.query.empty()) {
    const auto q = ldi::query_vector(words, corpus::tokenize(a.query), c.vocab);
    std::cout << "query \"" << a.query << "\"" << (q.zero_evidence ? " (no evidence)" : "") << "\n";
    print_topics(q.p, a.top);
    const auto scores = model.ldi.score(q);
    const auto ranked = eval::rank(scores, c.doc_ids);
    std::cout << "top documents\n";
    for (int i = 0; i < std::min<int>(a.top, static_cast<int>(ranked.doc_ids.size())); ++i) {
      const int id = ranked.doc_ids[static_cast<std::size_t>(i)];
      std::cout << "  " << id << "  " << fmt(scores[static_cast<Eigen::Index>(*c.doc_index(id))]) << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topic-space document retrieval and ranker ensembles"};
  app.set_version_flag("--version", std::string(kToolkitVersion));
  app.require_subcommand(1);

  CorpusArgs ca;
  auto* corpus_cmd = app.add_subcommand("corpus", "Corpus preparation");
  corpus_cmd->require_subcommand(1);
  auto* build = corpus_cmd->add_subcommand("build", "Parse and preprocess a collection into a corpus bundle");
  build->add_option("--docs", ca.docs, "SMART document file");
  build->add_option("--queries", ca.queries, "SMART query file");
  build->add_option("--qrels", ca.qrels, "Relevance judgments");
  build->add_option("--name", ca.name, "Collection name");
  build->add_option("--source", ca.source, "Source tag (MED, CRAN, CISI, CACM)");
  build->add_option("--dialect", ca.dialect, "Qrels layout: auto, qid-did, qid-0-did-rel");
  build->add_flag("--renumber-queries", ca.renumber, "Number queries 1..n in file order");
  build->add_option("--smart-dir", ca.smart_dir, "Directory holding the standard SMART files");
  build->add_option("--collection", ca.collections, "Collection under --smart-dir; repeat to merge");
  build->add_option("--config", ca.config, "Experiment config JSON listing collections");
  build->add_option("--stoplist", ca.stoplist, "Stop word file, one word per line");
  build->add_option("--out", ca.out, "Output bundle directory")->required();

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a retrieval model");
  train->add_option("--corpus", ta.corpus, "Corpus bundle")->required();
  train->add_option("--method", ta.method, "tfidf, lsi, plsi or lda")
      ->required()
      ->check(kMethodNames);
  train->add_option("--k", ta.k, "Number of topics (default from config)");
  train->add_option("--seed", ta.seed, "Random seed");
  train->add_option("--config", ta.config, "Experiment config JSON");
  train->add_option("--out", ta.out, "Model bundle directory")->required();

  ScoreArgs sa;
  auto* score = app.add_subcommand("score", "Score every query against every document");
  score->add_option("--model", sa.model, "Model bundle")->required();
  score->add_option("--corpus", sa.corpus, "Corpus bundle")->required();
  score->add_option("--out", sa.out, "Score matrix file")->required();
  score->add_flag("--csv", sa.csv, "Write long-form CSV");

  EvalArgs ea;
  auto* evalc = app.add_subcommand("eval", "MAP, per-query AP and precision-recall curve");
  evalc->add_option("--scores", ea.scores, "Score matrix file")->required();
  evalc->add_option("--qrels", ea.qrels, "Relevance judgments file");
  evalc->add_option("--dialect", ea.dialect, "Qrels layout");
  evalc->add_option("--corpus", ea.corpus, "Corpus bundle (judgments taken from it)");
  evalc->add_option("--out", ea.out, "Output directory")->required();

  EnsembleArgs na;
  auto* ens = app.add_subcommand("ensemble", "Ranker ensembles");
  ens->require_subcommand(1);
  auto add_common = [&](CLI::App* c) {
    c->add_option("--scores", na.scores, "Constituent score matrices")->required();
    c->add_flag("--minmax", na.minmax, "Rescale each query row to [0, 1] before combining");
  };
  auto add_training = [&](CLI::App* c) {
    c->add_option("--qrels", na.qrels, "Relevance judgments file");
    c->add_option("--dialect", na.dialect, "Qrels layout");
    c->add_option("--corpus", na.corpus, "Corpus bundle (judgments taken from it)");
    c->add_option("--epsilon", na.epsilon, "Stop when MAP changes by at most this");
    c->add_option("--max-rounds", na.max_rounds, "Round cap");
    c->add_option("--rule", na.rule, "Model selection: weighted-ap or printed-bound")
        ->check(CLI::IsMember({"weighted-ap", "printed-bound"}));
    c->add_option("--config", na.config, "Experiment config JSON");
  };
  auto* etrain = ens->add_subcommand("train", "Learn ensemble weights by boosting");
  add_common(etrain);
  add_training(etrain);
  etrain->add_flag("--uniform", na.uniform, "Equal weights instead of boosting");
  etrain->add_option("--out", na.out, "Output directory")->required();
  auto* eapply = ens->add_subcommand("apply", "Combine score matrices with learned weights");
  add_common(eapply);
  eapply->add_option("--weights", na.weights, "weights.json from ensemble train")->required();
  eapply->add_option("--out", na.out, "Output score matrix")->required();
  auto* ecv = ens->add_subcommand("crossval", "Cross-validated boosting");
  add_common(ecv);
  add_training(ecv);
  ecv->add_option("--folds", na.folds, "Number of folds");
  ecv->add_option("--seed", na.seed, "Shuffle seed");
  ecv->add_option("--out", na.out, "Output directory")->required();

  SweepArgs wa;
  auto* sweep = app.add_subcommand("sweep", "MAP against number of topics");
  sweep->add_option("--corpus", wa.corpus, "Corpus bundle")->required();
  sweep->add_option("--method", wa.method, "lsi, plsi or lda")->check(kMethodNames);
  sweep->add_option("--k", wa.ks, "Comma-separated topic counts")->required();
  sweep->add_option("--seeds", wa.seeds, "Comma-separated seeds");
  sweep->add_option("--config", wa.config, "Experiment config JSON");
  sweep->add_option("--out", wa.out, "CSV file")->required();

  InspectArgs ia;
  auto* ldi_cmd = app.add_subcommand("ldi", "Topic-space index tools");
  ldi_cmd->require_subcommand(1);
  auto* inspect = ldi_cmd->add_subcommand("inspect", "Show topic vectors and neighbours");
  inspect->add_option("--model", ia.model, "lda model bundle")->required();
  inspect->add_option("--corpus", ia.corpus, "Corpus bundle")->required();
  inspect->add_option("--term", ia.term, "Vocabulary term");
  inspect->add_option("--doc", ia.doc, "Document id");
  inspect->add_option("--query", ia.query, "Free-text query");
  inspect->add_option("--top", ia.top, "How many entries to list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*build) return cmd_corpus(ca);
    if (*train) return cmd_train(ta);
    if (*score) return cmd_score(sa);
    if (*evalc) return cmd_eval(ea);
    if (*etrain) return cmd_ensemble_train(na);
    if (*eapply) return cmd_ensemble_apply(na);
    if (*ecv) return cmd_ensemble_crossval(na);
    if (*sweep) return cmd_sweep(wa);
    if (*inspect) return cmd_ldi_inspect(ia);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: bad number: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
