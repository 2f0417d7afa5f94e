#include "ldikit/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>

#include "ldikit/corpus_io.hpp"
#include "ldikit/error.hpp"
#include "ldikit/eval.hpp"
#include "ldikit/version.hpp"

namespace ldikit::experiment {

namespace fs = std::filesystem;
using bundle::Json;
using Eigen::Index;
using Eigen::MatrixXd;

namespace {

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::optional<fs::path> find_file(const fs::path& dir, const std::string& name) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return std::nullopt;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && lower(entry.path().filename().string()) == lower(name))
      return entry.path();
  }
  return std::nullopt;
}

MatrixXd column(const Eigen::VectorXd& v) { return v; }

const MatrixXd& array_of(const bundle::ModelBundle& b, const std::string& name) {
  auto it = b.arrays.find(name);
  if (it == b.arrays.end()) throw DataError("model bundle lacks array '" + name + "'");
  return it->second;
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::Tfidf: return "tfidf";
    case Method::Lsi: return "lsi";
    case Method::Plsi: return "plsi";
    case Method::Lda: return "lda";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  const std::string n = lower(name);
  if (n == "tfidf") return Method::Tfidf;
  if (n == "lsi") return Method::Lsi;
  if (n == "plsi" || n == "plsa") return Method::Plsi;
  if (n == "lda" || n == "ldi") return Method::Lda;
  throw DataError("unknown method '" + name + "' (expected tfidf, lsi, plsi or lda)");
}

std::string ranker_tag(Method method) {
  return method == Method::Lda ? "ldi" : to_string(method);
}

std::optional<CollectionSpec> find_smart_collection(const fs::path& dir, const std::string& name) {
  struct Layout {
    const char* name;
    corpus::Source source;
    const char* docs;
    const char* queries;
    const char* qrels;
    bool renumber;
  };
  static const Layout layouts[] = {
      {"MED", corpus::Source::Med, "MED.ALL", "MED.QRY", "MED.REL", false},
      {"CRAN", corpus::Source::Cran, "cran.all.1400", "cran.qry", "cranqrel", true},
      {"CISI", corpus::Source::Cisi, "CISI.ALL", "CISI.QRY", "CISI.REL", false},
      {"CACM", corpus::Source::Cacm, "cacm.all", "query.text", "qrels.text", false},
  };
  const std::string key = upper(name);
  for (const auto& l : layouts) {
    if (key != l.name) continue;
    for (const fs::path& base : {dir / l.name, dir / lower(l.name), dir}) {
      auto d = find_file(base, l.docs);
      auto q = find_file(base, l.queries);
      auto r = find_file(base, l.qrels);
      if (d && q && r) {
        return CollectionSpec{l.name, l.source, *d, *q, *r, corpus::QrelsDialect::Auto, l.renumber};
      }
    }
    return std::nullopt;
  }
  return std::nullopt;
}

LoadedCollection load_collection(const CollectionSpec& spec) {
  auto open = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot open '" + p.string() + "'");
    return in;
  };
  LoadedCollection out;
  out.collection.name = spec.name;
  out.collection.source = spec.source;
  {
    auto in = open(spec.docs);
    out.collection.docs = corpus::parse_smart(in, spec.source, &out.warnings);
  }
  {
    auto in = open(spec.queries);
    out.collection.queries = corpus::parse_queries(in, spec.source, &out.warnings);
  }
  if (spec.renumber_queries) {
    int next = 1;
    for (auto& q : out.collection.queries) q.id = next++;
  }
  {
    auto in = open(spec.qrels);
    out.collection.qrels = corpus::parse_qrels(in, spec.dialect);
  }
  return out;
}

int default_topics(const std::string& collection, Method method) {
  static const std::map<std::string, std::map<Method, int>> table = {
      {"MED", {{Method::Lsi, 100}, {Method::Plsi, 100}, {Method::Lda, 100}}},
      {"CRAN", {{Method::Lsi, 125}, {Method::Plsi, 150}, {Method::Lda, 100}}},
      {"CISI", {{Method::Lsi, 150}, {Method::Plsi, 50}, {Method::Lda, 100}}},
      {"CACM", {{Method::Lsi, 125}, {Method::Plsi, 75}, {Method::Lda, 75}}},
      {"MC", {{Method::Lsi, 500}, {Method::Plsi, 400}, {Method::Lda, 200}}},
  };
  if (method == Method::Tfidf) return 0;
  auto it = table.find(upper(collection));
  if (it == table.end()) return 100;
  return it->second.at(method);
}

int ExperimentConfig::topics_for(const std::string& collection, Method method) const {
  auto it = topics.find(upper(collection));
  if (it != topics.end()) {
    auto m = it->second.find(method);
    if (m != it->second.end()) return m->second;
  }
  return default_topics(collection, method);
}

ExperimentConfig ExperimentConfig::from_json(const Json& json, const fs::path& base) {
  ExperimentConfig c;
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
  };
  try {
    if (json.contains("collections")) {
      for (const auto& e : json.at("collections")) {
        CollectionSpec s;
        s.name = e.at("name").get<std::string>();
        s.source = corpus::source_from_string(e.value("source", s.name));
        s.docs = resolve(e.at("docs").get<std::string>());
        s.queries = resolve(e.at("queries").get<std::string>());
        s.qrels = resolve(e.at("qrels").get<std::string>());
        s.dialect = corpus::qrels_dialect_from_string(e.value("qrels_dialect", std::string("auto")));
        s.renumber_queries = e.value("renumber_queries", false);
        c.collections.push_back(std::move(s));
      }
    }
    if (json.contains("topics")) {
      for (const auto& [coll, methods] : json.at("topics").items()) {
        for (const auto& [m, k] : methods.items()) {
          const int kk = k.get<int>();
          if (kk < 1) throw DataError("topic count for " + coll + "/" + m + " must be at least 1");
          c.topics[upper(coll)][method_from_string(m)] = kk;
        }
      }
    }
    c.seed = json.value("seed", c.seed);
    if (json.contains("lda")) {
      const auto& j = json.at("lda");
      c.lda.em_tolerance = j.value("em_tolerance", c.lda.em_tolerance);
      c.lda.max_em_iterations = j.value("max_em_iterations", c.lda.max_em_iterations);
      c.lda.estep_tolerance = j.value("estep_tolerance", c.lda.estep_tolerance);
      c.lda.estep_max_iterations = j.value("estep_max_iterations", c.lda.estep_max_iterations);
      c.lda.alpha_init = j.value("alpha_init", c.lda.alpha_init);
      c.lda.estimate_alpha = j.value("estimate_alpha", c.lda.estimate_alpha);
    }
    if (json.contains("plsa")) {
      const auto& j = json.at("plsa");
      c.plsa.tolerance = j.value("tolerance", c.plsa.tolerance);
      c.plsa.max_iterations_per_block = j.value("max_iterations_per_block", c.plsa.max_iterations_per_block);
      c.plsa.heldout_fraction = j.value("heldout_fraction", c.plsa.heldout_fraction);
      c.plsa.temper_factor = j.value("temper_factor", c.plsa.temper_factor);
      c.plsa.max_blocks = j.value("max_blocks", c.plsa.max_blocks);
      c.plsa.refit_iterations = j.value("refit_iterations", c.plsa.refit_iterations);
      c.plsa_precision_tempering = j.value("precision_tempering", c.plsa_precision_tempering);
    }
    if (json.contains("svd")) {
      const auto& j = json.at("svd");
      c.svd.oversampling = j.value("oversampling", c.svd.oversampling);
      c.svd.min_power_iterations = j.value("min_power_iterations", c.svd.min_power_iterations);
      c.svd.max_power_iterations = j.value("max_power_iterations", c.svd.max_power_iterations);
      c.svd.tolerance = j.value("tolerance", c.svd.tolerance);
    }
    if (json.contains("enm")) {
      const auto& j = json.at("enm");
      c.enm.epsilon = j.value("epsilon", c.enm.epsilon);
      c.enm.max_rounds = j.value("max_rounds", c.enm.max_rounds);
      c.enm.minmax_normalize = j.value("minmax_normalize", c.enm.minmax_normalize);
    }
    if (json.contains("output_dir")) c.output_dir = resolve(json.at("output_dir").get<std::string>());
  } catch (const Json::exception& e) {
    throw DataError(std::string("bad experiment config: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const fs::path& path) {
  Json json;
  try {
    json = Json::parse(bundle::read_file(path));
  } catch (const Json::exception& e) {
    throw DataError("cannot parse '" + path.string() + "': " + e.what());
  }
  return from_json(json, path.parent_path());
}

Json ExperimentConfig::to_json() const {
  Json j;
  j["collections"] = Json::array();
  for (const auto& s : collections) {
    j["collections"].push_back({{"name", s.name},
                                {"source", std::string(corpus::to_string(s.source))},
                                {"docs", s.docs.string()},
                                {"queries", s.queries.string()},
                                {"qrels", s.qrels.string()},
                                {"qrels_dialect", std::string(corpus::to_string(s.dialect))},
                                {"renumber_queries", s.renumber_queries}});
  }
  j["topics"] = Json::object();
  for (const auto& [coll, methods] : topics)
    for (const auto& [m, k] : methods) j["topics"][coll][to_string(m)] = k;
  j["seed"] = seed;
  j["lda"] = {{"em_tolerance", lda.em_tolerance},
              {"max_em_iterations", lda.max_em_iterations},
              {"estep_tolerance", lda.estep_tolerance},
              {"estep_max_iterations", lda.estep_max_iterations},
              {"alpha_init", lda.alpha_init},
              {"estimate_alpha", lda.estimate_alpha}};
  j["plsa"] = {{"tolerance", plsa.tolerance},
               {"max_iterations_per_block", plsa.max_iterations_per_block},
               {"heldout_fraction", plsa.heldout_fraction},
               {"temper_factor", plsa.temper_factor},
               {"max_blocks", plsa.max_blocks},
               {"refit_iterations", plsa.refit_iterations},
               {"precision_tempering", plsa_precision_tempering}};
  j["svd"] = {{"oversampling", svd.oversampling},
              {"min_power_iterations", svd.min_power_iterations},
              {"max_power_iterations", svd.max_power_iterations},
              {"tolerance", svd.tolerance}};
  j["enm"] = {{"epsilon", enm.epsilon},
              {"max_rounds", enm.max_rounds},
              {"minmax_normalize", enm.minmax_normalize}};
  j["output_dir"] = output_dir.string();
  return j;
}

fs::path output_dir(const fs::path& fallback) {
  if (const char* env = std::getenv("LDIKIT_OUTPUT_DIR"); env && *env) return env;
  return fallback;
}

TrainedModel train_model(Method method, const corpus::Corpus& corpus, int k, std::uint64_t seed,
                         const ExperimentConfig& config) {
  if (method != Method::Tfidf && k < 1) throw DataError("topic count must be at least 1");
  TrainedModel m;
  m.method = method;
  m.k = method == Method::Tfidf ? 0 : k;
  m.seed = seed;
  m.corpus_checksum = corpus::corpus_checksum(corpus);
  switch (method) {
    case Method::Tfidf:
      m.tfidf = vsm::train_tfidf(corpus.docs);
      break;
    case Method::Lsi: {
      auto opts = config.svd;
      opts.seed = seed;
      m.lsi = lsa::LsiModel::train(vsm::train_tfidf(corpus.docs), k, opts);
      const auto& f = m.lsi.factors();
      m.log = {{"rank", f.rank()},
               {"rank_deficient", f.rank_deficient},
               {"converged", f.converged},
               {"max_residual", f.max_residual},
               {"power_iterations", f.power_iterations}};
      break;
    }
    case Method::Plsi: {
      plsa::PlsaTrainLog log;
      m.plsa = plsa::train_plsa(corpus.docs, k, config.plsa, seed, &log);
      Json tempering = Json::array();
      if (config.plsa_precision_tempering) {
        plsa::ValidationSet v{&corpus.queries, corpus.query_ids, corpus.doc_ids, &corpus.qrels};
        std::vector<plsa::TemperingStep> steps;
        m.plsa = plsa::continue_tempering_by_precision(m.plsa, corpus.docs, v, config.plsa, &steps);
        for (const auto& st : steps) tempering.push_back({{"beta", st.beta_temp}, {"map", st.validation_map}});
      }
      Json blocks = Json::array();
      for (const auto& b : log.blocks) {
        blocks.push_back({{"beta", b.beta_temp},
                          {"tempered_loglik", b.tempered_loglik},
                          {"heldout_perplexity", b.heldout_perplexity}});
      }
      m.log = {{"initial_perplexity", log.initial_perplexity},
               {"blocks", blocks},
               {"selected_perplexity", log.selected_perplexity},
               {"final_perplexity", log.final_perplexity},
               {"precision_tempering", tempering},
               {"beta", m.plsa.beta_temp}};
      break;
    }
    case Method::Lda: {
      auto result = lda::train_lda(corpus.docs, k, config.lda, seed);
      m.lda = std::move(result.model);
      m.ldi = ldi::LdiIndex::build(m.lda.beta, corpus.docs, &corpus.vocab);
      m.log = {{"iterations", result.iterations},
               {"converged", result.converged},
               {"elbo", result.elbo_trace},
               {"alpha", result.alpha_trace}};
      break;
    }
  }
  return m;
}

bundle::ModelBundle to_bundle(const TrainedModel& model) {
  bundle::ModelBundle b;
  b.manifest = {{"method", to_string(model.method)},
                {"k", model.k},
                {"seed", model.seed},
                {"corpus_checksum", model.corpus_checksum},
                {"toolkit_version", kToolkitVersion},
                {"log", model.log}};
  switch (model.method) {
    case Method::Tfidf:
      b.arrays["idf"] = column(model.tfidf.idf());
      break;
    case Method::Lsi: {
      const auto& f = model.lsi.factors();
      b.arrays["idf"] = column(model.lsi.tfidf().idf());
      b.arrays["u"] = f.u;
      b.arrays["s"] = column(f.s);
      b.arrays["vt"] = f.vt;
      b.manifest["requested_rank"] = f.requested_rank;
      b.manifest["rank_deficient"] = f.rank_deficient;
      break;
    }
    case Method::Plsi:
      b.arrays["word_given_topic"] = model.plsa.word_given_topic;
      b.arrays["topic_given_doc"] = model.plsa.topic_given_doc;
      b.manifest["beta_temp"] = model.plsa.beta_temp;
      break;
    case Method::Lda:
      b.arrays["beta"] = model.lda.beta;
      b.manifest["alpha"] = model.lda.alpha;
      break;
  }
  return b;
}

TrainedModel from_bundle(const bundle::ModelBundle& b, const corpus::Corpus& corpus,
                         std::vector<std::string>* warnings) {
  TrainedModel m;
  try {
    m.method = method_from_string(b.manifest.at("method").get<std::string>());
    m.k = b.manifest.at("k").get<int>();
    m.seed = b.manifest.at("seed").get<std::uint64_t>();
    m.corpus_checksum = b.manifest.at("corpus_checksum").get<std::string>();
    m.log = b.manifest.value("log", Json::object());
  } catch (const Json::exception& e) {
    throw DataError(std::string("bad model manifest: ") + e.what());
  }
  const auto current = corpus::corpus_checksum(corpus);
  if (current != m.corpus_checksum && warnings) {
    warnings->push_back("model was trained on corpus " + m.corpus_checksum.substr(0, 12) +
                        " but scoring uses " + current.substr(0, 12));
  }
  const Index v = static_cast<Index>(corpus.vocab.size());
  const Index docs = static_cast<Index>(corpus.docs.rows());
  auto expect = [](bool ok, const std::string& what) {
    if (!ok) throw DataError("model does not fit the corpus: " + what);
  };
  switch (m.method) {
    case Method::Tfidf: {
      const auto& idf = array_of(b, "idf");
      expect(idf.rows() == v && idf.cols() == 1, "idf length differs from the vocabulary");
      m.tfidf = vsm::TfIdfModel(idf.col(0), corpus.docs);
      break;
    }
    case Method::Lsi: {
      const auto& idf = array_of(b, "idf");
      expect(idf.rows() == v && idf.cols() == 1, "idf length differs from the vocabulary");
      lsa::SvdFactors f;
      f.u = array_of(b, "u");
      f.s = array_of(b, "s").col(0);
      f.vt = array_of(b, "vt");
      f.requested_rank = b.manifest.value("requested_rank", static_cast<int>(f.s.size()));
      f.rank_deficient = b.manifest.value("rank_deficient", false);
      f.converged = true;
      expect(f.u.rows() == v && f.vt.cols() == docs && f.u.cols() == f.s.size() &&
                 f.vt.rows() == f.s.size(),
             "LSI factor shapes");
      m.lsi = lsa::LsiModel(vsm::TfIdfModel(idf.col(0), corpus.docs), std::move(f));
      break;
    }
    case Method::Plsi:
      m.plsa.word_given_topic = array_of(b, "word_given_topic");
      m.plsa.topic_given_doc = array_of(b, "topic_given_doc");
      m.plsa.beta_temp = b.manifest.value("beta_temp", 1.0);
      expect(m.plsa.word_given_topic.cols() == v, "P(w|z) width differs from the vocabulary");
      expect(m.plsa.topic_given_doc.rows() == docs, "P(z|d) height differs from the document count");
      break;
    case Method::Lda:
      m.lda.beta = array_of(b, "beta");
      m.lda.alpha = b.manifest.value("alpha", 0.0);
      expect(m.lda.beta.cols() == v, "beta width differs from the vocabulary");
      m.ldi = ldi::LdiIndex::build(m.lda.beta, corpus.docs, &corpus.vocab);
      break;
  }
  return m;
}

ScoreVector score_query(const TrainedModel& model, std::span<const corpus::TermCount> query) {
  switch (model.method) {
    case Method::Tfidf: return vsm::score_tfidf(model.tfidf, query);
    case Method::Lsi: return model.lsi.score(query);
    case Method::Plsi: {
      const auto fold = plsa::fold_in_query(model.plsa, query);
      if (fold.zero_evidence) return ScoreVector::Zero(model.plsa.topic_given_doc.rows());
      return plsa::score_plsa(model.plsa, fold.topics);
    }
    case Method::Lda: return model.ldi.score(query);
  }
  throw DataError("unknown method");
}

ScoreMatrix score_queries(const TrainedModel& model, const corpus::Corpus& corpus) {
  ScoreMatrix out;
  out.model = ranker_tag(model.method);
  out.query_ids = corpus.query_ids;
  out.doc_ids = corpus.doc_ids;
  out.scores.resize(static_cast<Index>(corpus.queries.rows()), static_cast<Index>(corpus.docs.rows()));
  for (std::size_t q = 0; q < corpus.queries.rows(); ++q) {
    const ScoreVector s = score_query(model, corpus.queries.row(q));
    if (s.size() != out.scores.cols()) throw DataError("model and corpus disagree on document count");
    out.scores.row(static_cast<Index>(q)) = s.transpose();
  }
  out.validate();
  return out;
}

std::vector<SweepRow> sweep(const corpus::Corpus& corpus, Method method, const std::vector<int>& ks,
                            const std::vector<std::uint64_t>& seeds, const ExperimentConfig& config) {
  if (ks.empty()) throw DataError("sweep needs at least one topic count");
  if (seeds.empty()) throw DataError("sweep needs at least one seed");
  std::vector<SweepRow> rows;
  for (int k : ks) {
    for (auto seed : seeds) {
      const auto start = std::chrono::steady_clock::now();
      const auto model = train_model(method, corpus, k, seed, config);
      const double map = eval::evaluate(score_queries(model, corpus), corpus.qrels).map;
      const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
      rows.push_back({method, k, seed, map, took.count()});
    }
  }
  return rows;
}

std::vector<ScoreMatrix> score_all_methods(const corpus::Corpus& corpus, const std::string& collection,
                                           const ExperimentConfig& config) {
  std::vector<ScoreMatrix> out;
  for (Method m : {Method::Tfidf, Method::Lsi, Method::Plsi, Method::Lda}) {
    const auto model = train_model(m, corpus, config.topics_for(collection, m), config.seed, config);
    out.push_back(score_queries(model, corpus));
  }
  return out;
}

}  // namespace ldikit::experiment
