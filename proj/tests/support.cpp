#include "support.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

namespace testing {

namespace fs = std::filesystem;

fs::path data_dir() { return LDIKIT_TEST_DATA; }
fs::path cli_path() { return LDIKIT_CLI; }

TempDir::TempDir() {
  static int counter = 0;
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          ("ldikit-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

ldikit::experiment::CollectionSpec toy_spec() {
  ldikit::experiment::CollectionSpec s;
  s.name = "TOY";
  s.docs = data_dir() / "toy" / "toy.all";
  s.queries = data_dir() / "toy" / "toy.qry";
  s.qrels = data_dir() / "toy" / "toy.rel";
  return s;
}

ldikit::corpus::Corpus toy_corpus() {
  return ldikit::corpus::build_corpus(ldikit::experiment::load_collection(toy_spec()).collection);
}

namespace {

// Letters only, so the tokenizer keeps every generated word intact.
std::string word(char prefix, int group, int index) {
  std::string s(1, prefix);
  s.push_back(static_cast<char>('a' + group % 26));
  int i = index;
  do {
    s.push_back(static_cast<char>('a' + i % 26));
    i /= 26;
  } while (i > 0);
  s += "x";
  return s;
}

}  // namespace

ldikit::experiment::CollectionSpec write_synthetic_collection(const fs::path& dir,
                                                              const std::string& name,
                                                              const SyntheticSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  // Zipf-like choice inside a topic's word list.
  std::vector<double> weights(static_cast<std::size_t>(spec.words_per_topic));
  for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = 1.0 / static_cast<double>(i + 1);
  std::discrete_distribution<int> zipf(weights.begin(), weights.end());
  std::uniform_int_distribution<int> shared(0, spec.shared_words - 1);
  std::uniform_int_distribution<int> topic_of(0, spec.topics - 1);
  static const std::array<const char*, 6> fillers = {"the", "of", "and", "in", "which", "is"};

  auto draw = [&](int topic, int other) {
    const double u = unif(rng);
    if (u < spec.noise) return word('c', 0, shared(rng));
    if (u < spec.noise + spec.secondary) return word('t', other, zipf(rng));
    return word('t', topic, zipf(rng));
  };

  fs::create_directories(dir);
  std::ofstream docs(dir / (name + ".all"));
  std::vector<int> doc_topic;
  int id = 0;
  for (int t = 0; t < spec.topics; ++t) {
    for (int d = 0; d < spec.docs_per_topic; ++d) {
      ++id;
      int other = topic_of(rng);
      if (other == t) other = (t + 1) % spec.topics;
      doc_topic.push_back(t);
      docs << ".I " << id << "\n.T\n" << draw(t, other) << " " << draw(t, other) << "\n";
      docs << ".A\nauthor" << static_cast<char>('a' + id % 26) << "\n.W\n";
      for (int k = 0; k < spec.doc_length; ++k) {
        docs << draw(t, other) << (k % 9 == 8 ? "\n" : " ");
        if (k % 7 == 3) docs << fillers[static_cast<std::size_t>(k) % fillers.size()] << " ";
      }
      docs << "\n.X\n" << id << "\t5\t" << id << "\n";
    }
  }

  std::ofstream queries(dir / (name + ".qry"));
  std::ofstream qrels(dir / (name + ".rel"));
  int qid = 0;
  for (int t = 0; t < spec.topics; ++t) {
    for (int q = 0; q < spec.queries_per_topic; ++q) {
      ++qid;
      queries << ".I " << qid << "\n.W\nfind the ";
      for (int k = 0; k < spec.query_length; ++k) queries << draw(t, t) << " ";
      queries << "\n";
      for (std::size_t d = 0; d < doc_topic.size(); ++d)
        if (doc_topic[d] == t) qrels << qid << " 0 " << d + 1 << " 1\n";
    }
  }

  ldikit::experiment::CollectionSpec s;
  s.name = name;
  s.docs = dir / (name + ".all");
  s.queries = dir / (name + ".qry");
  s.qrels = dir / (name + ".rel");
  return s;
}

int run_cli(const std::string& args, std::string* output) {
  const std::string cmd = "\"" + cli_path().string() + "\" " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return -1;
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = pclose(pipe);
  if (output) *output = out;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace testing
