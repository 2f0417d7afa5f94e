#include "ldikit/ldi.hpp"

#include "ldikit/error.hpp"

namespace ldikit::ldi {

namespace {

using Eigen::Index;
using Eigen::VectorXd;

TopicVector uniform_flagged(int k) {
  return {VectorXd::Constant(k, 1.0 / k), true, 0};
}

double similarity(const Eigen::Ref<const VectorXd>& a, const Eigen::Ref<const VectorXd>& b,
                  Similarity mode) {
  return mode == Similarity::Cosine ? cosine(a, b) : a.dot(b);
}

}  // namespace

WordTopicMatrix word_vectors(const Eigen::MatrixXd& beta, const corpus::Vocabulary* vocab) {
  WordTopicMatrix w;
  w.rows = beta.transpose();
  for (Index j = 0; j < w.rows.rows(); ++j) {
    const double s = w.rows.row(j).sum();
    if (!(s > 0.0)) {
      const std::string name = vocab && static_cast<std::size_t>(j) < vocab->size()
                                   ? vocab->term(static_cast<std::size_t>(j))
                                   : "#" + std::to_string(j);
      throw DataError("topic-word matrix has a zero column for term '" + name +
                      "'; it was not smoothed");
    }
    w.rows.row(j) /= s;
  }
  return w;
}

DocTopicVector doc_vector(const WordTopicMatrix& words, std::span<const corpus::TermCount> counts) {
  const int k = words.num_topics();
  VectorXd acc = VectorXd::Zero(k);
  std::uint64_t n = 0;
  for (const auto& e : counts) {
    if (e.term >= words.vocabulary_size()) throw DataError("term index out of range");
    acc += static_cast<double>(e.count) * words.rows.row(e.term).transpose();
    n += e.count;
  }
  if (n == 0) return uniform_flagged(k);
  return {acc / static_cast<double>(n), false, n};
}

QueryTopicVector query_vector(const WordTopicMatrix& words,
                              std::span<const corpus::TermCount> counts) {
  return doc_vector(words, counts);
}

QueryTopicVector query_vector(const WordTopicMatrix& words, const std::vector<std::string>& tokens,
                              const corpus::Vocabulary& vocab) {
  const auto counts = corpus::count_terms(tokens, vocab);
  return query_vector(words, counts);
}

double term_similarity(const WordTopicMatrix& words, std::size_t s, std::size_t t,
                       Similarity mode) {
  if (s >= words.vocabulary_size() || t >= words.vocabulary_size()) {
    throw DataError("term index out of range");
  }
  return similarity(words.rows.row(static_cast<Index>(s)).transpose(),
                    words.rows.row(static_cast<Index>(t)).transpose(), mode);
}

double doc_similarity(const TopicVector& a, const TopicVector& b, Similarity mode) {
  if (a.zero_evidence || b.zero_evidence) return 0.0;
  return similarity(a.p, b.p, mode);
}

double term_doc_similarity(const WordTopicMatrix& words, std::size_t term, const TopicVector& doc,
                           Similarity mode) {
  if (term >= words.vocabulary_size()) throw DataError("term index out of range");
  if (doc.zero_evidence) return 0.0;
  return similarity(words.rows.row(static_cast<Index>(term)).transpose(), doc.p, mode);
}

LdiIndex::LdiIndex(WordTopicMatrix words, const corpus::TermDocCounts& docs, Similarity mode)
    : words_(std::move(words)), mode_(mode) {
  if (docs.num_terms() != words_.vocabulary_size()) {
    throw DataError("document counts and topic model use different vocabularies");
  }
  const Index k = words_.num_topics();
  doc_matrix_.resize(k, static_cast<Index>(docs.rows()));
  norms_.resize(static_cast<Index>(docs.rows()));
  docs_.reserve(docs.rows());
  for (std::size_t i = 0; i < docs.rows(); ++i) {
    docs_.push_back(doc_vector(words_, docs.row(i)));
    const auto& d = docs_.back();
    // Flagged documents contribute a zero column and therefore score 0.
    doc_matrix_.col(static_cast<Index>(i)) = d.zero_evidence ? VectorXd::Zero(k) : d.p;
    norms_[static_cast<Index>(i)] = d.zero_evidence ? 0.0 : d.p.norm();
  }
}

LdiIndex LdiIndex::build(const Eigen::MatrixXd& beta, const corpus::TermDocCounts& docs,
                         const corpus::Vocabulary* vocab, Similarity mode) {
  return LdiIndex(word_vectors(beta, vocab), docs, mode);
}

ScoreVector LdiIndex::score(const QueryTopicVector& query) const {
  const Index m = doc_matrix_.cols();
  if (query.zero_evidence) return ScoreVector::Zero(m);
  if (query.p.size() != doc_matrix_.rows()) throw DataError("query has the wrong topic count");
  ScoreVector dots = doc_matrix_.transpose() * query.p;
  if (mode_ == Similarity::Dot) return dots;
  const double qn = query.p.norm();
  for (Index i = 0; i < m; ++i) {
    dots[i] = norms_[i] > 0.0 && qn > 0.0 ? dots[i] / (norms_[i] * qn) : 0.0;
  }
  return dots;
}

ScoreVector LdiIndex::score(std::span<const corpus::TermCount> query) const {
  return score(query_vector(words_, query));
}

ScoreVector score_ldi(const LdiIndex& index, const QueryTopicVector& query) {
  return index.score(query);
}

}  // namespace ldikit::ldi
