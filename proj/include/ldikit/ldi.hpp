#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ldikit/corpus.hpp"
#include "ldikit/types.hpp"

namespace ldikit::ldi {

/// V x K; row j is p(z | w^j), the topic distribution of vocabulary term j.
struct WordTopicMatrix {
  Eigen::MatrixXd rows;

  int num_topics() const noexcept { return static_cast<int>(rows.cols()); }
  std::size_t vocabulary_size() const noexcept { return static_cast<std::size_t>(rows.rows()); }
};

/// A distribution over topics for a document or query. Text with no
/// in-vocabulary evidence is uniform and flagged; it scores 0 against everything.
struct TopicVector {
  Eigen::VectorXd p;
  bool zero_evidence = false;
  /// Number of in-vocabulary tokens (with multiplicity) that produced the vector.
  std::uint64_t evidence = 0;
};

using DocTopicVector = TopicVector;
using QueryTopicVector = TopicVector;

/// Column-normalizes the K x V topic-word matrix under a uniform topic prior:
/// W(j, k) = beta(k, j) / sum_h beta(h, j). A zero column is an error naming the term.
WordTopicMatrix word_vectors(const Eigen::MatrixXd& beta,
                             const corpus::Vocabulary* vocab = nullptr);

/// D_k = sum_j W(j, k) n_j / N.
DocTopicVector doc_vector(const WordTopicMatrix& words, std::span<const corpus::TermCount> counts);

/// Q_k = sum over in-vocabulary query tokens (with multiplicity) of W(q, k) / L.
QueryTopicVector query_vector(const WordTopicMatrix& words, const std::vector<std::string>& tokens,
                              const corpus::Vocabulary& vocab);
QueryTopicVector query_vector(const WordTopicMatrix& words,
                              std::span<const corpus::TermCount> counts);

enum class Similarity {
  Cosine,  ///< unit-normalized inner product
  Dot,     ///< raw inner product of the probability vectors
};

double term_similarity(const WordTopicMatrix& words, std::size_t s, std::size_t t,
                       Similarity mode = Similarity::Cosine);
double doc_similarity(const TopicVector& a, const TopicVector& b,
                      Similarity mode = Similarity::Cosine);
double term_doc_similarity(const WordTopicMatrix& words, std::size_t term, const TopicVector& doc,
                           Similarity mode = Similarity::Cosine);

class LdiIndex {
 public:
  LdiIndex() = default;
  LdiIndex(WordTopicMatrix words, const corpus::TermDocCounts& docs,
           Similarity mode = Similarity::Cosine);

  static LdiIndex build(const Eigen::MatrixXd& beta, const corpus::TermDocCounts& docs,
                        const corpus::Vocabulary* vocab = nullptr,
                        Similarity mode = Similarity::Cosine);

  const WordTopicMatrix& words() const noexcept { return words_; }
  const std::vector<DocTopicVector>& documents() const noexcept { return docs_; }
  const Eigen::VectorXd& norms() const noexcept { return norms_; }
  Similarity mode() const noexcept { return mode_; }

  ScoreVector score(const QueryTopicVector& query) const;
  ScoreVector score(std::span<const corpus::TermCount> query) const;

 private:
  WordTopicMatrix words_;
  std::vector<DocTopicVector> docs_;
  Eigen::MatrixXd doc_matrix_;  // K x M, columns are D_i
  Eigen::VectorXd norms_;
  Similarity mode_ = Similarity::Cosine;
};

/// Equivalent to LdiIndex::score; kept as a free function for symmetry with the other rankers.
ScoreVector score_ldi(const LdiIndex& index, const QueryTopicVector& query);

}  // namespace ldikit::ldi
