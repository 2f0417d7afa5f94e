#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace ldikit::corpus {

/// Recorded in corpus manifests; bump whenever tokenize() changes behaviour.
inline constexpr std::string_view kTokenizerVersion = "alnum-delete/min2/nodigits-v1";

/// Lowercases, deletes every non-alphanumeric character in place (so
/// "genetically-modified" becomes one token), splits on whitespace, and drops
/// all-digit tokens and tokens shorter than two characters.
std::vector<std::string> tokenize(std::string_view text);

/// Applies the same character deletion tokenize() uses to a single word.
std::string normalize_term(std::string_view word);

class StopList {
 public:
  StopList() = default;

  /// The bundled 571-entry SMART list.
  static const StopList& smart();

  /// One word per line; blank lines are ignored.
  static StopList from_stream(std::istream& in);
  static StopList from_words(const std::vector<std::string>& words);

  /// Matches against normalized forms, so "won't" in the list stops "wont".
  bool contains(std::string_view token) const;

  /// Number of entries read (duplicates counted).
  std::size_t entry_count() const noexcept { return entry_count_; }
  /// Number of distinct normalized terms.
  std::size_t size() const noexcept { return terms_.size(); }

  std::vector<std::string> filter(const std::vector<std::string>& tokens) const;

 private:
  std::unordered_set<std::string> terms_;
  std::size_t entry_count_ = 0;
};

}  // namespace ldikit::corpus
