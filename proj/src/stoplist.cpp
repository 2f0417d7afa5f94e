#include <istream>
#include <sstream>

#include "ldikit/text.hpp"

namespace ldikit::corpus {

namespace detail {
extern const std::string_view kSmartStopListText;
}

const StopList& StopList::smart() {
  static const StopList list = [] {
    std::istringstream in{std::string(detail::kSmartStopListText)};
    return from_stream(in);
  }();
  return list;
}

StopList StopList::from_stream(std::istream& in) {
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) words.push_back(line);
  }
  return from_words(words);
}

StopList StopList::from_words(const std::vector<std::string>& words) {
  StopList list;
  for (const auto& w : words) {
    ++list.entry_count_;
    auto norm = normalize_term(w);
    if (!norm.empty()) list.terms_.insert(std::move(norm));
  }
  return list;
}

bool StopList::contains(std::string_view token) const {
  return terms_.contains(std::string(token));
}

std::vector<std::string> StopList::filter(const std::vector<std::string>& tokens) const {
  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!contains(t)) kept.push_back(t);
  }
  return kept;
}

}  // namespace ldikit::corpus
