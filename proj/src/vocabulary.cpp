#include "latdec/vocabulary.hpp"

#include <cctype>

namespace latdec {

Vocabulary::Vocabulary(std::vector<std::string> words) {
  for (const auto& w : words) add(w);
}

TokenId Vocabulary::add(std::string_view word) {
  if (const TokenId existing = id_of(word); existing != kUnknownToken) return existing;
  const auto id = static_cast<TokenId>(words_.size());
  words_.emplace_back(word);
  ids_.emplace(words_.back(), id);
  return id;
}

TokenId Vocabulary::id_of(std::string_view word) const {
  const auto it = ids_.find(std::string(word));
  return it == ids_.end() ? kUnknownToken : it->second;
}

std::string Vocabulary::text_of(TokenId id) const {
  if (id >= 0 && static_cast<std::size_t>(id) < words_.size()) return words_[static_cast<std::size_t>(id)];
  return "<" + std::to_string(id) + ">";
}

std::vector<TokenId> Vocabulary::encode(std::string_view line) const {
  std::vector<TokenId> ids;
  for (const auto& w : split_whitespace(line)) ids.push_back(id_of(w));
  return ids;
}

std::vector<std::string> split_whitespace(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace latdec
