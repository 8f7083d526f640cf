#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "latdec/types.hpp"

namespace latdec {

// Bidirectional token table. Ids are dense in insertion order.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> words);

  TokenId add(std::string_view word);
  TokenId id_of(std::string_view word) const;  // kUnknownToken when absent
  bool contains(std::string_view word) const { return id_of(word) != kUnknownToken; }
  std::string text_of(TokenId id) const;
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  // Whitespace tokenization; unknown words become kUnknownToken.
  std::vector<TokenId> encode(std::string_view line) const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> ids_;
};

std::vector<std::string> split_whitespace(std::string_view line);

}  // namespace latdec
