#pragma once

#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "latdec/scoring.hpp"

namespace latdec {

inline constexpr const char* kSosText = "<s>";
inline constexpr const char* kEosText = "</s>";

// Order-r Markov chain over whitespace tokens with add-delta smoothing.
// Its next-token distribution depends only on the last r tokens, which makes
// two prefixes sharing an r-token suffix exactly interchangeable.
class MarkovModel final : public ScoringModel {
 public:
  // One sequence per line. Throws ConfigError on an empty corpus or order < 1.
  static MarkovModel train(std::istream& corpus, int order, double smoothing);
  static MarkovModel train(const std::vector<std::vector<std::string>>& sentences, int order, double smoothing);

  TokenDistribution score(std::span<const TokenId> prefix, std::span<const TokenId> source,
                          std::size_t top_k) const override;
  const Vocabulary& vocabulary() const override { return vocab_; }
  TokenId sos_id() const override { return 0; }
  TokenId eos_id() const override { return 1; }

  int order() const { return order_; }
  double smoothing() const { return smoothing_; }
  // P(next | last `order` tokens of prefix), not log-scaled.
  double probability(std::span<const TokenId> prefix, TokenId next) const;

 private:
  MarkovModel() = default;
  std::vector<TokenId> context_of(std::span<const TokenId> prefix) const;
  const std::vector<TokenScore>& row_for(std::span<const TokenId> prefix) const;

  Vocabulary vocab_;
  int order_ = 1;
  double smoothing_ = 0.0;
  std::map<std::vector<TokenId>, std::vector<TokenScore>> rows_;  // sorted log-prob rows
  std::vector<TokenScore> uniform_;
};

// Explicit prefix -> distribution map with a fallback row, for hand-built
// test cases and small fixtures.
class TableModel final : public ScoringModel {
 public:
  // Vocabulary must contain the sos and eos tokens.
  TableModel(Vocabulary vocab, TokenId sos, TokenId eos, std::vector<TokenScore> default_row);
  // Convenience: vocabulary "<s>", "</s>", then `words`.
  static TableModel with_words(const std::vector<std::string>& words, std::vector<TokenScore> default_row = {});

  // `prefix` includes the sos token.
  void set(std::vector<TokenId> prefix, std::vector<TokenScore> row);
  void set_default(std::vector<TokenScore> row);
  TokenId id(std::string_view word) const;

  TokenDistribution score(std::span<const TokenId> prefix, std::span<const TokenId> source,
                          std::size_t top_k) const override;
  const Vocabulary& vocabulary() const override { return vocab_; }
  TokenId sos_id() const override { return sos_; }
  TokenId eos_id() const override { return eos_; }

  std::size_t entry_count() const { return table_.size(); }

  // {"vocab":[...], "sos":0, "eos":1, "default":[[id,lp],...],
  //  "entries":[{"prefix":[ids], "dist":[[id,lp],...]}]}
  static TableModel from_json(std::string_view text);
  std::string to_json() const;

 private:
  static std::vector<TokenScore> sorted_row(std::vector<TokenScore> row);

  Vocabulary vocab_;
  TokenId sos_;
  TokenId eos_;
  std::vector<TokenScore> default_row_;
  std::map<std::vector<TokenId>, std::vector<TokenScore>> table_;
};

}  // namespace latdec
