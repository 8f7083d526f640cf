#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "latdec/types.hpp"
#include "latdec/vocabulary.hpp"

namespace latdec {

inline constexpr std::size_t kDefaultTopK = 5;

struct TokenScore {
  TokenId token = 0;
  double log_prob = 0.0;

  friend bool operator==(const TokenScore&, const TokenScore&) = default;
};

// Next-token log-probabilities sorted best first, ties broken by lower token
// id, truncated to a top-k.
class TokenDistribution {
 public:
  TokenDistribution() = default;

  // Validates (finite, non-positive, no repeated tokens), sorts, truncates.
  static TokenDistribution from_entries(std::vector<TokenScore> entries, std::size_t top_k);

  std::span<const TokenScore> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const TokenScore& best() const { return entries_.front(); }
  const TokenScore& operator[](std::size_t i) const { return entries_[i]; }
  TokenDistribution truncated(std::size_t top_k) const;

  friend bool operator==(const TokenDistribution&, const TokenDistribution&) = default;

 private:
  std::vector<TokenScore> entries_;
};

bool token_score_before(const TokenScore& a, const TokenScore& b);

// The generation model p(y_t | y_<t, x). Implementations must be pure
// functions of (prefix, source).
class ScoringModel {
 public:
  virtual ~ScoringModel() = default;

  // `prefix` starts with sos_id().
  virtual TokenDistribution score(std::span<const TokenId> prefix, std::span<const TokenId> source,
                                  std::size_t top_k) const = 0;
  virtual const Vocabulary& vocabulary() const = 0;
  virtual TokenId sos_id() const = 0;
  virtual TokenId eos_id() const = 0;

  std::string token_text(TokenId id) const { return vocabulary().text_of(id); }
};

// Counts model calls against a fixed budget.
class BudgetMeter {
 public:
  explicit BudgetMeter(std::size_t budget) : budget_(budget) {}

  // Throws BudgetExhausted when nothing is left; otherwise records one call.
  void charge();
  std::size_t budget() const { return budget_; }
  std::size_t spent() const { return spent_; }
  std::size_t remaining() const { return budget_ - spent_; }
  bool exhausted() const { return spent_ >= budget_; }

 private:
  std::size_t budget_;
  std::size_t spent_ = 0;
};

// The only path through which search code reaches a model.
class MeteredScorer {
 public:
  MeteredScorer(const ScoringModel& model, BudgetMeter& meter, std::span<const TokenId> source, std::size_t top_k)
      : model_(model), meter_(meter), source_(source), top_k_(top_k) {}

  TokenDistribution score(std::span<const TokenId> prefix) {
    meter_.charge();
    return model_.score(prefix, source_, top_k_);
  }

  const ScoringModel& model() const { return model_; }
  BudgetMeter& meter() { return meter_; }
  std::span<const TokenId> source() const { return source_; }
  std::size_t top_k() const { return top_k_; }

 private:
  const ScoringModel& model_;
  BudgetMeter& meter_;
  std::span<const TokenId> source_;
  std::size_t top_k_;
};

}  // namespace latdec
