#include "latdec/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "latdec/error.hpp"

namespace latdec {

bool token_score_before(const TokenScore& a, const TokenScore& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return a.token < b.token;
}

TokenDistribution TokenDistribution::from_entries(std::vector<TokenScore> entries, std::size_t top_k) {
  std::unordered_set<TokenId> seen;
  for (auto& e : entries) {
    if (std::isnan(e.log_prob) || e.log_prob == std::numeric_limits<double>::infinity())
      throw ModelError("distribution entry for token " + std::to_string(e.token) + " is not a log-probability");
    // Rounding in an external model can push log(1) just above zero.
    if (e.log_prob > 0.0) {
      if (e.log_prob > 1e-9)
        throw ModelError("positive log-probability " + std::to_string(e.log_prob) + " for token " +
                         std::to_string(e.token));
      e.log_prob = 0.0;
    }
    if (!seen.insert(e.token).second) throw ModelError("token " + std::to_string(e.token) + " listed twice");
  }
  entries.erase(std::remove_if(entries.begin(), entries.end(),
                               [](const TokenScore& e) { return std::isinf(e.log_prob); }),
                entries.end());
  std::sort(entries.begin(), entries.end(), token_score_before);
  if (entries.size() > top_k) entries.resize(top_k);
  TokenDistribution d;
  d.entries_ = std::move(entries);
  return d;
}

TokenDistribution TokenDistribution::truncated(std::size_t top_k) const {
  TokenDistribution d = *this;
  if (d.entries_.size() > top_k) d.entries_.resize(top_k);
  return d;
}

void BudgetMeter::charge() {
  if (spent_ >= budget_) throw BudgetExhausted();
  ++spent_;
}

}  // namespace latdec
