#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "latdec/lattice.hpp"
#include "latdec/recombination.hpp"
#include "latdec/scoring.hpp"

namespace latdec {

enum class Algorithm { greedy, beam, dbs, nucleus, temperature, bfs };

std::string_view to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

struct SearchConfig {
  Algorithm algorithm = Algorithm::bfs;
  std::size_t beam_size = 4;      // k: beam width, sample count
  std::size_t budget = 0;         // model calls; must be > 0
  std::size_t top_k = kDefaultTopK;
  double length_reward = 0.0;     // lambda, added once per generated token
  double nucleus_p = 0.9;
  double temperature = 1.5;
  std::size_t groups = 0;         // diverse beam groups; 0 means one per beam slot
  double diversity_strength = 1.5;
  std::size_t max_len = 32;       // generated tokens, eos included
  std::uint64_t seed = 0;
  RecombConfig recomb;

  // ConfigError on invalid values or an unsupported algorithm/recombination pairing.
  void validate() const;
  std::size_t effective_groups() const { return groups == 0 ? beam_size : groups; }
};

struct SearchResult {
  Lattice lattice;
  std::string algorithm;
  std::uint64_t completed_paths = 0;  // saturating at the default path cap
  std::size_t expanded = 0;           // model calls made
  std::size_t budget_spent = 0;       // as reported by the meter
  std::vector<NodeId> expanded_nodes; // distinct, in first-expansion order
  std::size_t pruned = 0;             // distinct expanded nodes on no complete path
  std::size_t truncated = 0;          // hypotheses force-completed at the length or budget limit
  std::size_t rejected_merges = 0;
  std::vector<MergeEvent> merges;
  bool budget_exhausted = false;
};

SearchResult decode(const ScoringModel& model, std::span<const TokenId> source, const SearchConfig& config);

SearchResult decode_greedy(const ScoringModel& model, std::span<const TokenId> source, const SearchConfig& config);
SearchResult decode_beam(const ScoringModel& model, std::span<const TokenId> source, const SearchConfig& config);
SearchResult decode_diverse_beam(const ScoringModel& model, std::span<const TokenId> source, const SearchConfig& config);
SearchResult decode_sampling(const ScoringModel& model, std::span<const TokenId> source, const SearchConfig& config);
SearchResult decode_bfs(const ScoringModel& model, std::span<const TokenId> source, const SearchConfig& config);

// Probabilities actually sampled from: temperature-scaled then nucleus-truncated
// and renormalized. Parallel to dist.entries(); truncated entries get 0.
std::vector<double> sampling_weights(const TokenDistribution& dist, double temperature, double nucleus_p);

enum class TaskProfile { translation, summarization, custom };

std::string_view to_string(TaskProfile p);
std::optional<TaskProfile> parse_task_profile(std::string_view name);

struct EffectiveBudget {
  std::size_t beam_size;  // corrected k for baseline decoders
  std::size_t budget;     // k * T
};

// Widens baseline beams so their node expansions match best-first search:
// translation x1.5, summarization x1.25, custom uses `multiplier`.
EffectiveBudget effective_budget(TaskProfile profile, std::size_t k, std::size_t max_len, double multiplier = 1.0);

}  // namespace latdec
