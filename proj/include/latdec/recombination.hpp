#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "latdec/lattice.hpp"
#include "latdec/scoring.hpp"

namespace latdec {

enum class RecombStrategy { none, zbeam, rcb, zip };

std::string_view to_string(RecombStrategy s);
std::optional<RecombStrategy> parse_recomb_strategy(std::string_view name);

struct RecombConfig {
  RecombStrategy strategy = RecombStrategy::none;
  std::size_t suffix_n = 4;  // tokens that must match at the end of both prefixes
  std::size_t alpha = 2;     // lengths must differ by less than this

  bool enabled() const { return strategy != RecombStrategy::none; }
  void validate() const;  // ConfigError unless suffix_n >= 1 and alpha >= 1
};

// Merge criterion: the last n generated tokens agree and the lengths differ
// by less than alpha. Arguments are generated tokens (no start token). Too
// short for an n-token suffix means no merge.
bool is_recomb(std::span<const TokenId> a, std::span<const TokenId> b, const RecombConfig& config);
bool is_recomb(const Path& a, const Path& b, const RecombConfig& config);

// Hash index from the last-n-token suffix of a node's canonical path to the
// nodes carrying it, in insertion order. Dead nodes are purged on lookup.
class MergeIndex {
 public:
  explicit MergeIndex(std::size_t suffix_n) : suffix_n_(suffix_n) {}

  // No-op for nodes shallower than n.
  void insert(const Lattice& lattice, NodeId id);

  // Live nodes bearing `key`, insertion ordered.
  std::vector<NodeId> hits(const Lattice& lattice, std::span<const TokenId> key);

  // Earliest-inserted live node other than `popped` whose canonical path
  // passes is_recomb against popped's.
  std::optional<NodeId> find_target(const Lattice& lattice, NodeId popped, const RecombConfig& config);

  std::size_t suffix_n() const { return suffix_n_; }
  std::size_t size() const;

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<TokenId>& key) const noexcept;
  };
  std::optional<std::vector<TokenId>> key_of(const Lattice& lattice, NodeId id) const;

  std::size_t suffix_n_;
  std::unordered_map<std::vector<TokenId>, std::vector<NodeId>, KeyHash> buckets_;
};

struct MergeEvent {
  NodeId popped;
  NodeId target;
  RecombStrategy strategy = RecombStrategy::rcb;
  std::size_t nodes_merged = 0;
  std::size_t successors_deduplicated = 0;
  std::size_t timestamp = 0;  // expansions completed when the merge happened
  bool accepted = false;
  // Canonical token sequences (start token included) before the merge.
  std::vector<TokenId> popped_prefix;
  std::vector<TokenId> target_prefix;
};

nlohmann::json merge_event_to_json(const MergeEvent& e);
MergeEvent merge_event_from_json(const nlohmann::json& j);
std::string merge_events_to_jsonl(std::span<const MergeEvent> events);
std::vector<MergeEvent> merge_events_from_jsonl(std::string_view text);

// Absorbs the freshly materialized `popped` into `target`: a MRG edge from
// popped's GEN parent to target, then popped is removed and routed to target.
// A refused (cycle-closing) edge leaves the lattice untouched and the event
// is returned with accepted = false.
MergeEvent do_recomb_rcb(Lattice& lattice, NodeId popped, NodeId target, std::size_t timestamp);

// Number of still-queued, unexpanded successors of a node.
using PendingSuccessors = std::function<std::size_t(NodeId)>;

// Like RCB, then walks both GEN chains backwards in lockstep while tokens
// agree (up to n pairs in total), folding each popped-side ancestor into its
// target-side partner. A popped-side ancestor is only folded when its sole
// live successor is the chain node below it and nothing merges into it.
// Queued successors of folded nodes are reported via `pending` and become
// stale because their parent is gone.
MergeEvent do_recomb_zip(Lattice& lattice, NodeId popped, NodeId target, const RecombConfig& config,
                         std::size_t timestamp, const PendingSuccessors& pending = {});

// Merge candidates available to beam-local recombination: nodes on the
// canonical paths of the beam being expanded plus the hypotheses already
// accepted into the next beam. Excludes the start node and `popped`.
// Sorted by id.
std::vector<NodeId> zbeam_candidates(const Lattice& lattice, std::span<const NodeId> beam,
                                     std::span<const NodeId> accepted_this_step, NodeId popped);

// Greedy continuation of `prefix` for up to `horizon` tokens (stops after eos).
std::vector<TokenId> greedy_continuation(const ScoringModel& model, std::span<const TokenId> prefix,
                                         std::span<const TokenId> source, std::size_t horizon);

// Share of accepted events whose two pre-merge prefixes have identical greedy
// continuations over `horizon` tokens. std::nullopt without accepted events.
std::optional<double> validate_merges(const ScoringModel& model, std::span<const MergeEvent> events,
                                      std::size_t horizon, std::span<const TokenId> source = {});

}  // namespace latdec
