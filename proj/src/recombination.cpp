#include "latdec/recombination.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "latdec/error.hpp"

namespace latdec {

using nlohmann::json;

std::string_view to_string(RecombStrategy s) {
  switch (s) {
    case RecombStrategy::none: return "none";
    case RecombStrategy::zbeam: return "zbeam";
    case RecombStrategy::rcb: return "rcb";
    case RecombStrategy::zip: return "zip";
  }
  return "none";
}

std::optional<RecombStrategy> parse_recomb_strategy(std::string_view name) {
  for (auto s : {RecombStrategy::none, RecombStrategy::zbeam, RecombStrategy::rcb, RecombStrategy::zip})
    if (to_string(s) == name) return s;
  return std::nullopt;
}

void RecombConfig::validate() const {
  if (suffix_n < 1) throw ConfigError("suffix length n must be at least 1");
  if (alpha < 1) throw ConfigError("length tolerance alpha must be at least 1");
}

bool is_recomb(std::span<const TokenId> a, std::span<const TokenId> b, const RecombConfig& config) {
  const std::size_t n = config.suffix_n;
  if (n == 0 || a.size() < n || b.size() < n) return false;
  const std::size_t diff = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
  if (diff >= config.alpha) return false;
  return std::equal(a.end() - static_cast<std::ptrdiff_t>(n), a.end(), b.end() - static_cast<std::ptrdiff_t>(n));
}

bool is_recomb(const Path& a, const Path& b, const RecombConfig& config) {
  return is_recomb(a.generated(), b.generated(), config);
}

// ---- MergeIndex ---------------------------------------------------------------

std::size_t MergeIndex::KeyHash::operator()(const std::vector<TokenId>& key) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (TokenId t : key) {
    h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(t));
    h *= 1099511628211ULL;
  }
  return h;
}

std::optional<std::vector<TokenId>> MergeIndex::key_of(const Lattice& lattice, NodeId id) const {
  const auto& nd = lattice.node(id);
  if (nd.depth < suffix_n_) return std::nullopt;
  std::vector<TokenId> key(suffix_n_);
  NodeId cur = id;
  for (std::size_t i = suffix_n_; i-- > 0;) {
    key[i] = lattice.node(cur).token;
    cur = lattice.node(cur).gen_parent;
  }
  return key;
}

void MergeIndex::insert(const Lattice& lattice, NodeId id) {
  if (auto key = key_of(lattice, id)) buckets_[std::move(*key)].push_back(id);
}

std::vector<NodeId> MergeIndex::hits(const Lattice& lattice, std::span<const TokenId> key) {
  const auto it = buckets_.find(std::vector<TokenId>(key.begin(), key.end()));
  if (it == buckets_.end()) return {};
  auto& ids = it->second;
  ids.erase(std::remove_if(ids.begin(), ids.end(), [&](NodeId id) { return !lattice.is_live(id); }), ids.end());
  return ids;
}

std::optional<NodeId> MergeIndex::find_target(const Lattice& lattice, NodeId popped, const RecombConfig& config) {
  const auto key = key_of(lattice, popped);
  if (!key) return std::nullopt;
  const auto depth = lattice.node(popped).depth;
  for (NodeId id : hits(lattice, *key)) {
    if (id == popped) continue;
    const auto d = lattice.node(id).depth;
    if ((d > depth ? d - depth : depth - d) < config.alpha) return id;
  }
  return std::nullopt;
}

std::size_t MergeIndex::size() const {
  std::size_t n = 0;
  for (const auto& [k, v] : buckets_) n += v.size();
  return n;
}

// ---- events -------------------------------------------------------------------

json merge_event_to_json(const MergeEvent& e) {
  return {{"popped", e.popped.value},
          {"target", e.target.value},
          {"strategy", std::string(to_string(e.strategy))},
          {"nodes_merged", e.nodes_merged},
          {"successors_deduplicated", e.successors_deduplicated},
          {"timestamp", e.timestamp},
          {"accepted", e.accepted},
          {"popped_prefix", e.popped_prefix},
          {"target_prefix", e.target_prefix}};
}

MergeEvent merge_event_from_json(const json& j) {
  MergeEvent e;
  try {
    e.popped = NodeId{j.at("popped").get<std::uint32_t>()};
    e.target = NodeId{j.at("target").get<std::uint32_t>()};
    const auto s = parse_recomb_strategy(j.at("strategy").get<std::string>());
    if (!s) throw ParseError("unknown merge strategy", 0);
    e.strategy = *s;
    e.nodes_merged = j.at("nodes_merged").get<std::size_t>();
    e.successors_deduplicated = j.at("successors_deduplicated").get<std::size_t>();
    e.timestamp = j.at("timestamp").get<std::size_t>();
    e.accepted = j.at("accepted").get<bool>();
    e.popped_prefix = j.at("popped_prefix").get<std::vector<TokenId>>();
    e.target_prefix = j.at("target_prefix").get<std::vector<TokenId>>();
  } catch (const json::exception& ex) {
    throw ParseError(std::string("invalid merge event: ") + ex.what(), 0);
  }
  return e;
}

std::string merge_events_to_jsonl(std::span<const MergeEvent> events) {
  std::string out;
  for (const auto& e : events) {
    out += merge_event_to_json(e).dump();
    out += '\n';
  }
  return out;
}

std::vector<MergeEvent> merge_events_from_jsonl(std::string_view text) {
  std::vector<MergeEvent> events;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = text.substr(pos, nl - pos);
    if (!line.empty()) {
      try {
        events.push_back(merge_event_from_json(json::parse(line)));
      } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed merge event line: ") + e.what(), pos + e.byte);
      }
    }
    pos = nl + 1;
  }
  return events;
}

// ---- doRecomb -------------------------------------------------------------------

namespace {

MergeEvent start_event(const Lattice& lattice, NodeId popped, NodeId target, RecombStrategy strategy,
                       std::size_t timestamp, const RecombConfig& config) {
  if (!lattice.is_live(popped) || !lattice.is_live(target) || popped == target)
    throw StructuralError("merge needs two distinct live nodes");
  if (popped == lattice.sos()) throw StructuralError("the start node cannot be merged away");
  if (!lattice.out_edges(popped).empty()) throw StructuralError("merged-away node must not have successors yet");
  MergeEvent e;
  e.popped = popped;
  e.target = target;
  e.strategy = strategy;
  e.timestamp = timestamp;
  e.popped_prefix = lattice.canonical_tokens(popped);
  e.target_prefix = lattice.canonical_tokens(target);
  const std::span<const TokenId> a(e.popped_prefix), b(e.target_prefix);
  if (!is_recomb(a.subspan(1), b.subspan(1), config))
    throw StructuralError("merge requested between nodes that fail the merge criterion");
  return e;
}

}  // namespace

MergeEvent do_recomb_rcb(Lattice& lattice, NodeId popped, NodeId target, std::size_t timestamp) {
  // The criterion check here only needs the last token and any length gap.
  RecombConfig loose{RecombStrategy::rcb, 1, std::numeric_limits<std::size_t>::max()};
  MergeEvent e = start_event(lattice, popped, target, RecombStrategy::rcb, timestamp, loose);
  const NodeId anchor = lattice.node(popped).gen_parent;
  if (!lattice.add_mrg_edge(anchor, target)) return e;
  lattice.remove_subtree(popped, target);
  e.accepted = true;
  e.nodes_merged = 1;
  return e;
}

MergeEvent do_recomb_zip(Lattice& lattice, NodeId popped, NodeId target, const RecombConfig& config,
                         std::size_t timestamp, const PendingSuccessors& pending) {
  MergeEvent e = start_event(lattice, popped, target, RecombStrategy::zip, timestamp, config);

  const auto popped_path = lattice.canonical_path(popped).node_ids;
  const auto target_path = lattice.canonical_path(target).node_ids;
  const std::unordered_set<NodeId> on_popped_path(popped_path.begin(), popped_path.end());
  const std::unordered_set<NodeId> on_target_path(target_path.begin(), target_path.end());

  std::vector<NodeId> mine{popped};
  std::vector<NodeId> theirs{target};
  while (mine.size() < config.suffix_n) {
    const NodeId p = lattice.node(mine.back()).gen_parent;
    const NodeId q = lattice.node(theirs.back()).gen_parent;
    if (p == lattice.sos() || q == lattice.sos() || p == q) break;
    if (lattice.node(p).token != lattice.node(q).token) break;
    if (on_target_path.contains(p) || on_popped_path.contains(q)) break;
    if (lattice.node(p).is_eos) break;
    const auto out = lattice.out_edges(p);
    if (out.size() != 1 || out[0].dst != mine.back()) break;
    const auto in = lattice.in_edges(p);
    if (std::any_of(in.begin(), in.end(), [](const Edge& x) { return x.kind == EdgeKind::mrg; })) break;
    mine.push_back(p);
    theirs.push_back(q);
  }

  const NodeId root = mine.back();
  const NodeId anchor = lattice.node(root).gen_parent;
  if (!lattice.add_mrg_edge(anchor, theirs.back())) return e;

  if (pending)
    for (std::size_t i = 1; i < mine.size(); ++i) e.successors_deduplicated += pending(mine[i]);

  lattice.remove_subtree(root, [&](NodeId id) {
    for (std::size_t i = 0; i < mine.size(); ++i)
      if (mine[i] == id) return theirs[i];
    return target;
  });
  e.accepted = true;
  e.nodes_merged = mine.size();
  return e;
}

std::vector<NodeId> zbeam_candidates(const Lattice& lattice, std::span<const NodeId> beam,
                                     std::span<const NodeId> accepted_this_step, NodeId popped) {
  std::vector<NodeId> out;
  for (NodeId h : beam) {
    if (!lattice.is_live(h)) continue;
    for (NodeId id : lattice.canonical_path(h).node_ids) out.push_back(id);
  }
  for (NodeId h : accepted_this_step)
    if (lattice.is_live(h)) out.push_back(h);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  out.erase(std::remove_if(out.begin(), out.end(), [&](NodeId id) { return id == lattice.sos() || id == popped; }),
            out.end());
  return out;
}

// ---- validation -----------------------------------------------------------------

std::vector<TokenId> greedy_continuation(const ScoringModel& model, std::span<const TokenId> prefix,
                                         std::span<const TokenId> source, std::size_t horizon) {
  std::vector<TokenId> seq(prefix.begin(), prefix.end());
  std::vector<TokenId> cont;
  for (std::size_t i = 0; i < horizon; ++i) {
    if (!seq.empty() && seq.back() == model.eos_id() && seq.size() > 1) break;
    const auto dist = model.score(seq, source, 1);
    if (dist.empty()) break;
    cont.push_back(dist.best().token);
    seq.push_back(dist.best().token);
  }
  return cont;
}

std::optional<double> validate_merges(const ScoringModel& model, std::span<const MergeEvent> events,
                                      std::size_t horizon, std::span<const TokenId> source) {
  std::size_t total = 0;
  std::size_t same = 0;
  for (const auto& e : events) {
    if (!e.accepted) continue;
    ++total;
    if (greedy_continuation(model, e.popped_prefix, source, horizon) ==
        greedy_continuation(model, e.target_prefix, source, horizon))
      ++same;
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(same) / static_cast<double>(total);
}

}  // namespace latdec
