#include "latdec/lattice.hpp"

#include <algorithm>
#include <queue>
#include <string>
#include <unordered_set>

#include "latdec/error.hpp"

namespace latdec {

namespace {

std::string id_str(NodeId id) { return id.valid() ? std::to_string(id.value) : std::string("<none>"); }

}  // namespace

Lattice::Lattice(TokenId sos_token, std::string sos_text, TokenId eos_token) : eos_token_(eos_token) {
  LatticeNode sos;
  sos.id = NodeId{0};
  sos.token = sos_token;
  sos.text = std::move(sos_text);
  nodes_.push_back(std::move(sos));
  out_.emplace_back();
  in_.emplace_back();
  remap_.grow(1);
  live_count_ = 1;
}

void Lattice::require_mutable() const {
  if (sealed_) throw StructuralError("lattice is sealed");
}

void Lattice::require_live(NodeId id, const char* what) const {
  if (!is_live(id)) throw StructuralError(std::string(what) + ": node " + id_str(id) + " is not a live node");
}

NodeId Lattice::resolve(NodeId id) const {
  if (!contains(id)) throw StructuralError("unknown node id " + id_str(id));
  return NodeId{remap_.find(id.value)};
}

const LatticeNode& Lattice::node(NodeId id) const {
  if (!contains(id)) throw StructuralError("unknown node id " + id_str(id));
  return nodes_[id.index()];
}

std::span<const Edge> Lattice::out_edges(NodeId id) const {
  if (!contains(id)) throw StructuralError("unknown node id " + id_str(id));
  return out_[id.index()];
}

std::span<const Edge> Lattice::in_edges(NodeId id) const {
  if (!contains(id)) throw StructuralError("unknown node id " + id_str(id));
  return in_[id.index()];
}

std::optional<NodeId> Lattice::find_gen_child(NodeId parent, TokenId token) const {
  for (const Edge& e : out_edges(parent)) {
    if (e.kind == EdgeKind::gen && nodes_[e.dst.index()].token == token) return e.dst;
  }
  return std::nullopt;
}

std::size_t Lattice::gen_child_count(NodeId id) const {
  const auto edges = out_edges(id);
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [](const Edge& e) { return e.kind == EdgeKind::gen; }));
}

bool Lattice::has_edge(NodeId src, NodeId dst) const {
  const auto edges = out_edges(src);
  return std::any_of(edges.begin(), edges.end(), [&](const Edge& e) { return e.dst == dst; });
}

std::size_t Lattice::edge_count() const {
  std::size_t n = 0;
  for (const auto& v : out_) n += v.size();
  return n;
}

std::size_t Lattice::mrg_edge_count() const {
  std::size_t n = 0;
  for (const auto& v : out_)
    n += static_cast<std::size_t>(
        std::count_if(v.begin(), v.end(), [](const Edge& e) { return e.kind == EdgeKind::mrg; }));
  return n;
}

std::vector<NodeId> Lattice::live_nodes() const {
  std::vector<NodeId> ids;
  ids.reserve(live_count_);
  for (const auto& n : nodes_)
    if (n.live) ids.push_back(n.id);
  return ids;
}

std::vector<NodeId> Lattice::eos_nodes() const {
  std::vector<NodeId> ids;
  for (const auto& n : nodes_)
    if (n.live && n.is_eos) ids.push_back(n.id);
  return ids;
}

void Lattice::insert_edge(const Edge& e) {
  out_[e.src.index()].push_back(e);
  in_[e.dst.index()].push_back(e);
}

void Lattice::erase_edge(NodeId src, NodeId dst) {
  auto& out = out_[src.index()];
  out.erase(std::remove_if(out.begin(), out.end(), [&](const Edge& e) { return e.dst == dst; }), out.end());
  auto& in = in_[dst.index()];
  in.erase(std::remove_if(in.begin(), in.end(), [&](const Edge& e) { return e.src == src; }), in.end());
}

NodeId Lattice::add_gen_child(NodeId parent, TokenId token, std::string text, double log_prob, bool is_eos) {
  require_mutable();
  if (!contains(parent)) throw StructuralError("add_gen_child: unknown parent id " + id_str(parent));
  parent = resolve(parent);
  require_live(parent, "add_gen_child");

  const NodeId id{static_cast<std::uint32_t>(nodes_.size())};
  LatticeNode n;
  n.id = id;
  n.token = token;
  n.text = std::move(text);
  n.log_prob = log_prob;
  n.is_eos = is_eos;
  n.depth = nodes_[parent.index()].depth + 1;
  n.gen_parent = parent;
  nodes_.push_back(std::move(n));
  out_.emplace_back();
  in_.emplace_back();
  remap_.grow(nodes_.size());
  ++live_count_;
  insert_edge(Edge{parent, id, EdgeKind::gen});
  debug_verify();
  return id;
}

bool Lattice::add_mrg_edge(NodeId src, NodeId dst) {
  require_mutable();
  src = resolve(src);
  dst = resolve(dst);
  require_live(src, "add_mrg_edge");
  require_live(dst, "add_mrg_edge");
  if (has_edge(src, dst)) return true;
  if (src == dst || reaches(dst, src)) {
    ++rejected_merges_;
    return false;
  }
  insert_edge(Edge{src, dst, EdgeKind::mrg});
  debug_verify();
  return true;
}

std::size_t Lattice::remove_subtree(NodeId root, NodeId representative) {
  return remove_subtree(root, [representative](NodeId) { return representative; });
}

std::size_t Lattice::remove_subtree(NodeId root, const std::function<NodeId(NodeId)>& representative_of) {
  require_mutable();
  require_live(root, "remove_subtree");
  if (root == sos()) throw StructuralError("remove_subtree: the start node cannot be removed");

  // Collect root and its GEN descendants.
  std::vector<NodeId> doomed{root};
  std::vector<char> in_subtree(nodes_.size(), 0);
  in_subtree[root.index()] = 1;
  for (std::size_t i = 0; i < doomed.size(); ++i) {
    for (const Edge& e : out_[doomed[i].index()]) {
      if (e.kind == EdgeKind::gen && !in_subtree[e.dst.index()]) {
        in_subtree[e.dst.index()] = 1;
        doomed.push_back(e.dst);
      }
    }
  }

  std::vector<NodeId> reps;
  reps.reserve(doomed.size());
  std::vector<NodeId> rep_at(nodes_.size());
  for (NodeId d : doomed) {
    NodeId rep = resolve(representative_of(d));
    if (!is_live(rep) || in_subtree[rep.index()])
      throw StructuralError("remove_subtree: representative " + id_str(rep) + " of node " + id_str(d) +
                            " is not a surviving node");
    reps.push_back(rep);
    rep_at[d.index()] = rep;
  }
  auto rep_of = [&](NodeId x) { return in_subtree[x.index()] ? rep_at[x.index()] : x; };

  // Detach every edge touching the subtree, remembering MRG edges to re-route.
  std::vector<Edge> reroute;
  for (NodeId d : doomed) {
    for (const Edge& e : std::vector<Edge>(out_[d.index()])) {
      if (e.kind == EdgeKind::mrg) reroute.push_back(e);
      erase_edge(e.src, e.dst);
    }
    for (const Edge& e : std::vector<Edge>(in_[d.index()])) {
      if (e.kind == EdgeKind::mrg) reroute.push_back(e);
      erase_edge(e.src, e.dst);
    }
  }

  for (std::size_t i = 0; i < doomed.size(); ++i) {
    nodes_[doomed[i].index()].live = false;
    remap_.redirect(doomed[i].value, reps[i].value);
  }
  live_count_ -= doomed.size();

  for (const Edge& e : reroute) {
    const NodeId s = rep_of(e.src);
    const NodeId d = rep_of(e.dst);
    if (s == d || has_edge(s, d) || reaches(d, s)) continue;
    insert_edge(Edge{s, d, EdgeKind::mrg});
  }
  debug_verify();
  return doomed.size();
}

std::size_t Lattice::prune_to_complete() {
  require_mutable();
  const std::size_t n = nodes_.size();
  std::vector<char> fwd(n, 0), bwd(n, 0);
  std::vector<NodeId> stack{sos()};
  fwd[0] = 1;
  while (!stack.empty()) {
    const NodeId x = stack.back();
    stack.pop_back();
    for (const Edge& e : out_[x.index()])
      if (!fwd[e.dst.index()]) {
        fwd[e.dst.index()] = 1;
        stack.push_back(e.dst);
      }
  }
  for (const auto& nd : nodes_)
    if (nd.live && nd.is_eos) {
      bwd[nd.id.index()] = 1;
      stack.push_back(nd.id);
    }
  while (!stack.empty()) {
    const NodeId x = stack.back();
    stack.pop_back();
    for (const Edge& e : in_[x.index()])
      if (!bwd[e.src.index()]) {
        bwd[e.src.index()] = 1;
        stack.push_back(e.src);
      }
  }
  std::size_t removed = 0;
  for (auto& nd : nodes_) {
    if (!nd.live || nd.id == sos()) continue;
    if (fwd[nd.id.index()] && bwd[nd.id.index()]) continue;
    for (const Edge& e : std::vector<Edge>(out_[nd.id.index()])) erase_edge(e.src, e.dst);
    for (const Edge& e : std::vector<Edge>(in_[nd.id.index()])) erase_edge(e.src, e.dst);
    nd.live = false;
    ++removed;
  }
  live_count_ -= removed;
  debug_verify();
  return removed;
}

void Lattice::set_eos(NodeId id, bool is_eos) {
  require_mutable();
  require_live(id, "set_eos");
  nodes_[id.index()].is_eos = is_eos;
}

Path Lattice::canonical_path(NodeId id) const {
  require_live(id, "canonical_path");
  Path p;
  for (NodeId cur = id; cur.valid(); cur = nodes_[cur.index()].gen_parent) {
    p.node_ids.push_back(cur);
    p.tokens.push_back(nodes_[cur.index()].token);
    p.total_log_prob += nodes_[cur.index()].log_prob;
  }
  std::reverse(p.node_ids.begin(), p.node_ids.end());
  std::reverse(p.tokens.begin(), p.tokens.end());
  return p;
}

std::vector<TokenId> Lattice::canonical_tokens(NodeId id) const {
  require_live(id, "canonical_tokens");
  std::vector<TokenId> toks(nodes_[id.index()].depth + 1);
  std::size_t i = toks.size();
  for (NodeId cur = id; cur.valid(); cur = nodes_[cur.index()].gen_parent) toks[--i] = nodes_[cur.index()].token;
  return toks;
}

bool Lattice::reaches(NodeId from, NodeId to) const {
  if (from == to) return true;
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<NodeId> stack{from};
  seen[from.index()] = 1;
  while (!stack.empty()) {
    const NodeId x = stack.back();
    stack.pop_back();
    for (const Edge& e : out_[x.index()]) {
      if (e.dst == to) return true;
      if (!seen[e.dst.index()]) {
        seen[e.dst.index()] = 1;
        stack.push_back(e.dst);
      }
    }
  }
  return false;
}

std::vector<NodeId> Lattice::topological_order() const {
  std::vector<std::size_t> indeg(nodes_.size(), 0);
  for (const auto& nd : nodes_)
    if (nd.live) indeg[nd.id.index()] = in_[nd.id.index()].size();
  std::vector<NodeId> order;
  order.reserve(live_count_);
  for (const auto& nd : nodes_)
    if (nd.live && indeg[nd.id.index()] == 0) order.push_back(nd.id);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (const Edge& e : out_[order[i].index()])
      if (--indeg[e.dst.index()] == 0) order.push_back(e.dst);
  }
  if (order.size() != live_count_) throw StructuralError("lattice contains a cycle");
  return order;
}

void Lattice::check_invariants() const {
  if (!is_live(sos())) throw StructuralError("start node is not live");
  if (!in_[0].empty()) throw StructuralError("start node has incoming edges");
  std::size_t live = 0;
  for (const auto& nd : nodes_) {
    const std::size_t i = nd.id.index();
    if (!nd.live) {
      if (!out_[i].empty() || !in_[i].empty()) throw StructuralError("dead node " + id_str(nd.id) + " has edges");
      continue;
    }
    ++live;
    for (const Edge& e : out_[i])
      if (e.src != nd.id || !is_live(e.dst))
        throw StructuralError("edge from " + id_str(nd.id) + " points at a dead or foreign node");
    if (nd.id == sos()) continue;
    std::size_t gen_in = 0;
    for (const Edge& e : in_[i]) {
      if (e.kind != EdgeKind::gen) continue;
      ++gen_in;
      if (e.src != nd.gen_parent) throw StructuralError("GEN edge into " + id_str(nd.id) + " is not from its parent");
    }
    if (gen_in != 1)
      throw StructuralError("node " + id_str(nd.id) + " has " + std::to_string(gen_in) + " incoming GEN edges");
    if (!is_live(nd.gen_parent)) throw StructuralError("node " + id_str(nd.id) + " has a dead GEN parent");
    if (nd.depth != nodes_[nd.gen_parent.index()].depth + 1)
      throw StructuralError("node " + id_str(nd.id) + " has inconsistent depth");
    if (!remap_.is_root(nd.id.value)) throw StructuralError("live node " + id_str(nd.id) + " is remapped");
  }
  if (live != live_count_) throw StructuralError("live-node count out of sync");
  (void)topological_order();
}

void Lattice::debug_verify() const {
#ifdef LATDEC_DEBUG_INVARIANTS
  check_invariants();
#endif
}

Lattice Lattice::from_parts(std::vector<RawNode> nodes, std::vector<Edge> edges,
                            std::vector<std::pair<NodeId, NodeId>> remap, TokenId eos_token) {
  std::uint32_t max_id = 0;
  for (const auto& n : nodes) max_id = std::max(max_id, n.id.value);
  for (const auto& [from, to] : remap) max_id = std::max({max_id, from.value, to.value});

  Lattice lat;
  lat.eos_token_ = eos_token;
  const std::size_t n = static_cast<std::size_t>(max_id) + 1;
  lat.nodes_.assign(n, LatticeNode{});
  for (std::size_t i = 0; i < n; ++i) {
    lat.nodes_[i].id = NodeId{static_cast<std::uint32_t>(i)};
    lat.nodes_[i].live = false;
  }
  lat.out_.assign(n, {});
  lat.in_.assign(n, {});
  lat.remap_ = UnionFind(n);
  lat.live_count_ = 0;

  std::vector<char> seen(n, 0);
  for (auto& r : nodes) {
    if (seen[r.id.index()]) throw StructuralError("duplicate node id " + id_str(r.id));
    seen[r.id.index()] = 1;
    auto& nd = lat.nodes_[r.id.index()];
    nd.token = r.token;
    nd.text = std::move(r.text);
    nd.log_prob = r.log_prob;
    nd.is_eos = r.is_eos;
    nd.depth = r.depth;
    nd.live = true;
    ++lat.live_count_;
  }
  if (!lat.is_live(lat.sos())) throw StructuralError("start node 0 missing");
  for (const Edge& e : edges) {
    if (!lat.is_live(e.src) || !lat.is_live(e.dst))
      throw StructuralError("edge " + id_str(e.src) + "->" + id_str(e.dst) + " references a missing node");
    if (e.kind == EdgeKind::gen) {
      auto& child = lat.nodes_[e.dst.index()];
      if (child.gen_parent.valid()) throw StructuralError("node " + id_str(e.dst) + " has two GEN parents");
      child.gen_parent = e.src;
    }
    lat.insert_edge(e);
  }
  for (const auto& [from, to] : remap) {
    if (lat.is_live(from)) throw StructuralError("live node " + id_str(from) + " cannot be remapped");
    lat.remap_.redirect(from.value, to.value);
  }
  lat.check_invariants();
  return lat;
}

std::vector<std::pair<NodeId, NodeId>> Lattice::remap_pairs() const {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (const auto& nd : nodes_) {
    if (nd.live) continue;
    const NodeId to = resolve(nd.id);
    if (to != nd.id) pairs.emplace_back(nd.id, to);
  }
  return pairs;
}

bool operator==(const Lattice& a, const Lattice& b) {
  if (a.eos_token_ != b.eos_token_ || a.live_nodes() != b.live_nodes()) return false;
  for (NodeId id : a.live_nodes()) {
    const auto& x = a.nodes_[id.index()];
    const auto& y = b.nodes_[id.index()];
    if (x.token != y.token || x.text != y.text || x.log_prob != y.log_prob || x.is_eos != y.is_eos ||
        x.depth != y.depth || x.gen_parent != y.gen_parent)
      return false;
    auto ea = a.out_[id.index()];
    auto eb = b.out_[id.index()];
    auto key = [](const Edge& e) { return std::pair{e.dst.value, static_cast<int>(e.kind)}; };
    auto cmp = [&](const Edge& l, const Edge& r) { return key(l) < key(r); };
    std::sort(ea.begin(), ea.end(), cmp);
    std::sort(eb.begin(), eb.end(), cmp);
    if (ea != eb) return false;
  }
  return a.remap_pairs() == b.remap_pairs();
}

}  // namespace latdec
