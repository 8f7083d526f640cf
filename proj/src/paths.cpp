#include "latdec/paths.hpp"

#include <cmath>
#include <queue>

#include "latdec/error.hpp"

namespace latdec {

PathCounts count_paths(const Lattice& lattice, std::uint64_t cap) {
  PathCounts pc;
  pc.per_node.assign(lattice.capacity(), 0);
  pc.per_node[lattice.sos().index()] = cap == 0 ? 0 : 1;
  for (NodeId id : lattice.topological_order()) {
    const std::uint64_t here = pc.per_node[id.index()];
    if (here == 0) continue;
    if (lattice.node(id).is_eos) pc.total = saturating_add(pc.total, here, cap);
    for (const Edge& e : lattice.out_edges(id))
      pc.per_node[e.dst.index()] = saturating_add(pc.per_node[e.dst.index()], here, cap);
  }
  return pc;
}

Path make_path(const Lattice& lattice, const std::vector<NodeId>& walk) {
  Path p;
  p.node_ids = walk;
  p.tokens.reserve(walk.size());
  for (std::size_t i = 0; i < walk.size(); ++i) {
    const auto& nd = lattice.node(walk[i]);
    p.tokens.push_back(nd.token);
    if (i > 0) p.total_log_prob += nd.log_prob;
  }
  return p;
}

Path sample_path(const Lattice& lattice, Rng& rng) {
  std::vector<NodeId> walk{lattice.sos()};
  NodeId cur = lattice.sos();
  while (!lattice.node(cur).is_eos) {
    const auto edges = lattice.out_edges(cur);
    if (edges.empty())
      throw StructuralError("sample_path: node " + std::to_string(cur.value) + " has no successors and is not an eos node");
    cur = edges[uniform_index(rng, edges.size())].dst;
    if (!lattice.is_live(cur)) throw StructuralError("sample_path: walked onto a dead node");
    walk.push_back(cur);
  }
  return make_path(lattice, walk);
}

namespace {

void enumerate_from(const Lattice& lattice, std::vector<NodeId>& walk, std::vector<Path>& out, std::size_t limit) {
  if (out.size() >= limit) return;
  const NodeId cur = walk.back();
  if (lattice.node(cur).is_eos) {
    out.push_back(make_path(lattice, walk));
    return;
  }
  for (const Edge& e : lattice.out_edges(cur)) {
    walk.push_back(e.dst);
    enumerate_from(lattice, walk, out, limit);
    walk.pop_back();
    if (out.size() >= limit) return;
  }
}

}  // namespace

std::vector<Path> enumerate_paths(const Lattice& lattice, std::size_t limit) {
  std::vector<Path> out;
  if (limit == 0) return out;
  std::vector<NodeId> walk{lattice.sos()};
  enumerate_from(lattice, walk, out, limit);
  return out;
}

std::vector<Path> k_best_paths(const Lattice& lattice, std::size_t k) {
  std::vector<Path> out;
  if (k == 0) return out;
  constexpr double kNone = -std::numeric_limits<double>::infinity();

  // Best achievable completion score from each node.
  const auto order = lattice.topological_order();
  std::vector<double> best(lattice.capacity(), kNone);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeId id = *it;
    if (lattice.node(id).is_eos) {
      best[id.index()] = 0.0;
      continue;
    }
    for (const Edge& e : lattice.out_edges(id)) {
      if (best[e.dst.index()] == kNone) continue;
      best[id.index()] = std::max(best[id.index()], lattice.node(e.dst).log_prob + best[e.dst.index()]);
    }
  }
  if (best[lattice.sos().index()] == kNone) return out;

  struct Partial {
    NodeId node;
    std::size_t prev;  // index into `partials`, npos for the root
    double prefix = 0.0;
  };
  struct Item {
    double f;
    std::size_t seq;
    std::size_t partial;
    bool operator<(const Item& o) const { return f != o.f ? f < o.f : seq > o.seq; }
  };
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<Partial> partials{{lattice.sos(), npos, 0.0}};
  std::priority_queue<Item> heap;
  std::size_t seq = 0;
  heap.push({best[lattice.sos().index()], seq++, 0});

  while (!heap.empty() && out.size() < k) {
    const Item item = heap.top();
    heap.pop();
    const Partial cur = partials[item.partial];
    if (lattice.node(cur.node).is_eos) {
      std::vector<NodeId> walk;
      for (std::size_t i = item.partial; i != npos; i = partials[i].prev) walk.push_back(partials[i].node);
      std::reverse(walk.begin(), walk.end());
      out.push_back(make_path(lattice, walk));
      continue;
    }
    for (const Edge& e : lattice.out_edges(cur.node)) {
      if (best[e.dst.index()] == kNone) continue;
      const double g = cur.prefix + lattice.node(e.dst).log_prob;
      partials.push_back({e.dst, item.partial, g});
      heap.push({g + best[e.dst.index()], seq++, partials.size() - 1});
    }
  }
  return out;
}

}  // namespace latdec
