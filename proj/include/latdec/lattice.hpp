#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latdec/types.hpp"
#include "latdec/union_find.hpp"

namespace latdec {

enum class EdgeKind : std::uint8_t { gen, mrg };

struct Edge {
  NodeId src;
  NodeId dst;
  EdgeKind kind = EdgeKind::gen;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct LatticeNode {
  NodeId id;
  TokenId token = 0;
  std::string text;
  // Natural-log probability of `token` given the node's canonical prefix.
  double log_prob = 0.0;
  bool is_eos = false;
  std::uint32_t depth = 0;
  NodeId gen_parent;  // kNoNode for the start node
  bool live = true;
};

// A walk through the lattice. `tokens` runs parallel to `node_ids`, so
// tokens[0] is the start token.
struct Path {
  std::vector<NodeId> node_ids;
  std::vector<TokenId> tokens;
  double total_log_prob = 0.0;

  std::size_t length() const { return tokens.empty() ? 0 : tokens.size() - 1; }
  std::span<const TokenId> generated() const {
    return tokens.empty() ? std::span<const TokenId>{} : std::span<const TokenId>(tokens).subspan(1);
  }
};

// Token lattice with GEN edges forming a tree rooted at the start node and
// MRG edges added by recombination. Every live node other than the start node
// has exactly one incoming GEN edge, so its canonical (GEN-only) path is
// unique. Removed nodes are tombstoned and resolve to their survivor through
// a union-find; ids are never reused.
//
// Single writer. Readers may run concurrently between mutations.
class Lattice {
 public:
  explicit Lattice(TokenId sos_token = 0, std::string sos_text = "<s>", TokenId eos_token = 1);

  NodeId sos() const { return NodeId{0}; }
  TokenId eos_token() const { return eos_token_; }

  // Creates a node under `parent` joined by a GEN edge.
  NodeId add_gen_child(NodeId parent, TokenId token, std::string text, double log_prob, bool is_eos = false);

  // Adds a MRG edge unless it would close a cycle. Returns false (and bumps
  // rejected_merges) when the edge was refused. An already-present edge
  // counts as accepted.
  bool add_mrg_edge(NodeId src, NodeId dst);

  // Removes `root` and all its GEN descendants. Each removed node is routed to
  // `representative_of(node)`. MRG edges touching the removed set are moved
  // onto the representatives; moved edges that would duplicate an edge, form a
  // self-loop or close a cycle are dropped.
  std::size_t remove_subtree(NodeId root, const std::function<NodeId(NodeId)>& representative_of);
  std::size_t remove_subtree(NodeId root, NodeId representative);

  // Drops every node that is not on some start-to-eos path. No remapping:
  // dropped nodes resolve to themselves and are dead.
  std::size_t prune_to_complete();

  void set_eos(NodeId id, bool is_eos);
  void seal() { sealed_ = true; }
  bool sealed() const { return sealed_; }

  NodeId resolve(NodeId id) const;
  bool contains(NodeId id) const { return id.valid() && id.index() < nodes_.size(); }
  bool is_live(NodeId id) const { return contains(id) && nodes_[id.index()].live; }

  const LatticeNode& node(NodeId id) const;
  std::span<const Edge> out_edges(NodeId id) const;
  std::span<const Edge> in_edges(NodeId id) const;
  std::optional<NodeId> find_gen_child(NodeId parent, TokenId token) const;
  std::size_t gen_child_count(NodeId id) const;
  bool has_edge(NodeId src, NodeId dst) const;

  std::size_t capacity() const { return nodes_.size(); }
  std::size_t live_count() const { return live_count_; }
  std::size_t edge_count() const;
  std::size_t mrg_edge_count() const;
  std::vector<NodeId> live_nodes() const;
  std::vector<NodeId> eos_nodes() const;
  std::size_t rejected_merges() const { return rejected_merges_; }

  Path canonical_path(NodeId id) const;
  std::vector<TokenId> canonical_tokens(NodeId id) const;

  // True when `to` is reachable from `from` (a node reaches itself).
  bool reaches(NodeId from, NodeId to) const;

  // Kahn order over live nodes. Throws StructuralError on a cycle.
  std::vector<NodeId> topological_order() const;

  // Full structural check: single GEN parent, depth bookkeeping, no edges to
  // dead nodes, acyclicity. Throws StructuralError.
  void check_invariants() const;

  // Raw construction used by deserialization.
  struct RawNode {
    NodeId id;
    TokenId token = 0;
    std::string text;
    double log_prob = 0.0;
    bool is_eos = false;
    std::uint32_t depth = 0;
  };
  static Lattice from_parts(std::vector<RawNode> nodes, std::vector<Edge> edges,
                            std::vector<std::pair<NodeId, NodeId>> remap, TokenId eos_token);
  std::vector<std::pair<NodeId, NodeId>> remap_pairs() const;

  friend bool operator==(const Lattice& a, const Lattice& b);

 private:
  void require_mutable() const;
  void require_live(NodeId id, const char* what) const;
  void erase_edge(NodeId src, NodeId dst);
  void insert_edge(const Edge& e);
  void debug_verify() const;

  std::vector<LatticeNode> nodes_;
  std::vector<std::vector<Edge>> out_;
  std::vector<std::vector<Edge>> in_;
  UnionFind remap_;
  TokenId eos_token_;
  std::size_t live_count_ = 0;
  std::size_t rejected_merges_ = 0;
  bool sealed_ = false;
};

}  // namespace latdec
