#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "latdec/lattice.hpp"
#include "latdec/rng.hpp"

namespace latdec {

inline constexpr std::uint64_t kDefaultPathCap = 10'000;
inline constexpr std::uint64_t kUnboundedPathCap = std::numeric_limits<std::uint64_t>::max();

struct PathCounts {
  // Number of start-to-node paths, indexed by NodeId; 0 for dead ids.
  std::vector<std::uint64_t> per_node;
  // Sum over eos nodes. Saturates at the cap like every per-node count.
  std::uint64_t total = 0;
};

constexpr std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b, std::uint64_t cap) {
  return (a >= cap || b >= cap || a > cap - b) ? cap : a + b;
}

// Topological-order dynamic program; throws StructuralError on a cycle.
PathCounts count_paths(const Lattice& lattice, std::uint64_t cap = kDefaultPathCap);

// Uniform random walk over outgoing edges (GEN and MRG alike) from the start
// node until an eos node. Throws StructuralError at a dead end.
Path sample_path(const Lattice& lattice, Rng& rng);

// Builds a Path (with summed log-probabilities) from an explicit node walk.
Path make_path(const Lattice& lattice, const std::vector<NodeId>& walk);

// Every complete path, in depth-first order, stopping after `limit`.
std::vector<Path> enumerate_paths(const Lattice& lattice, std::size_t limit);

// The `k` highest-scoring complete paths, best first. Best-first enumeration
// guided by the exact best completion score of every node.
std::vector<Path> k_best_paths(const Lattice& lattice, std::size_t k);

}  // namespace latdec
