#pragma once

#include <cstdint>
#include <vector>

namespace latdec {

// Directed union-find used to route ids of removed lattice nodes to their
// surviving representative. `redirect(from, to)` always keeps the root of
// `to` as the representative, so there is no union-by-rank.
class UnionFind {
 public:
  UnionFind() = default;
  explicit UnionFind(std::size_t n) { grow(n); }

  void grow(std::size_t n) {
    while (parent_.size() < n) parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
  }

  std::size_t size() const { return parent_.size(); }

  // Read-only lookup; no compression so concurrent readers are safe.
  std::uint32_t find(std::uint32_t x) const {
    while (parent_[x] != x) x = parent_[x];
    return x;
  }

  // Lookup with path halving.
  std::uint32_t find_compress(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool is_root(std::uint32_t x) const { return parent_[x] == x; }

  // Make every member of from's set resolve to to's representative.
  void redirect(std::uint32_t from, std::uint32_t to) {
    const std::uint32_t rf = find_compress(from);
    const std::uint32_t rt = find_compress(to);
    if (rf != rt) parent_[rf] = rt;
  }

  // Longest parent chain, for tests of compression behaviour.
  std::size_t chain_length(std::uint32_t x) const {
    std::size_t n = 0;
    while (parent_[x] != x) {
      x = parent_[x];
      ++n;
    }
    return n;
  }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace latdec
