#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "latdec/scoring.hpp"
#include "latdec/types.hpp"

namespace latdec {

// Search priority with a dedicated top tier standing in for +infinity, so
// top-tier entries still order among themselves by insertion.
struct Priority {
  bool top_tier = false;
  double score = 0.0;

  static Priority top() { return {true, 0.0}; }
  static Priority of(double s) { return {false, s}; }
};

// A not-yet-materialized child of `parent`. The start node is queued as a
// root entry.
struct FrontierEntry {
  Priority priority;
  NodeId parent;
  TokenScore child;
  std::uint64_t seq = 0;
  bool root = false;
};

// Max-priority queue; equal priorities pop first-in first-out.
class Frontier {
 public:
  void push_root();
  void push(Priority priority, NodeId parent, TokenScore child);
  FrontierEntry pop();
  const FrontierEntry& top() const { return heap_.top(); }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  // Queued entries whose parent is `id`.
  std::size_t pending(NodeId id) const { return id.index() < pending_.size() ? pending_[id.index()] : 0; }

 private:
  struct Later {
    bool operator()(const FrontierEntry& a, const FrontierEntry& b) const {
      if (a.priority.top_tier != b.priority.top_tier) return b.priority.top_tier;
      if (a.priority.score != b.priority.score) return a.priority.score < b.priority.score;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<FrontierEntry, std::vector<FrontierEntry>, Later> heap_;
  std::vector<std::size_t> pending_;
  std::uint64_t next_seq_ = 0;
};

inline void Frontier::push_root() {
  FrontierEntry e;
  e.priority = Priority::top();
  e.seq = next_seq_++;
  e.root = true;
  heap_.push(e);
}

inline void Frontier::push(Priority priority, NodeId parent, TokenScore child) {
  FrontierEntry e{priority, parent, child, next_seq_++, false};
  if (pending_.size() <= parent.index()) pending_.resize(parent.index() + 1, 0);
  ++pending_[parent.index()];
  heap_.push(e);
}

inline FrontierEntry Frontier::pop() {
  FrontierEntry e = heap_.top();
  heap_.pop();
  if (!e.root) --pending_[e.parent.index()];
  return e;
}

}  // namespace latdec
