#pragma once
// Independent reference implementations used to check the library. These
// deliberately take the slow, obvious route.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "latdec/builtin_models.hpp"
#include "latdec/lattice.hpp"

namespace oracle {

using latdec::Lattice;
using latdec::NodeId;
using latdec::TokenId;

// Every start-to-eos walk, by plain recursion over out-edges.
inline std::vector<std::vector<NodeId>> all_paths(const Lattice& lat) {
  std::vector<std::vector<NodeId>> out;
  std::vector<NodeId> stack{lat.sos()};
  std::function<void()> rec = [&] {
    const NodeId cur = stack.back();
    if (lat.node(cur).is_eos) out.push_back(stack);
    for (const auto& e : lat.out_edges(cur)) {
      stack.push_back(e.dst);
      rec();
      stack.pop_back();
    }
  };
  rec();
  return out;
}

inline std::vector<TokenId> tokens_of(const Lattice& lat, const std::vector<NodeId>& walk) {
  std::vector<TokenId> t;
  for (NodeId id : walk) t.push_back(lat.node(id).token);
  return t;
}

inline double score_of(const Lattice& lat, const std::vector<NodeId>& walk) {
  double s = 0;
  for (std::size_t i = 1; i < walk.size(); ++i) s += lat.node(walk[i]).log_prob;
  return s;
}

// GEN-only walk back to the start node.
inline std::vector<TokenId> gen_prefix(const Lattice& lat, NodeId id) {
  std::vector<TokenId> t;
  for (NodeId cur = id; cur.valid(); cur = lat.node(cur).gen_parent) t.push_back(lat.node(cur).token);
  std::reverse(t.begin(), t.end());
  return t;
}

// Random GEN tree with `n` nodes (tokens 2..2+alphabet), some eos leaves and
// up to `mrg_attempts` random MRG edges (cycle-closing ones are rejected by
// the lattice itself).
inline Lattice random_lattice(std::mt19937_64& rng, std::size_t n, std::size_t mrg_attempts, int alphabet = 3) {
  Lattice lat;
  std::vector<NodeId> ids{lat.sos()};
  std::uniform_int_distribution<int> tok(2, 2 + alphabet - 1);
  std::uniform_real_distribution<double> lp(-3.0, -0.01);
  while (ids.size() < n) {
    const NodeId parent = ids[rng() % ids.size()];
    if (lat.node(parent).is_eos) continue;
    const bool eos = rng() % 4 == 0;
    const NodeId c = lat.add_gen_child(parent, eos ? 1 : tok(rng), eos ? "</s>" : "w", lp(rng), eos);
    ids.push_back(c);
  }
  for (std::size_t i = 0; i < mrg_attempts; ++i) {
    const NodeId a = ids[rng() % ids.size()];
    const NodeId b = ids[rng() % ids.size()];
    if (a == b || b == lat.sos() || lat.node(a).is_eos) continue;
    lat.add_mrg_edge(a, b);
  }
  return lat;
}

// The recursive definition over suffixes, memoized so that exhaustive
// comparisons stay affordable.
inline std::size_t levenshtein(const std::vector<TokenId>& a, const std::vector<TokenId>& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    const auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const std::size_t v =
        a[i] == b[j] ? rec(i + 1, j + 1) : 1 + std::min({rec(i + 1, j), rec(i, j + 1), rec(i + 1, j + 1)});
    return memo[key] = v;
  };
  return rec(0, 0);
}

// A row of `count` distinct outcome tokens (from `outcomes`) with random
// probabilities summing below one.
inline std::vector<latdec::TokenScore> random_row(std::mt19937_64& rng, std::vector<TokenId> outcomes) {
  std::shuffle(outcomes.begin(), outcomes.end(), rng);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> w;
  double total = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) total += w.emplace_back(u(rng));
  std::vector<latdec::TokenScore> row;
  for (std::size_t i = 0; i < outcomes.size(); ++i) row.push_back({outcomes[i], std::log(w[i] / total)});
  return row;
}

// TableModel over `words` (plus <s>, </s>) with a distinct random row for
// every prefix up to `depth` generated tokens and a random default row.
inline latdec::TableModel random_table(std::mt19937_64& rng, std::size_t words, std::size_t depth) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < words; ++i) names.push_back("w" + std::to_string(i));
  std::vector<TokenId> outcomes{1};
  for (std::size_t i = 0; i < words; ++i) outcomes.push_back(static_cast<TokenId>(i + 2));
  auto model = latdec::TableModel::with_words(names, random_row(rng, outcomes));
  std::vector<std::vector<TokenId>> layer{{0}};
  for (std::size_t d = 0; d <= depth; ++d) {
    std::vector<std::vector<TokenId>> next;
    for (const auto& prefix : layer) {
      model.set(prefix, random_row(rng, outcomes));
      for (std::size_t i = 0; i < words; ++i) {
        auto p = prefix;
        p.push_back(static_cast<TokenId>(i + 2));
        next.push_back(std::move(p));
      }
    }
    layer = std::move(next);
  }
  return model;
}

// Sentences over a small alphabet; repetitive enough to give Markov models
// shared contexts.
inline std::vector<std::vector<std::string>> random_corpus(std::mt19937_64& rng, std::size_t sentences,
                                                           std::size_t alphabet, std::size_t max_len) {
  std::vector<std::vector<std::string>> out;
  for (std::size_t s = 0; s < sentences; ++s) {
    const std::size_t len = 1 + rng() % max_len;
    std::vector<std::string> words;
    for (std::size_t i = 0; i < len; ++i) words.push_back("t" + std::to_string(rng() % alphabet));
    out.push_back(std::move(words));
  }
  return out;
}

struct Best {
  std::vector<TokenId> tokens;  // generated tokens, eos included when present
  double score = -INFINITY;
};

// Exhaustive search over every sequence the model can emit within `max_len`
// tokens (top-k successors only): sequences end at eos or are cut at max_len.
// Score is the sum of log-probabilities plus `lambda` per token.
inline Best exhaustive_argmax(const latdec::ScoringModel& model, std::size_t top_k, std::size_t max_len,
                              double lambda = 0.0) {
  Best best;
  std::vector<TokenId> prefix{model.sos_id()};
  std::function<void(double)> rec = [&](double s) {
    const std::size_t len = prefix.size() - 1;
    const bool ended = len > 0 && prefix.back() == model.eos_id();
    if (ended || len == max_len) {
      if (s > best.score) best = {std::vector<TokenId>(prefix.begin() + 1, prefix.end()), s};
      return;
    }
    const auto dist = model.score(prefix, {}, top_k);
    for (const auto& e : dist.entries()) {
      prefix.push_back(e.token);
      rec(s + e.log_prob + lambda);
      prefix.pop_back();
    }
  };
  rec(0.0);
  return best;
}

}  // namespace oracle
