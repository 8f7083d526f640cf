#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "latdec/builtin_models.hpp"
#include "latdec/error.hpp"
#include "latdec/lattice_io.hpp"
#include "latdec/metrics.hpp"
#include "latdec/paths.hpp"
#include "latdec/search.hpp"
#include "support/oracles.hpp"

using namespace latdec;

namespace {

SearchConfig config(Algorithm a, std::size_t k, std::size_t budget, std::size_t max_len) {
  SearchConfig c;
  c.algorithm = a;
  c.beam_size = k;
  c.budget = budget;
  c.max_len = max_len;
  return c;
}

std::vector<std::vector<TokenId>> complete_sequences(const Lattice& lat) {
  std::vector<std::vector<TokenId>> out;
  for (const auto& p : enumerate_paths(lat, 100000)) out.emplace_back(p.generated().begin(), p.generated().end());
  std::sort(out.begin(), out.end());
  return out;
}

double lp(double p) { return std::log(p); }

}  // namespace

TEST_CASE("greedy follows a forced sequence") {
  auto m = TableModel::with_words({"a", "b"});
  const TokenId a = m.id("a"), b = m.id("b");
  m.set({0}, {{a, 0.0}});
  m.set({0, a}, {{b, 0.0}});
  m.set({0, a, b}, {{1, 0.0}});
  const auto r = decode_greedy(m, {}, config(Algorithm::greedy, 1, 10, 10));
  CHECK(complete_sequences(r.lattice) == std::vector<std::vector<TokenId>>{{a, b, 1}});
  CHECK(r.expanded == 3);
  CHECK(r.budget_spent == 3);
  CHECK(r.truncated == 0);
  CHECK(pruning_ratio(r) == 0.0);
}

TEST_CASE("greedy cut short by the budget is flagged") {
  const auto m = TableModel::with_words({"a"}, {{2, lp(0.9)}, {1, lp(0.1)}});
  const auto r = decode_greedy(m, {}, config(Algorithm::greedy, 1, 3, 10));
  CHECK(r.budget_exhausted);
  CHECK(r.truncated == 1);
  CHECK(r.completed_paths == 1);
  CHECK(r.lattice.live_count() == 4);
}

TEST_CASE("greedy equals beam search of width one") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    const auto m = oracle::random_table(rng, 3, 4);
    const auto g = decode(m, {}, config(Algorithm::greedy, 1, 100, 6));
    const auto b = decode(m, {}, config(Algorithm::beam, 1, 100, 6));
    CHECK(complete_sequences(g.lattice) == complete_sequences(b.lattice));
    CHECK(g.expanded == b.expanded);
  }
}

TEST_CASE("beam recovers a sequence greedy misses") {
  auto m = TableModel::with_words({"a", "b", "x", "y"});
  const TokenId a = m.id("a"), b = m.id("b"), x = m.id("x"), y = m.id("y");
  m.set({0}, {{a, lp(0.6)}, {b, lp(0.4)}});
  m.set({0, a}, {{x, lp(0.35)}, {y, lp(0.35)}, {1, lp(0.3)}});
  m.set({0, b}, {{1, lp(0.9)}, {x, lp(0.1)}});
  m.set_default({{1, 0.0}});
  const auto g = decode(m, {}, config(Algorithm::greedy, 1, 100, 5));
  CHECK(complete_sequences(g.lattice) == std::vector<std::vector<TokenId>>{{a, x, 1}});
  const auto bm = decode(m, {}, config(Algorithm::beam, 2, 100, 5));
  const auto best = k_best_paths(bm.lattice, 1).front();
  CHECK(std::vector<TokenId>(best.generated().begin(), best.generated().end()) == std::vector<TokenId>{b, 1});
  CHECK(best.total_log_prob == doctest::Approx(lp(0.36)));
}

TEST_CASE("full-width beam finds the exhaustive argmax") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 20; ++i) {
    const auto m = oracle::random_table(rng, 2, 4);
    const auto expected = oracle::exhaustive_argmax(m, 5, 4);
    const auto r = decode(m, {}, config(Algorithm::beam, 81, 10000, 4));
    const auto best = k_best_paths(r.lattice, 1).front();
    CHECK(std::vector<TokenId>(best.generated().begin(), best.generated().end()) == expected.tokens);
  }
}

TEST_CASE("beam pruning on a hand-traced run") {
  // Every step: w0 0.5, w1 0.3, eos 0.2. Width 2, two steps.
  // Step 1 keeps w0,w1; step 2 keeps w0w0 (.25), w0w1 (.15, earlier hypothesis
  // wins the tie with w1w0). The w1 node is expanded but on no returned path.
  const auto m = TableModel::with_words({"w0", "w1"}, {{2, lp(0.5)}, {3, lp(0.3)}, {1, lp(0.2)}});
  const auto r = decode(m, {}, config(Algorithm::beam, 2, 100, 2));
  CHECK(r.expanded == 3);
  CHECK(r.expanded_nodes.size() == 3);
  CHECK(r.pruned == 1);
  CHECK(pruning_ratio(r) == doctest::Approx(1.0 / 3.0));
  CHECK(complete_sequences(r.lattice) == std::vector<std::vector<TokenId>>{{2, 2}, {2, 3}});
  CHECK(r.truncated == 2);
}

TEST_CASE("one diversity group is plain beam search") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 10; ++i) {
    const auto m = oracle::random_table(rng, 3, 3);
    auto c = config(Algorithm::dbs, 4, 200, 6);
    c.groups = 1;
    const auto d = decode(m, {}, c);
    const auto b = decode(m, {}, config(Algorithm::beam, 4, 200, 6));
    CHECK(lattice_to_json(d.lattice) == lattice_to_json(b.lattice));
  }
}

TEST_CASE("zero diversity strength repeats the same group") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 10; ++i) {
    const auto m = oracle::random_table(rng, 3, 3);
    auto c = config(Algorithm::dbs, 4, 1000, 5);
    c.groups = 2;
    c.diversity_strength = 0.0;
    const auto d = decode(m, {}, c);
    const auto b = decode(m, {}, config(Algorithm::beam, 2, 1000, 5));
    CHECK(lattice_to_json(d.lattice) == lattice_to_json(b.lattice));
    CHECK(d.expanded == 2 * b.expanded);
  }
}

TEST_CASE("diversity groups diverge on a symmetric fork") {
  auto m = TableModel::with_words({"a", "b"});
  const TokenId a = m.id("a"), b = m.id("b");
  m.set({0}, {{a, lp(0.5)}, {b, lp(0.5)}});
  m.set_default({{1, 0.0}});
  auto c = config(Algorithm::dbs, 2, 100, 4);
  c.groups = 2;
  const auto r = decode(m, {}, c);
  CHECK(complete_sequences(r.lattice) == std::vector<std::vector<TokenId>>{{a, 1}, {b, 1}});
  const auto plain = decode(m, {}, config(Algorithm::beam, 1, 100, 4));
  CHECK(complete_sequences(plain.lattice).size() == 1);
}

TEST_CASE("sampling weights") {
  const auto d = TokenDistribution::from_entries({{2, lp(0.5)}, {3, lp(0.3)}, {4, lp(0.1)}}, 5);
  const auto w = sampling_weights(d, 1.0, 1.0);
  CHECK(w[0] == doctest::Approx(0.5 / 0.9));
  CHECK(w[2] == doctest::Approx(0.1 / 0.9));
  const auto tiny = sampling_weights(d, 1.0, 1e-9);
  CHECK(tiny == std::vector<double>{1.0, 0.0, 0.0});
  const auto nucleus = sampling_weights(d, 1.0, 0.8);
  CHECK(nucleus[2] == 0.0);
  CHECK(nucleus[0] == doctest::Approx(0.5 / 0.8));
  const auto hot = sampling_weights(d, 1.5, 1.0);
  CHECK(hot[0] / hot[1] < w[0] / w[1]);
}

TEST_CASE("a vanishing nucleus degenerates to greedy") {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 10; ++i) {
    const auto m = oracle::random_table(rng, 3, 3);
    auto c = config(Algorithm::nucleus, 3, 100, 6);
    c.nucleus_p = 1e-9;
    const auto s = decode(m, {}, c);
    const auto g = decode(m, {}, config(Algorithm::greedy, 1, 100, 6));
    CHECK(complete_sequences(s.lattice) == complete_sequences(g.lattice));
  }
}

TEST_CASE("sampling spends one call per sampled token, duplicates included") {
  const auto m = TableModel::with_words({"a"}, {{2, lp(0.5)}, {1, lp(0.5)}});
  auto c = config(Algorithm::temperature, 5, 1000, 8);
  c.seed = 3;
  const auto r = decode(m, {}, c);
  std::size_t tokens = 0;
  CHECK(r.expanded == r.budget_spent);
  CHECK(r.expanded >= 5);
  for (const auto& p : enumerate_paths(r.lattice, 100)) tokens = std::max(tokens, p.length());
  CHECK(r.expanded <= 5 * 8);
}

TEST_CASE("best-first search completes the greedy chain before any sibling") {
  auto m = TableModel::with_words({"a", "b", "c"});
  const TokenId a = m.id("a"), b = m.id("b"), c = m.id("c");
  m.set({0}, {{a, lp(0.9)}, {b, lp(0.1)}});
  m.set({0, a}, {{c, lp(0.8)}, {b, lp(0.2)}});
  m.set({0, a, c}, {{1, lp(0.7)}, {a, lp(0.3)}});
  m.set_default({{1, lp(0.6)}, {c, lp(0.4)}});
  const auto r = decode(m, {}, config(Algorithm::bfs, 1, 3, 10));
  REQUIRE(r.expanded_nodes.size() == 3);
  const auto& lat = r.lattice;
  CHECK(lat.canonical_tokens(r.expanded_nodes[2]) == std::vector<TokenId>{0, a, c});
  CHECK(complete_sequences(lat) == std::vector<std::vector<TokenId>>{{a, c, 1}});
  CHECK(r.pruned == 0);
}

TEST_CASE("best-first search spends exactly its budget without pruning") {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 30; ++i) {
    const auto m = oracle::random_table(rng, 3, 3);
    const auto r = decode(m, {}, config(Algorithm::bfs, 1, 10, 12));
    CHECK(r.expanded == 10);
    CHECK(r.budget_spent == 10);
    CHECK(r.pruned == 0);
    CHECK(r.completed_paths >= 1);
    for (NodeId id : r.expanded_nodes) CHECK(r.lattice.is_live(id));
  }
}

TEST_CASE("every algorithm is deterministic") {
  std::mt19937_64 rng(15);
  const auto m = oracle::random_table(rng, 3, 3);
  for (auto a : {Algorithm::greedy, Algorithm::beam, Algorithm::dbs, Algorithm::nucleus, Algorithm::temperature,
                 Algorithm::bfs}) {
    auto c = config(a, 4, 30, 8);
    c.seed = 77;
    CHECK(lattice_to_json(decode(m, {}, c).lattice) == lattice_to_json(decode(m, {}, c).lattice));
  }
}

TEST_CASE("configuration validation") {
  CHECK_THROWS_AS(config(Algorithm::bfs, 1, 0, 5).validate(), ConfigError);
  auto c = config(Algorithm::nucleus, 2, 10, 5);
  c.nucleus_p = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = config(Algorithm::temperature, 2, 10, 5);
  c.temperature = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = config(Algorithm::dbs, 5, 10, 5);
  c.groups = 2;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = config(Algorithm::greedy, 1, 10, 5);
  c.recomb.strategy = RecombStrategy::rcb;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = config(Algorithm::beam, 2, 10, 5);
  c.recomb.strategy = RecombStrategy::zip;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.recomb.strategy = RecombStrategy::zbeam;
  CHECK_NOTHROW(c.validate());
  c = config(Algorithm::nucleus, 2, 10, 5);
  c.recomb.strategy = RecombStrategy::zbeam;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = config(Algorithm::bfs, 2, 10, 5);
  c.recomb.strategy = RecombStrategy::zbeam;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("budget correction constants") {
  CHECK(effective_budget(TaskProfile::translation, 8, 10).beam_size == 12);
  CHECK(effective_budget(TaskProfile::summarization, 16, 10).beam_size == 20);
  CHECK(effective_budget(TaskProfile::custom, 7, 10, 1.0).beam_size == 7);
  CHECK(effective_budget(TaskProfile::custom, 7, 10).budget == 70);
  CHECK_THROWS_AS(effective_budget(TaskProfile::custom, 7, 10, 0.0), ConfigError);
}

TEST_CASE("recombination in beam search spends nothing extra") {
  std::mt19937_64 rng(16);
  for (int i = 0; i < 20; ++i) {
    const auto model = MarkovModel::train(oracle::random_corpus(rng, 30, 3, 6), 1, 0.2);
    for (auto s : {RecombStrategy::zbeam, RecombStrategy::rcb}) {
      auto c = config(Algorithm::beam, 4, 200, 8);
      c.recomb = {s, 1, 3};
      const auto r = decode(model, {}, c);
      CHECK(r.expanded == r.budget_spent);
      CHECK_NOTHROW(r.lattice.check_invariants());
      CHECK(r.completed_paths >= 1);
    }
  }
}
