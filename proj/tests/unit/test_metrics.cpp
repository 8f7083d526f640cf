#include <cmath>
#include <random>

#include "doctest.h"
#include "latdec/builtin_models.hpp"
#include "latdec/error.hpp"
#include "latdec/metrics.hpp"
#include "latdec/paths.hpp"
#include "latdec/search.hpp"
#include "support/oracles.hpp"

using namespace latdec;

namespace {

using Seq = std::vector<TokenId>;

// a=2 b=3 c=4 d=5 e=6 f=7 x=8
constexpr TokenId a = 2, b = 3, c = 4, d = 5, e = 6, f = 7, x = 8;

Lattice chain(const Seq& tokens) {
  Lattice lat;
  NodeId cur = lat.sos();
  for (TokenId t : tokens) cur = lat.add_gen_child(cur, t, "w", -1.0);
  lat.add_gen_child(cur, 1, "</s>", -1.0, true);
  return lat;
}

// Every sequence of length <= max_len over tokens {2,3,4}.
std::vector<Seq> all_sequences(std::size_t max_len) {
  std::vector<Seq> out{{}};
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].size() == max_len) continue;
    for (TokenId t : {2, 3, 4}) {
      auto s = out[i];
      s.push_back(t);
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("ROUGE golden values") {
  CHECK(rouge_n(Seq{a, b, c}, Seq{a, c, d}, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(rouge_n(Seq{a, b, c}, Seq{a, c, d}, 2) == 0.0);
  CHECK(rouge_l(Seq{a, b, c}, Seq{a, c, d}) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  // Clipping: "a b a b" vs "a b b a" -> bigrams ab,ba,ab vs ab,bb,ba: 2 of 3.
  CHECK(std::abs(rouge_n(Seq{a, b, a, b}, Seq{a, b, b, a}, 1) - 1.0) < 1e-9);
  CHECK(std::abs(rouge_n(Seq{a, b, a, b}, Seq{a, b, b, a}, 2) - 0.6666666666666666) < 1e-9);
  CHECK(std::abs(rouge_l(Seq{a, b, a, b}, Seq{a, b, b, a}) - 0.75) < 1e-9);
  CHECK(rouge_n(Seq{a, b}, Seq{a, b}, 2) == 1.0);
  CHECK(rouge_l(Seq{a, b}, Seq{a, b}) == 1.0);
  CHECK(rouge_n(Seq{a, b}, Seq{c, d}, 1) == 0.0);
  CHECK(rouge_n(Seq{}, Seq{c, d}, 1) == 0.0);
  CHECK(rouge_l(Seq{}, Seq{c, d}) == 0.0);
}

TEST_CASE("BLEU golden values") {
  // p1 = 5/6, p2 = (3+1)/(5+1), p3 = (1+1)/(4+1), p4 = (0+1)/(3+1); no brevity penalty.
  CHECK(std::abs(bleu(Seq{a, b, c, d, e, f}, Seq{a, b, c, x, e, f}) - 48.54917717073234) < 1e-9);
  // Half-length candidate: every precision is 1, penalty e^(1-2).
  CHECK(std::abs(bleu(Seq{a, b}, Seq{a, b, c, d}) - 36.787944117144235) < 1e-9);
  CHECK(bleu(Seq{a, b, c, d, e}, Seq{a, b, c, d, e}) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(bleu(Seq{}, Seq{a}) == 0.0);
  CHECK(bleu(Seq{a, b}, Seq{c, d}) == 0.0);
}

TEST_CASE("edit distance golden values and exhaustive agreement") {
  CHECK(edit_distance(Seq{a, b, c, d}, Seq{a, c, d, e}) == 2);
  CHECK(edit_distance(Seq{}, Seq{a, b}) == 2);
  CHECK(edit_distance(Seq{a, b, c}, Seq{a, x, c}) == 1);
  const auto seqs = all_sequences(6);
  REQUIRE(seqs.size() == 1093);
  std::size_t mismatches = 0;
  for (const auto& s : seqs)
    for (const auto& t : seqs) mismatches += edit_distance(s, t) != oracle::levenshtein(s, t);
  CHECK(mismatches == 0);
}

TEST_CASE("Pearson golden values") {
  const std::vector<double> xs{1, 2, 3, 4, 5}, ys{2, 4, 5, 4, 5};
  CHECK(std::abs(*pearson(xs, ys) - 0.7745966692414834) < 1e-9);
  const std::vector<double> x10{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, y10{2, 1, 4, 3, 6, 5, 8, 7, 10, 9};
  CHECK(std::abs(*pearson(x10, y10) - 31.0 / 33.0) < 1e-9);
  std::vector<double> neg(x10.rbegin(), x10.rend());
  CHECK(*pearson(x10, neg) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_FALSE(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}).has_value());
}

TEST_CASE("score/quality correlation") {
  std::vector<std::vector<ScoredHypothesis>> ex{{{0.0, 1.0}, {-1.0, 0.5}, {-2.0, 0.0}, {-3.0, -0.5}}};
  CHECK(*score_quality_correlation(ex) == doctest::Approx(1.0).epsilon(1e-12));
  ex = {{{0.0, 0.0}, {-1.0, 0.5}, {-2.0, 1.0}, {-3.0, 1.5}}};
  CHECK(*score_quality_correlation(ex) == doctest::Approx(-1.0).epsilon(1e-12));
  ex = {{{0.0, 1.0}, {-1.0, 0.5}}};
  CHECK_FALSE(score_quality_correlation(ex).has_value());
}

TEST_CASE("novel n-grams") {
  CHECK(novel_ngrams(chain({a, b, a}), 1) == 2);
  CHECK(novel_ngrams(chain({a, b, a}), 2) == 2);
  CHECK(novel_ngrams(Lattice{}, 1) == 0);
  CHECK(novel_ngrams(Lattice{}, 2) == 0);
  Lattice lat;
  const NodeId p = lat.add_gen_child(lat.sos(), a, "a", -1);
  const NodeId q = lat.add_gen_child(lat.sos(), b, "b", -1);
  const NodeId pc = lat.add_gen_child(p, c, "c", -1);
  lat.add_gen_child(q, c, "c", -1);
  const auto before = novel_ngrams(lat, 1);
  lat.add_mrg_edge(q, pc);
  CHECK(novel_ngrams(lat, 1) == before);
  CHECK_THROWS_AS(novel_ngrams(lat, 3), ConfigError);
}

TEST_CASE("single-path lattices give the degenerate diversity row") {
  const auto lat = chain({a, b, c});
  auto rng = make_rng(1);
  CHECK(self_bleu(lat, 5, rng) == 100.0);
  CHECK(mean_edit_distance(lat, 5, rng) == 0.0);
  const Seq ref{a, c, c};
  for (auto m : {MatchMetric::rouge, MatchMetric::bleu}) {
    const auto o = oracle_match(lat, ref, m, rng);
    const auto s = sample_match(lat, ref, m, rng);
    CHECK_FALSE(o.approximate);
    for (std::size_t i = 0; i < o.scores.values.size(); ++i) CHECK(o.scores.values[i].second == s.values[i].second);
  }
}

TEST_CASE("self-BLEU of disjoint samples and edit distance of one substitution") {
  Lattice lat;
  const NodeId p = lat.add_gen_child(lat.sos(), a, "a", -1);
  lat.add_gen_child(p, 1, "</s>", -1, true);
  const NodeId q = lat.add_gen_child(lat.sos(), b, "b", -1);
  lat.add_gen_child(q, 1, "</s>", -1, true);
  // Draws until the two samples differ; every differing pair scores 0.
  CHECK(bleu(Seq{a}, Seq{b}) == 0.0);
  auto rng = make_rng(4);
  const double ed = mean_edit_distance(lat, 2, rng);
  CHECK((ed == 0.0 || ed == 1.0));
  auto r1 = make_rng(9), r2 = make_rng(9);
  CHECK(self_bleu(lat, 5, r1) == self_bleu(lat, 5, r2));
}

TEST_CASE("oracle match over an eight-path lattice equals brute force") {
  // Three binary forks in sequence (via merge edges) give 8 complete paths.
  Lattice lat;
  NodeId join = lat.sos();
  for (int i = 0; i < 3; ++i) {
    const NodeId l = lat.add_gen_child(join, static_cast<TokenId>(2 + 2 * i), "l", -1);
    const NodeId r = lat.add_gen_child(join, static_cast<TokenId>(3 + 2 * i), "r", -1);
    const NodeId m = lat.add_gen_child(l, x, "x", -1);
    REQUIRE(lat.add_mrg_edge(r, m));
    join = m;
  }
  lat.add_gen_child(join, 1, "</s>", -1, true);
  REQUIRE(count_paths(lat).total == 8);
  const Seq ref{3, x, 4, x, 7, x};
  for (auto metric : {MatchMetric::rouge, MatchMetric::bleu}) {
    auto rng = make_rng(2);
    const auto o = oracle_match(lat, ref, metric, rng);
    CHECK(o.candidates == 8);
    for (const auto& [name, value] : o.scores.values) {
      double best = 0;
      for (const auto& walk : oracle::all_paths(lat)) {
        auto toks = oracle::tokens_of(lat, walk);
        const Seq content(toks.begin() + 1, toks.end() - 1);
        best = std::max(best, match_scores(content, ref, metric).get(name));
      }
      CHECK(value == best);
    }
    auto srng = make_rng(2);
    CHECK(headline(sample_match(lat, ref, metric, srng), metric) <= headline(o.scores, metric));
  }
  auto rng = make_rng(2);
  CHECK(oracle_match(lat, ref, MatchMetric::rouge, rng).scores.get("rouge2") == 1.0);
}

TEST_CASE("oracle match falls back to an approximation beyond the exact cap") {
  Lattice lat;
  NodeId join = lat.sos();
  for (int i = 0; i < 14; ++i) {
    const NodeId l = lat.add_gen_child(join, 2, "l", -1);
    const NodeId r = lat.add_gen_child(join, 3, "r", -1.5);
    const NodeId m = lat.add_gen_child(l, 4, "m", -1);
    REQUIRE(lat.add_mrg_edge(r, m));
    join = m;
  }
  lat.add_gen_child(join, 1, "</s>", -1, true);
  auto rng = make_rng(5);
  const auto o = oracle_match(lat, Seq{2, 4, 3, 4}, MatchMetric::rouge, rng);
  CHECK(o.approximate);
  CHECK(o.candidates == kOracleExactCap + kMatchSamples);
}

TEST_CASE("greedy reports the degenerate row end to end") {
  std::mt19937_64 gen(21);
  const auto model = MarkovModel::train(oracle::random_corpus(gen, 40, 4, 6), 2, 0.1);
  SearchConfig c;
  c.algorithm = Algorithm::greedy;
  c.beam_size = 1;
  c.budget = 64;
  c.max_len = 12;
  const auto r = decode(model, {}, c);
  const Seq ref{2, 3, 4};
  const auto rep = make_report(r, ref, {.root_seed = 1, .example = 0});
  CHECK(rep.path_count == 1);
  CHECK(rep.self_bleu == 100.0);
  CHECK(rep.mean_edit_distance == 0.0);
  REQUIRE(rep.quality.has_value());
  CHECK(rep.quality->oracle.values == rep.quality->sample.values);
  CHECK(rep.pruned_ratio == 0.0);
  const auto j = report_to_json(rep);
  CHECK(j["self_bleu"] == 100.0);
}
