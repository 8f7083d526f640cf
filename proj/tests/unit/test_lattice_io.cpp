#include <random>

#include "doctest.h"
#include "latdec/error.hpp"
#include "latdec/lattice_io.hpp"
#include "json.hpp"
#include "support/oracles.hpp"

using namespace latdec;

TEST_CASE("start-only lattice serializes to one node and no edges") {
  const auto j = nlohmann::json::parse(lattice_to_json(Lattice{}));
  CHECK(j["nodes"].size() == 1);
  CHECK(j["edges"].size() == 0);
  CHECK(j["sos"] == 0);
}

TEST_CASE("500-node lattice round-trips with removals and merges") {
  std::mt19937_64 rng(8);
  Lattice lat = oracle::random_lattice(rng, 500, 150);
  // Tombstone a few subtrees so the remap table is exercised.
  for (int i = 0; i < 5; ++i) {
    const auto live = lat.live_nodes();
    const NodeId leaf = live[1 + rng() % (live.size() - 1)];
    if (!lat.out_edges(leaf).empty()) continue;
    lat.remove_subtree(leaf, lat.sos());
  }
  const std::string text = lattice_to_json(lat);
  const Lattice back = lattice_from_json(text);
  CHECK(back == lat);
  CHECK(lattice_to_json(back) == text);
}

TEST_CASE("DOT output dashes exactly the merge edges") {
  std::mt19937_64 rng(4);
  const Lattice lat = oracle::random_lattice(rng, 60, 30);
  const std::string dot = lattice_to_dot(lat);
  std::size_t dashed = 0;
  for (std::size_t pos = dot.find("style=dashed"); pos != std::string::npos; pos = dot.find("style=dashed", pos + 1))
    ++dashed;
  CHECK(dashed == lat.mrg_edge_count());
  CHECK(lat.mrg_edge_count() > 0);
}

TEST_CASE("malformed JSON reports a byte offset") {
  try {
    lattice_from_json("{\"nodes\": [ }");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.location() > 0);
  }
}

TEST_CASE("schema errors are parse errors") {
  CHECK_THROWS_AS(lattice_from_json(R"({"nodes": 3})"), ParseError);
  CHECK_THROWS_AS(lattice_from_json(R"({"nodes":[{"id":0,"token":0,"text":"<s>","logprob":0,"eos":false,"depth":0}],
      "edges":[{"src":0,"dst":7,"kind":"GEN"}],"sos":0,"eos":[],"eos_token":1})"),
                  Error);
}
