#include <fstream>
#include <random>

#include "doctest.h"
#include "latdec/bridge.hpp"
#include "latdec/builtin_models.hpp"
#include "latdec/error.hpp"
#include "latdec/lattice_io.hpp"
#include "latdec/search.hpp"
#include "support/oracles.hpp"

using namespace latdec;

namespace {

std::string write_table(const TableModel& m, const std::string& name) {
  const std::string path = std::string(LATDEC_TEST_TMP) + "/" + name;
  std::ofstream(path) << m.to_json();
  return path;
}

std::string stub(const std::string& args) { return std::string(LATDEC_STUB_BRIDGE) + " " + args; }

}  // namespace

TEST_CASE("request builders follow the wire schema") {
  const std::vector<TokenId> prefix{0, 17}, source{4};
  const auto s = wire::score_request(prefix, source);
  CHECK(s.dump() == R"({"op":"score","prefix":[0,17],"source":[4]})");
  CHECK(wire::hello_request(5)["k"] == 5);
}

TEST_CASE("handshake and scoring match the in-process table") {
  std::mt19937_64 rng(1);
  const auto table = oracle::random_table(rng, 3, 2);
  const auto path = write_table(table, "bridge_basic.json");
  const auto bridge = BridgeModel::launch(stub("--table " + path), 5);
  CHECK(bridge->vocabulary().words() == table.vocabulary().words());
  CHECK(bridge->eos_id() == table.eos_id());
  const std::vector<TokenId> prefix{0, 2, 3};
  CHECK(bridge->score(prefix, {}, 5) == table.score(prefix, {}, 5));
  CHECK(bridge->round_trips() == 2);
}

TEST_CASE("protocol version mismatch is a model error carrying the payload") {
  const auto path = write_table(TableModel::with_words({"a"}, {{1, 0.0}}), "bridge_ver.json");
  try {
    BridgeModel::launch(stub("--table " + path + " --mode bad-version"), 5);
    FAIL("expected a model error");
  } catch (const ModelError& e) {
    CHECK(e.payload().find("\"version\":2") != std::string::npos);
  }
}

TEST_CASE("malformed responses are model errors") {
  const auto path = write_table(TableModel::with_words({"a"}, {{1, 0.0}}), "bridge_bad.json");
  try {
    BridgeModel::launch(stub("--table " + path + " --mode garbage"), 5);
    FAIL("expected a model error");
  } catch (const ModelError& e) {
    CHECK(e.payload() == "not json at all");
  }
}

TEST_CASE("a silent bridge times out") {
  const auto path = write_table(TableModel::with_words({"a"}, {{1, 0.0}}), "bridge_silent.json");
  CHECK_THROWS_AS(BridgeModel::launch(stub("--table " + path + " --mode silent"), 5, std::chrono::milliseconds(200)),
                  ModelError);
}

TEST_CASE("a bridge exiting mid-session is a model error") {
  const auto path = write_table(TableModel::with_words({"a"}, {{1, 0.0}}), "bridge_die.json");
  const auto bridge = BridgeModel::launch(stub("--table " + path + " --mode die-after-hello"), 5);
  CHECK_THROWS_AS(bridge->score(std::vector<TokenId>{0}, {}, 5), ModelError);
}

TEST_CASE("a missing bridge program fails the handshake") {
  CHECK_THROWS_AS(BridgeModel::launch("/nonexistent/bridge-binary", 5, std::chrono::milliseconds(2000)), ModelError);
}

TEST_CASE("unknown ops get an error response and the session continues") {
  const auto path = write_table(TableModel::with_words({"a"}, {{1, 0.0}}), "bridge_op.json");
  Subprocess p(stub("--table " + path));
  p.write_line(R"({"op":"frobnicate"})");
  const auto r1 = p.read_line(std::chrono::seconds(5));
  REQUIRE(r1);
  CHECK(nlohmann::json::parse(*r1)["ok"] == false);
  p.write_line(wire::hello_request(5).dump());
  const auto r2 = p.read_line(std::chrono::seconds(5));
  REQUIRE(r2);
  CHECK(wire::parse_hello(*r2).version == wire::kProtocolVersion);
}

TEST_CASE("bridge-backed search reproduces in-process lattices") {
  std::mt19937_64 rng(77);
  const auto table = oracle::random_table(rng, 3, 3);
  const auto path = write_table(table, "bridge_search.json");
  const auto bridge = BridgeModel::launch(stub("--table " + path), 5);
  SearchConfig c;
  c.algorithm = Algorithm::bfs;
  c.budget = 20;
  c.max_len = 6;
  c.recomb.strategy = RecombStrategy::rcb;
  c.recomb.suffix_n = 1;
  const auto local = decode(table, {}, c);
  const auto remote = decode(*bridge, {}, c);
  CHECK(lattice_to_json(local.lattice) == lattice_to_json(remote.lattice));
}
