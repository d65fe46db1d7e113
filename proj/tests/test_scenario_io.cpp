#include "doctest.h"
#include "support.hpp"

#include "mevattr/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mevattr;
using namespace mevattr::testing;

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mevattr-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ErrorCode thrown_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("generation is a pure function of the spec") {
  ScenarioSpec spec = spec_with(42);
  spec.n_creators = 3;
  spec.competing_arbs = 1;
  const Scenario a = generate(spec);
  const Scenario b = generate(spec);
  CHECK(a.segment.blocks == b.segment.blocks);
  CHECK(a.segment.initial_state == b.segment.initial_state);
  CHECK(a.truth.arb_tx_hash == b.truth.arb_tx_hash);
  CHECK(a.truth.creator_hashes == b.truth.creator_hashes);

  spec.seed = 43;
  CHECK(generate(spec).truth.arb_tx_hash != a.truth.arb_tx_hash);
}

TEST_CASE("generated scenarios are well formed") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    ScenarioSpec spec = spec_with(seed);
    spec.n_creators = 1 + static_cast<int>(seed % 3);
    spec.competing_arbs = static_cast<int>(seed % 2);
    spec.route_length = seed % 4 == 0 ? 3 : 2;
    spec.n_blocks = 1;
    spec.n_blocks_max = 7;
    spec.noise_tx_per_block = 5;
    spec.noise_tx_max = 30;
    const Scenario sc = generate(spec);
    CAPTURE(seed);
    CHECK_NOTHROW(sc.segment.validate());
    CHECK(sc.segment.blocks.size() >= 1);
    CHECK(sc.segment.blocks.size() <= 7);
    CHECK(sc.truth.creator_hashes.size() == static_cast<std::size_t>(spec.n_creators));
    CHECK(sc.truth.competing_hashes.size() == static_cast<std::size_t>(spec.competing_arbs));
    CHECK(sc.truth.route.hops.size() == static_cast<std::size_t>(spec.route_length));

    const SegmentIndex index(sc.segment);
    const auto arb = index.find(sc.truth.arb_tx_hash);
    REQUIRE(arb);
    CHECK(index.entries()[*arb].position.block_number == sc.segment.blocks.back().number);
    for (const auto& h : sc.truth.creator_hashes) {
      CHECK(*index.find(h) < *arb);
    }
    // the final arbitrage classifies as atomic in its real pre-state
    const auto detections = detect(index, sc.prices);
    CHECK(std::any_of(detections.begin(), detections.end(),
                      [&](const Detection& d) { return d.tx_hash == sc.truth.arb_tx_hash; }));
    CHECK(detections.size() == 1 + sc.truth.competing_hashes.size());
  }
}

TEST_CASE("split modes set the expected source") {
  ScenarioSpec spec = spec_with(5);
  spec.n_creators = 2;
  spec.split = SplitMode::Symmetric;
  Scenario s = generate(spec);
  CHECK(s.truth.expected.kind == ExpectedSource::Kind::Tied);
  CHECK(s.truth.expected.txs.size() == 2);
  CHECK(s.truth.expected.txs == s.truth.creator_hashes);

  spec.split = SplitMode::Cascade;
  spec.imbalance_magnitude = 16;
  s = generate(spec);
  CHECK(s.truth.expected.kind == ExpectedSource::Kind::Tx);
  CHECK(s.truth.expected.txs.front() == s.truth.creator_hashes.front());

  spec.split = SplitMode::Auto;
  spec.imbalance_magnitude = Rational(6, 5);
  spec.preexisting = true;
  spec.n_creators = 0;
  s = generate(spec);
  CHECK(s.truth.expected.kind == ExpectedSource::Kind::PreExisting);

  CHECK(parse_split("cascade") == SplitMode::Cascade);
  CHECK(to_string(SplitMode::Dominant) == "dominant");
  CHECK_THROWS_AS(parse_split("nope"), Error);
}

TEST_CASE("infeasible specs are rejected") {
  auto rejects = [](auto mutate) {
    ScenarioSpec spec;
    mutate(spec);
    return thrown_code([&] { generate(spec); }) == ErrorCode::InfeasibleSpec;
  };
  CHECK(rejects([](ScenarioSpec& s) { s.imbalance_magnitude = 1; }));
  CHECK(rejects([](ScenarioSpec& s) { s.n_creators = 0; }));
  CHECK(rejects([](ScenarioSpec& s) { s.n_blocks = 0; }));
  CHECK(rejects([](ScenarioSpec& s) { s.n_pools = 1; }));
  CHECK(rejects([](ScenarioSpec& s) { s.split = SplitMode::Symmetric; }));
  CHECK(rejects([](ScenarioSpec& s) { s.route_length = 4; }));
}

TEST_CASE("file formats round trip") {
  ScenarioSpec spec = spec_with(9);
  spec.competing_arbs = 1;
  const Scenario sc = generate(spec);

  std::stringstream state;
  write_state(state, sc.segment.initial_state);
  CHECK(read_state(state) == sc.segment.initial_state);

  std::stringstream blocks;
  write_blocks(blocks, sc.segment.blocks);
  CHECK(read_blocks(blocks) == sc.segment.blocks);

  std::stringstream prices;
  write_prices(prices, sc.prices);
  const PriceTable back = read_prices(prices);
  CHECK(back.base_token == sc.prices.base_token);
  CHECK(back.prices == sc.prices.prices);

  std::stringstream truth;
  write_ground_truth(truth, {sc.truth});
  const auto truths = read_ground_truth(truth);
  REQUIRE(truths.size() == 1);
  CHECK(truths[0].seed == sc.truth.seed);
  CHECK(truths[0].arb_tx_hash == sc.truth.arb_tx_hash);
  CHECK(truths[0].expected.txs == sc.truth.expected.txs);
  CHECK(truths[0].competing_hashes == sc.truth.competing_hashes);
  CHECK(truths[0].route == sc.truth.route);
}

TEST_CASE("readers accept plain JSON numbers and report bad lines") {
  std::stringstream ok(
      R"({"number": 3, "txs": [{"tx_hash": "h", "sender": "s", "fee_tau": 1, "bid_beta": "2",)"
      R"( "swaps": [{"pool_id": "p", "token_in": "A", "amount_in": 10}]}]})"
      "\n\n");
  const auto blocks = read_blocks(ok);
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0].number == 3);
  CHECK(blocks[0].txs[0].swaps[0].amount_in == 10);
  CHECK(!blocks[0].txs[0].protocol_tag);

  std::stringstream bad("{\"number\": 1, \"txs\": []}\n{\"number\": 2, \"txs\": [\n");
  try {
    read_blocks(bad);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  std::stringstream bad_state(R"({"pools": [{"pool_id": "p"}]})");
  CHECK(thrown_code([&] { read_state(bad_state); }) == ErrorCode::ParseError);
  std::stringstream bad_int(R"({"pools": [{"pool_id": "p", "token0": "A", "token1": "B",)"
                            R"( "reserve0": "1x", "reserve1": "1", "fee_ppm": 3000}]})");
  CHECK(thrown_code([&] { read_state(bad_int); }) == ErrorCode::ParseError);
}

TEST_CASE("suites on disk") {
  const fs::path dir = scratch("suite");
  ScenarioSpec spec = spec_with(100);
  spec.noise_tx_per_block = 5;
  const Suite suite = combine(generate_suite(100, 4, spec));
  REQUIRE(suite.truths.size() == 4);
  save_suite(dir, suite);
  const ChainSegment seg = load_segment(dir / "blocks.jsonl", dir / "state.json");
  CHECK(seg.blocks == suite.segment.blocks);
  CHECK(seg.initial_state == suite.segment.initial_state);
  CHECK(load_ground_truth(dir / "ground_truth.json").size() == 4);
  CHECK(load_prices(dir / "prices.json").prices == suite.prices.prices);

  const SegmentIndex index(seg);
  for (const auto& t : suite.truths) {
    CHECK(index.find(t.arb_tx_hash));
  }
  for (std::size_t i = 1; i < seg.blocks.size(); ++i) {
    CHECK(seg.blocks[i - 1].number < seg.blocks[i].number);
  }

  // an empty suite is still a valid segment
  const fs::path empty = scratch("empty");
  save_suite(empty, combine({}));
  CHECK(slurp(empty / "blocks.jsonl").empty());
  CHECK(load_segment(empty / "blocks.jsonl", empty / "state.json").blocks.empty());
  CHECK(load_ground_truth(empty / "ground_truth.json").empty());

  CHECK(thrown_code([&] { load_segment(dir / "missing.jsonl", dir / "state.json"); }) ==
        ErrorCode::ParseError);
}
