#pragma once

#include "mevattr/arb.hpp"

#include <cstdint>
#include <vector>

namespace mevattr {

/// How the opportunity is spread over several creator transactions.
enum class SplitMode {
  Auto,       // Dominant when there are two or more creators
  Dominant,   // one large move plus small same-direction moves
  Symmetric,  // identical swaps in the same pool; the creators are exactly tied
  Cascade,    // a large move followed by a smaller-profit move that raises k more
};
std::string_view to_string(SplitMode m);
SplitMode parse_split(std::string_view name);

struct ScenarioSpec {
  std::uint64_t seed = 42;
  int n_pools = 4;
  int n_blocks = 5;
  int n_blocks_max = 0;          // > n_blocks: drawn uniformly per scenario
  int noise_tx_per_block = 20;
  int noise_tx_max = 0;          // > noise_tx_per_block: drawn uniformly per scenario
  int n_creators = 1;
  int competing_arbs = 0;
  Rational imbalance_magnitude{6, 5};  // fee-inclusive cycle coefficient after the creators
  std::uint32_t fee_ppm = 3000;
  bool preexisting = false;
  SplitMode split = SplitMode::Auto;
  int route_length = 2;

  /// Throws InfeasibleSpec.
  void validate() const;
};

struct ExpectedSource {
  enum class Kind { Tx, PreExisting, Tied };
  Kind kind = Kind::Tx;
  std::vector<TxHash> txs;  // one for Tx, the tied set for Tied
};
std::string_view to_string(ExpectedSource::Kind k);

struct GroundTruth {
  std::uint64_t seed = 0;
  TxHash arb_tx_hash;
  ExpectedSource expected;
  std::vector<TxHash> creator_hashes;
  std::vector<TxHash> competing_hashes;
  ArbRoute route;
};

struct Scenario {
  ChainSegment segment;
  PriceTable prices;
  GroundTruth truth;
};

/// Builds one scenario; a pure function of spec. Throws InfeasibleSpec.
Scenario generate(const ScenarioSpec& spec);

/// Scenarios for seeds base_seed .. base_seed + n - 1 of the template.
std::vector<Scenario> generate_suite(std::uint64_t base_seed, std::size_t n,
                                     const ScenarioSpec& spec_template);

struct Suite {
  ChainSegment segment;
  PriceTable prices;
  std::vector<GroundTruth> truths;
};

/// Lays the scenarios out one after another in a single segment (block numbers renumbered).
Suite combine(const std::vector<Scenario>& scenarios);

/// Fixed token universe prices used by the generator.
PriceTable scenario_prices();

}  // namespace mevattr
