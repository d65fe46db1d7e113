#pragma once

// Test helpers and brute-force oracles. The oracles only use full replays from the initial
// state (replay_prefix / replay_with_subset), never the windowed replay under test.

#include "mevattr/attribution.hpp"
#include "mevattr/pipeline.hpp"
#include "mevattr/scenario.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <unordered_set>
#include <vector>

namespace mevattr::testing {

inline PoolState pool(const char* id, const char* t0, const char* t1, Int r0, Int r1,
                      std::uint32_t fee = 3000) {
  return PoolState{id, t0, t1, std::move(r0), std::move(r1), fee};
}

inline SwapIntent swap(const char* pool_id, const char* token_in, Int amount) {
  return SwapIntent{pool_id, token_in, std::move(amount)};
}

inline Transaction tx(const char* hash, std::vector<SwapIntent> swaps, Int tau = 0, Int beta = 0) {
  Transaction t;
  t.tx_hash = hash;
  t.sender = std::string("sender-") + hash;
  t.swaps = std::move(swaps);
  t.fee_tau = std::move(tau);
  t.bid_beta = std::move(beta);
  return t;
}

inline PriceTable unit_prices(std::initializer_list<const char*> tokens) {
  PriceTable p;
  p.base_token = *tokens.begin();
  for (const char* t : tokens) {
    p.prices[t] = 1;
  }
  return p;
}

/// Boundary immediately before pos.
inline Position just_before(const Position& pos) { return {pos.block_number, pos.tx_index - 1}; }

/// Everything needed to run one method on a scenario's arbitrage.
struct Fixture {
  Scenario scenario;
  SegmentIndex index;
  AttributionContext ctx;
  ArbEvent event;
  CandidateSet candidates;

  explicit Fixture(Scenario s, std::int64_t depth = kDefaultDepth,
                   ReplayMode mode = ReplayMode::OptimalAmount)
      : scenario(std::move(s)),
        index(scenario.segment),
        ctx{index, scenario.prices, mode},
        event(make_event(ctx, arb_position())),
        candidates(filter_candidates(index, event.position, depth)) {}

  Fixture(const Fixture&) = delete;

  Position arb_position() const {
    return index.entries()[*index.find(scenario.truth.arb_tx_hash)].position;
  }
};

/// V(S): profit of the arbitrage after replaying every transaction before it except the
/// candidates outside `kept`.
inline Rational coalition_value(const Fixture& f, const std::vector<bool>& kept) {
  std::unordered_set<TxHash> include;
  for (std::size_t e = 0; e < f.event.entry; ++e) {
    include.insert(f.index.entries()[e].tx->tx_hash);
  }
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (!kept[i]) {
      include.erase(f.candidates.items[i].tx_hash);
    }
  }
  const WorldState s = replay_with_subset(f.scenario.segment, include, just_before(f.event.position));
  return mev_profit(s, *f.event.tx, f.event.route, f.ctx.mode, f.ctx.prices);
}

/// Shapley values straight from the permutation definition (n! orderings).
inline std::vector<Rational> shapley_by_permutations(const Fixture& f) {
  const std::size_t n = f.candidates.items.size();
  std::vector<std::optional<Rational>> memo(std::size_t{1} << n);
  auto value = [&](std::uint32_t mask) {
    if (!memo[mask]) {
      std::vector<bool> kept(n);
      for (std::size_t i = 0; i < n; ++i) {
        kept[i] = (mask >> i) & 1;
      }
      memo[mask] = coalition_value(f, kept);
    }
    return *memo[mask];
  };
  std::vector<Rational> phi(n, Rational(0));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t count = 0;
  do {
    std::uint32_t mask = 0;
    for (std::size_t i : order) {
      const Rational before = value(mask);
      mask |= std::uint32_t{1} << i;
      phi[i] += value(mask) - before;
    }
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& p : phi) {
    p /= static_cast<long long>(count);
  }
  return phi;
}

/// Backward edge search done the slow way: every prefix profit from a full replay, scanned
/// linearly from the arbitrage towards the window start.
inline AttributionResult linear_simulation(const Fixture& f, const Rational& threshold = Rational(1, 20)) {
  AttributionResult r;
  r.method = Method::Simulation;
  r.arb_tx_hash = f.event.tx->tx_hash;
  r.arb_position = f.event.position;
  r.pi = f.event.pi;
  r.source = Source::none();
  r.attributed_value = 0;
  if (f.event.pi <= 0) {
    return r;
  }
  const auto& items = f.candidates.items;
  const std::size_t m = items.size();
  auto prefix = [&](std::size_t j) {
    Position upto;
    if (j == m) {
      upto = just_before(f.event.position);
    } else if (j == 0) {
      upto = just_before(items[0].position);
    } else {
      upto = items[j - 1].position;
    }
    const WorldState s = replay_prefix(f.scenario.segment, upto);
    return mev_profit(s, *f.event.tx, f.event.route, f.ctx.mode, f.ctx.prices);
  };
  std::vector<Rational> p(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    p[j] = prefix(j);
  }
  const Rational bar = threshold * f.event.pi;
  std::optional<std::size_t> edge;
  for (std::size_t j = m + 1; j-- > 0;) {
    if (p[j] <= bar) {
      edge = j;
      break;
    }
  }
  if (!edge) {
    r.source = Source::pre_existing();
    r.attributed_value = p[0];
    return r;
  }
  Rational best = 0;
  for (std::size_t j = m; j > *edge; --j) {
    const Rational impact = p[j] - p[j - 1];
    if (impact > best) {
      best = impact;
      r.source = Source::tx(items[j - 1].tx_hash);
      r.attributed_value = impact;
    }
  }
  return r;
}

/// Best (amount, net) over every integer input 1..limit, smallest amount on ties, in machine
/// integers. Reserves and amounts must stay below ~3e9 so the products fit.
inline std::pair<std::int64_t, std::int64_t> grid_optimum(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& hops, std::uint32_t fee,
    std::int64_t limit) {
  const std::int64_t g = kFeeDenominator - fee;
  std::int64_t best_amount = 0, best_net = 0;
  for (std::int64_t a = 1; a <= limit; ++a) {
    std::int64_t x = a;
    for (const auto& [r_in, r_out] : hops) {
      const std::int64_t eff = x * g / kFeeDenominator;
      x = r_out * eff / (r_in + eff);
    }
    if (x - a > best_net) {
      best_net = x - a;
      best_amount = a;
    }
  }
  return {best_amount, best_net};
}

inline ScenarioSpec spec_with(std::uint64_t seed) {
  ScenarioSpec s;
  s.seed = seed;
  return s;
}

}  // namespace mevattr::testing
