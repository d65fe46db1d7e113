#pragma once

#include "mevattr/ids.hpp"
#include "mevattr/numeric.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace mevattr {

inline constexpr std::uint32_t kFeeDenominator = 1'000'000;

/// Constant-product (x*y=k) pool. Reserves are in smallest token units.
struct PoolState {
  PoolId pool_id;
  TokenId token0;
  TokenId token1;
  Int reserve0;
  Int reserve1;
  std::uint32_t fee_ppm = 0;

  bool has_token(const TokenId& t) const { return t == token0 || t == token1; }
  const TokenId& other(const TokenId& t) const { return t == token0 ? token1 : token0; }
  /// Throws InvalidArgument when the invariants on tokens/fee/reserves are violated.
  void validate() const;

  friend bool operator==(const PoolState&, const PoolState&) = default;
};

struct SwapResult {
  Int amount_in;
  Int amount_out;
  PoolState new_pool;
};

/// Value-semantics snapshot of every pool; copying never aliases.
struct WorldState {
  std::map<PoolId, PoolState> pools;

  const PoolState* find(const PoolId& id) const;
  PoolState* find(const PoolId& id);
  /// Throws MissingPool.
  const PoolState& at(const PoolId& id) const;
  void put(PoolState pool);

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

struct RouteHop {
  PoolId pool_id;
  TokenId token_in;
  TokenId token_out;

  friend bool operator==(const RouteHop&, const RouteHop&) = default;
};

/// Closed swap cycle; the first hop's input token is the token the profit accrues in.
struct ArbRoute {
  std::vector<RouteHop> hops;

  const TokenId& start_token() const { return hops.front().token_in; }
  std::vector<PoolId> pool_ids() const;

  friend bool operator==(const ArbRoute&, const ArbRoute&) = default;
};

/// out = floor(r_out * a_eff / (r_in + a_eff)), a_eff = floor(amount_in * (1e6 - fee) / 1e6).
SwapResult swap_exact_in(const PoolState& pool, const TokenId& token_in, const Int& amount_in);

/// Output amount only; same arithmetic as swap_exact_in without building the new pool.
Int amount_out(const Int& reserve_in, const Int& reserve_out, std::uint32_t fee_ppm,
               const Int& amount_in);

/// Marginal rate r_out / r_in, times (1 - fee) when include_fee.
Rational spot_rate(const PoolState& pool, const TokenId& token_in, bool include_fee);

/// Checks the hops form a closed cycle over pools present in state. Throws BrokenCycle / MissingPool.
void validate_route(const WorldState& state, const ArbRoute& route);

/// Product of spot rates around the cycle.
Rational cycle_coefficient(const WorldState& state, const ArbRoute& route, bool include_fee = false);

}  // namespace mevattr
