#include "mevattr/amm.hpp"

namespace mevattr {

void PoolState::validate() const {
  if (pool_id.empty() || token0.empty() || token1.empty()) {
    throw Error(ErrorCode::InvalidArgument, "pool with empty identifier");
  }
  if (token0 == token1) {
    throw Error(ErrorCode::InvalidArgument, "pool " + pool_id.str() + " has identical tokens");
  }
  if (fee_ppm >= kFeeDenominator) {
    throw Error(ErrorCode::InvalidArgument, "pool " + pool_id.str() + " fee_ppm out of range");
  }
  if (reserve0 < 0 || reserve1 < 0) {
    throw Error(ErrorCode::InvalidArgument, "pool " + pool_id.str() + " has a negative reserve");
  }
}

const PoolState* WorldState::find(const PoolId& id) const {
  auto it = pools.find(id);
  return it == pools.end() ? nullptr : &it->second;
}

PoolState* WorldState::find(const PoolId& id) {
  auto it = pools.find(id);
  return it == pools.end() ? nullptr : &it->second;
}

const PoolState& WorldState::at(const PoolId& id) const {
  const PoolState* p = find(id);
  if (p == nullptr) {
    throw Error(ErrorCode::MissingPool, id.str());
  }
  return *p;
}

void WorldState::put(PoolState pool) {
  PoolId id = pool.pool_id;
  pools.insert_or_assign(std::move(id), std::move(pool));
}

std::vector<PoolId> ArbRoute::pool_ids() const {
  std::vector<PoolId> ids;
  ids.reserve(hops.size());
  for (const auto& h : hops) {
    ids.push_back(h.pool_id);
  }
  return ids;
}

Int amount_out(const Int& reserve_in, const Int& reserve_out, std::uint32_t fee_ppm,
               const Int& amount_in) {
  const Int effective = amount_in * (kFeeDenominator - fee_ppm) / kFeeDenominator;
  if (effective == 0) {
    return 0;
  }
  return reserve_out * effective / (reserve_in + effective);
}

SwapResult swap_exact_in(const PoolState& pool, const TokenId& token_in, const Int& amount_in) {
  if (!pool.has_token(token_in)) {
    throw Error(ErrorCode::UnknownToken, token_in.str() + " not in pool " + pool.pool_id.str());
  }
  if (amount_in <= 0) {
    throw Error(ErrorCode::InvalidArgument, "amount_in must be positive");
  }
  if (pool.reserve0 <= 0 || pool.reserve1 <= 0) {
    throw Error(ErrorCode::EmptyPool, pool.pool_id.str());
  }
  const bool zero_for_one = token_in == pool.token0;
  const Int& r_in = zero_for_one ? pool.reserve0 : pool.reserve1;
  const Int& r_out = zero_for_one ? pool.reserve1 : pool.reserve0;

  SwapResult result{amount_in, amount_out(r_in, r_out, pool.fee_ppm, amount_in), pool};
  if (zero_for_one) {
    result.new_pool.reserve0 += amount_in;
    result.new_pool.reserve1 -= result.amount_out;
  } else {
    result.new_pool.reserve1 += amount_in;
    result.new_pool.reserve0 -= result.amount_out;
  }
  return result;
}

Rational spot_rate(const PoolState& pool, const TokenId& token_in, bool include_fee) {
  if (!pool.has_token(token_in)) {
    throw Error(ErrorCode::UnknownToken, token_in.str() + " not in pool " + pool.pool_id.str());
  }
  if (pool.reserve0 <= 0 || pool.reserve1 <= 0) {
    throw Error(ErrorCode::EmptyPool, pool.pool_id.str());
  }
  const bool zero_for_one = token_in == pool.token0;
  Rational rate(zero_for_one ? pool.reserve1 : pool.reserve0,
                zero_for_one ? pool.reserve0 : pool.reserve1);
  if (include_fee) {
    rate *= Rational(kFeeDenominator - pool.fee_ppm, kFeeDenominator);
  }
  return rate;
}

void validate_route(const WorldState& state, const ArbRoute& route) {
  if (route.hops.size() < 2) {
    throw Error(ErrorCode::BrokenCycle, "route needs at least two hops");
  }
  for (std::size_t i = 0; i < route.hops.size(); ++i) {
    const RouteHop& hop = route.hops[i];
    const PoolState& pool = state.at(hop.pool_id);
    if (!pool.has_token(hop.token_in) || pool.other(hop.token_in) != hop.token_out) {
      throw Error(ErrorCode::BrokenCycle,
                  "hop " + std::to_string(i) + " tokens do not match pool " + hop.pool_id.str());
    }
    const RouteHop& next = route.hops[(i + 1) % route.hops.size()];
    if (hop.token_out != next.token_in) {
      throw Error(ErrorCode::BrokenCycle, "hop " + std::to_string(i) + " output " +
                                              hop.token_out.str() + " does not feed the next hop");
    }
  }
}

Rational cycle_coefficient(const WorldState& state, const ArbRoute& route, bool include_fee) {
  validate_route(state, route);
  Rational k = 1;
  for (const auto& hop : route.hops) {
    k *= spot_rate(state.at(hop.pool_id), hop.token_in, include_fee);
  }
  return k;
}

}  // namespace mevattr
