#include "mevattr/arb.hpp"

#include <set>

namespace mevattr {

const Rational& PriceTable::price(const TokenId& token) const {
  auto it = prices.find(token);
  if (it == prices.end()) {
    throw Error(ErrorCode::MissingPrice, token.str());
  }
  return it->second;
}

void PriceTable::validate() const {
  if (price(base_token) != 1) {
    throw Error(ErrorCode::InvalidArgument, "base token " + base_token.str() + " must be priced at 1");
  }
  for (const auto& [token, p] : prices) {
    if (p <= 0) {
      throw Error(ErrorCode::InvalidArgument, "non-positive price for " + token.str());
    }
  }
}

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::MultiSwap: return "MultiSwap";
    case Criterion::Sufficiency: return "Sufficiency";
    case Criterion::Profitability: return "Profitability";
  }
  return "?";
}

std::string_view to_string(ReplayMode m) {
  return m == ReplayMode::FixedAmounts ? "fixed" : "optimal";
}

namespace {

Rational value_of(const std::map<TokenId, Int>& net, const PriceTable& prices) {
  Rational total = 0;
  for (const auto& [token, delta] : net) {
    total += Rational(delta) * prices.price(token);
  }
  return total;
}

std::map<TokenId, Int> net_from_fills(const std::vector<SwapFill>& fills) {
  std::map<TokenId, Int> net;
  for (const auto& f : fills) {
    net[f.token_in] -= f.amount_in;
    net[f.token_out] += f.amount_out;
  }
  return net;
}

// Hop parameters of a route over distinct pools, flattened for the amount search.
struct Curve {
  std::vector<Int> r_in;
  std::vector<Int> r_out;
  std::vector<std::uint32_t> fee;

  Int out(Int a) const {
    for (std::size_t i = 0; i < r_in.size() && a > 0; ++i) {
      a = amount_out(r_in[i], r_out[i], fee[i], a);
    }
    return a;
  }
  Int net(const Int& a) const { return out(a) - a; }
};

// Sequential execution with a scratch copy; handles routes that revisit a pool.
Int route_output(const WorldState& state, const ArbRoute& route, const Int& amount_in) {
  std::map<PoolId, PoolState> scratch;
  Int a = amount_in;
  for (const auto& hop : route.hops) {
    if (a <= 0) {
      return 0;
    }
    auto it = scratch.find(hop.pool_id);
    if (it == scratch.end()) {
      it = scratch.emplace(hop.pool_id, state.at(hop.pool_id)).first;
    }
    SwapResult r = swap_exact_in(it->second, hop.token_in, a);
    it->second = std::move(r.new_pool);
    a = r.amount_out;
  }
  return a;
}

template <typename Net>
std::pair<Int, Int> ternary_max(Int lo, Int hi, const Net& net) {
  while (hi - lo > 2) {
    const Int third = (hi - lo) / 3;
    const Int m1 = lo + third;
    const Int m2 = hi - third;
    if (net(m1) < net(m2)) {
      lo = m1 + 1;
    } else {
      hi = m2 - 1;
    }
  }
  Int best_a = lo;
  Int best = net(lo);
  for (Int a = lo + 1; a <= hi; ++a) {
    Int v = net(a);
    if (v > best) {
      best = std::move(v);
      best_a = a;
    }
  }
  return {best_a, best};
}

// Consider a with net(a), keeping the larger net and the smaller amount on ties.
void offer(std::pair<Int, Int>& best, const Int& a, const Int& v) {
  if (v > best.second || (v == best.second && a < best.first)) {
    best = {a, v};
  }
}

constexpr unsigned kExactWindow = 16384;

}  // namespace

ArbClassification classify(const Transaction& tx, const WorldState& state_before,
                           const PriceTable& prices) {
  ArbClassification c;
  c.n_swaps = static_cast<int>(tx.swaps.size());
  WorldState scratch = state_before;
  TxReceipt receipt = apply_tx_in_place(scratch, tx);
  c.reverted = receipt.reverted;
  if (receipt.reverted) {
    for (const auto& s : tx.swaps) {
      prices.price(s.token_in);
    }
    c.profit = -Rational(tx.fee_tau + tx.bid_beta);
    c.failed_criterion = c.n_swaps < 2 ? Criterion::MultiSwap : Criterion::Sufficiency;
    return c;
  }
  c.net_changes = net_from_fills(receipt.fills);
  c.gross_value = value_of(c.net_changes, prices);
  c.profit = c.gross_value - Rational(tx.fee_tau) - Rational(tx.bid_beta);
  bool sufficient = true;
  for (const auto& [token, delta] : c.net_changes) {
    sufficient = sufficient && delta >= 0;
  }
  if (c.n_swaps < 2) {
    c.failed_criterion = Criterion::MultiSwap;
  } else if (!sufficient) {
    c.failed_criterion = Criterion::Sufficiency;
  } else if (c.profit <= 0) {
    c.failed_criterion = Criterion::Profitability;
  }
  c.is_atomic_arb = !c.failed_criterion.has_value();
  return c;
}

ArbRoute extract_route(const Transaction& tx, const WorldState& state) {
  if (tx.swaps.size() < 2) {
    throw Error(ErrorCode::NotACycle, tx.tx_hash.str() + " has fewer than two swaps");
  }
  ArbRoute route;
  std::set<TokenId> inputs;
  for (const auto& s : tx.swaps) {
    const PoolState& pool = state.at(s.pool_id);
    if (!pool.has_token(s.token_in)) {
      throw Error(ErrorCode::NotACycle, tx.tx_hash.str() + " swaps a token its pool does not hold");
    }
    if (!inputs.insert(s.token_in).second) {
      throw Error(ErrorCode::NotACycle, tx.tx_hash.str() + " visits " + s.token_in.str() + " twice");
    }
    route.hops.push_back({s.pool_id, s.token_in, pool.other(s.token_in)});
  }
  try {
    validate_route(state, route);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BrokenCycle) {
      throw;
    }
    throw Error(ErrorCode::NotACycle, tx.tx_hash.str() + " swaps do not close a cycle");
  }
  return route;
}

Rational profit_of_route(const WorldState& state, const ArbRoute& route, const Int& amount_in,
                         const PriceTable& prices) {
  validate_route(state, route);
  if (amount_in < 0) {
    throw Error(ErrorCode::InvalidArgument, "negative amount_in");
  }
  if (amount_in == 0) {
    return 0;
  }
  const Int out = route_output(state, route, amount_in);
  return Rational(out - amount_in) * prices.price(route.start_token());
}

std::pair<Int, Int> optimal_net(const WorldState& state, const ArbRoute& route) {
  validate_route(state, route);
  const std::pair<Int, Int> none{0, 0};

  std::set<PoolId> distinct;
  Curve curve;
  for (const auto& hop : route.hops) {
    const PoolState& pool = state.at(hop.pool_id);
    if (pool.reserve0 <= 0 || pool.reserve1 <= 0) {
      return none;
    }
    distinct.insert(hop.pool_id);
    const bool zero_for_one = hop.token_in == pool.token0;
    curve.r_in.push_back(zero_for_one ? pool.reserve0 : pool.reserve1);
    curve.r_out.push_back(zero_for_one ? pool.reserve1 : pool.reserve0);
    curve.fee.push_back(pool.fee_ppm);
  }

  if (distinct.size() != route.hops.size()) {
    // A pool used twice sees its own earlier swap; fall back to a plain search on the real path.
    auto net = [&](const Int& a) { return route_output(state, route, a) - a; };
    Int cap = curve.r_in.front();
    for (const auto& r : curve.r_in) {
      cap = std::min(cap, r);
    }
    std::pair<Int, Int> best = ternary_max(Int(1), cap, net);
    for (int d = -1; d <= 1; ++d) {
      const Int a = best.first + d;
      if (a >= 1 && a <= cap) {
        offer(best, a, net(a));
      }
    }
    return best.second > 0 ? best : none;
  }

  // Without flooring the route output is A x / (B + C x). Every floored output lies on or below
  // that curve, so net(x) <= env(x) = A x / (B + C x) - x, which is concave.
  Int A = 1, B = 1, C = 0;
  for (std::size_t i = 0; i < curve.r_in.size(); ++i) {
    const Int g = kFeeDenominator - curve.fee[i];
    const Int b = curve.r_in[i] * kFeeDenominator;
    C = b * C + g * A;
    A *= curve.r_out[i] * g;
    B *= b;
  }
  if (A <= B) {
    return none;
  }
  const Int cap = (A - B) / C;  // env(x) <= 0 beyond this
  if (cap < 1) {
    return none;
  }
  auto env_at_least = [&](const Int& a, const Int& t) {
    const Int denom = B + C * a;
    return A * a - a * denom >= t * denom;
  };

  Int peak = (isqrt(A * B) - B) / C;
  if (peak < 1) {
    peak = 1;
  }
  if (peak > cap) {
    peak = cap;
  }
  std::pair<Int, Int> best{peak, curve.net(peak)};
  for (int d = -1; d <= 1; d += 2) {
    const Int a = peak + d;
    if (a >= 1 && a <= cap) {
      offer(best, a, curve.net(a));
    }
  }

  // Any amount that beats the best sample must have env >= t.
  const Int t = best.second > 1 ? best.second : Int(1);
  Int p = peak;
  if (!env_at_least(p, t)) {
    if (p + 1 <= cap && env_at_least(p + 1, t)) {
      p += 1;
    } else {
      return none;
    }
  }
  Int lo = 1, hi = p;  // first point with env >= t in [1, p]
  while (lo < hi) {
    const Int mid = (lo + hi) / 2;
    if (env_at_least(mid, t)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  const Int window_lo = lo;
  lo = p;
  hi = cap;  // last point with env >= t in [p, cap]
  while (lo < hi) {
    const Int mid = (lo + hi + 1) / 2;
    if (env_at_least(mid, t)) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  const Int window_hi = lo;

  if (window_hi - window_lo < kExactWindow) {
    for (Int a = window_lo; a <= window_hi; ++a) {
      offer(best, a, curve.net(a));
    }
  } else {
    auto net = [&](const Int& a) { return curve.net(a); };
    std::pair<Int, Int> found = ternary_max(window_lo, window_hi, net);
    offer(best, found.first, found.second);
    for (int d = -1; d <= 1; d += 2) {
      const Int a = found.first + d;
      if (a >= window_lo && a <= window_hi) {
        offer(best, a, curve.net(a));
      }
    }
  }
  return best.second > 0 ? best : none;
}

OptimalArb optimal_arbitrage(const WorldState& state, const ArbRoute& route,
                             const PriceTable& prices) {
  auto [amount, net] = optimal_net(state, route);
  if (net <= 0) {
    return {0, 0};
  }
  return {amount, Rational(net) * prices.price(route.start_token())};
}

Rational mev_profit(const WorldState& state, const Transaction& arb_tx, const ArbRoute& route,
                    ReplayMode mode, const PriceTable& prices) {
  const Rational costs = Rational(arb_tx.fee_tau + arb_tx.bid_beta);
  if (mode == ReplayMode::OptimalAmount) {
    return optimal_arbitrage(state, route, prices).profit_star - costs;
  }
  WorldState scratch;
  for (const auto& hop : route.hops) {
    scratch.pools.emplace(hop.pool_id, state.at(hop.pool_id));
  }
  TxReceipt receipt = apply_tx_in_place(scratch, arb_tx);
  if (receipt.reverted) {
    return -costs;
  }
  return value_of(net_from_fills(receipt.fills), prices) - costs;
}

Rational mev_profit(const WorldState& state, const Transaction& arb_tx, ReplayMode mode,
                    const PriceTable& prices) {
  return mev_profit(state, arb_tx, extract_route(arb_tx, state), mode, prices);
}

}  // namespace mevattr
