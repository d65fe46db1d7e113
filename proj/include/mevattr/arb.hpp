#pragma once

#include "mevattr/chain.hpp"

#include <map>
#include <optional>

namespace mevattr {

/// Base-token price per smallest unit of each token. The base token is priced at exactly 1.
struct PriceTable {
  TokenId base_token;
  std::map<TokenId, Rational> prices;

  /// Throws MissingPrice.
  const Rational& price(const TokenId& token) const;
  /// Throws InvalidArgument when the base token is not priced at 1 or a price is not positive.
  void validate() const;
};

enum class Criterion { MultiSwap, Sufficiency, Profitability };
std::string_view to_string(Criterion c);

struct ArbClassification {
  bool is_atomic_arb = false;
  int n_swaps = 0;
  std::map<TokenId, Int> net_changes;
  Rational gross_value;
  Rational profit;
  std::optional<Criterion> failed_criterion;
  bool reverted = false;
};

enum class ReplayMode { FixedAmounts, OptimalAmount };
std::string_view to_string(ReplayMode m);

struct OptimalArb {
  Int amount_star;
  Rational profit_star;
};

/// Executes tx against state_before and checks the multi-swap, sufficiency and profitability
/// criteria in that order; the first failing one is reported. Throws MissingPrice.
ArbClassification classify(const Transaction& tx, const WorldState& state_before,
                           const PriceTable& prices);

/// Route taken by the transaction's swaps, in order. Throws NotACycle unless the swaps form a
/// single closed cycle of length >= 2.
ArbRoute extract_route(const Transaction& tx, const WorldState& state);

/// (final output - amount_in) * P(start token), executing the hops one after another.
Rational profit_of_route(const WorldState& state, const ArbRoute& route, const Int& amount_in,
                         const PriceTable& prices);

/// Integer amount maximising profit_of_route; (0, 0) when no amount makes a profit.
/// Among equal maxima the smallest amount is returned.
OptimalArb optimal_arbitrage(const WorldState& state, const ArbRoute& route,
                             const PriceTable& prices);

/// Same search, returning the best amount and its net gain in start-token units.
std::pair<Int, Int> optimal_net(const WorldState& state, const ArbRoute& route);

/// Profit the arbitrage would make in state, net of its declared fee and bid.
Rational mev_profit(const WorldState& state, const Transaction& arb_tx, ReplayMode mode,
                    const PriceTable& prices);
/// Overload with a pre-extracted route (skips extraction in hot loops).
Rational mev_profit(const WorldState& state, const Transaction& arb_tx, const ArbRoute& route,
                    ReplayMode mode, const PriceTable& prices);

}  // namespace mevattr
