#include "mevattr/scenario.hpp"

#include "mevattr/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace mevattr {

std::string_view to_string(SplitMode m) {
  switch (m) {
    case SplitMode::Auto: return "auto";
    case SplitMode::Dominant: return "dominant";
    case SplitMode::Symmetric: return "symmetric";
    case SplitMode::Cascade: return "cascade";
  }
  return "?";
}

SplitMode parse_split(std::string_view name) {
  for (SplitMode m : {SplitMode::Auto, SplitMode::Dominant, SplitMode::Symmetric, SplitMode::Cascade}) {
    if (to_string(m) == name) {
      return m;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown split mode '" + std::string(name) + "'");
}

std::string_view to_string(ExpectedSource::Kind k) {
  switch (k) {
    case ExpectedSource::Kind::Tx: return "tx";
    case ExpectedSource::Kind::PreExisting: return "pre_existing";
    case ExpectedSource::Kind::Tied: return "tied";
  }
  return "?";
}

namespace {

constexpr std::array<const char*, 6> kRouteTokens = {"WMATIC", "USDC", "WETH", "DAI", "WBTC", "LINK"};
constexpr std::array<const char*, 6> kNoiseTokens = {"AAVE", "CRV", "SUSHI", "GHST", "QUICK", "BAL"};
constexpr std::array<const char*, 5> kProtocols = {"uniswap-v2", "quickswap", "sushiswap", "dfyn",
                                                   "apeswap"};

void infeasible(const std::string& why) { throw Error(ErrorCode::InfeasibleSpec, why); }

std::string address(std::string_view role, std::int64_t k) {
  return "0x" + sha256_hex(std::string(role) + ":" + std::to_string(k)).substr(0, 40);
}

Int random_reserve(std::mt19937_64& rng) {
  Int r = uniform_int(rng, 1000, 9999);
  const std::int64_t exponent = uniform_int(rng, 17, 20);
  for (std::int64_t i = 0; i < exponent; ++i) {
    r *= 10;
  }
  return r;
}

// Cross-multiplied cycle coefficient: k = num / den.
std::pair<Int, Int> coefficient_parts(const WorldState& state, const ArbRoute& route, bool include_fee) {
  Int num = 1, den = 1;
  for (const auto& hop : route.hops) {
    const PoolState& p = state.at(hop.pool_id);
    const bool zero_for_one = hop.token_in == p.token0;
    num *= zero_for_one ? p.reserve1 : p.reserve0;
    den *= zero_for_one ? p.reserve0 : p.reserve1;
    if (include_fee) {
      num *= kFeeDenominator - p.fee_ppm;
      den *= kFeeDenominator;
    }
  }
  return {num, den};
}

// k >= target_num / target_den
bool k_at_least(const WorldState& state, const ArbRoute& route, bool include_fee,
                const Int& target_num, const Int& target_den) {
  auto [num, den] = coefficient_parts(state, route, include_fee);
  return num * target_den >= target_num * den;
}

std::pair<Int, Int> double_ratio(double x) {
  const Int den = Int(1) << 52;
  return {Int(static_cast<std::int64_t>(std::llround(std::ldexp(x, 52)))), den};
}

// Swap pushing the route's rate at hop up: sell the hop's output token into its pool.
SwapIntent push_swap(const ArbRoute& route, std::size_t hop, const Int& amount) {
  return {route.hops[hop].pool_id, route.hops[hop].token_out, amount};
}

WorldState apply_swaps(WorldState state, const std::vector<SwapIntent>& swaps) {
  for (const auto& s : swaps) {
    PoolState& p = state.pools.at(s.pool_id);
    p = swap_exact_in(p, s.token_in, s.amount_in).new_pool;
  }
  return state;
}

// Smallest amount (repeated `copies` times) whose swaps make reached(state) true.
template <typename Pred>
Int solve_amount(const WorldState& state, const ArbRoute& route, std::size_t hop, int copies,
                 const Pred& reached) {
  auto after = [&](const Int& a) {
    std::vector<SwapIntent> swaps(static_cast<std::size_t>(copies), push_swap(route, hop, a));
    return apply_swaps(state, swaps);
  };
  const PoolState& pool = state.at(route.hops[hop].pool_id);
  const Int limit = (pool.reserve0 + pool.reserve1) * 1000;
  Int hi = 1;
  while (!reached(after(hi))) {
    hi *= 2;
    if (hi > limit) {
      infeasible("imbalance unreachable at the generated reserves");
    }
  }
  Int lo = hi / 2 + 1;
  if (hi == 1) {
    lo = 1;
  }
  while (lo < hi) {
    const Int mid = (lo + hi) / 2;
    if (reached(after(mid))) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return hi;
}

Int net_profit_units(const WorldState& state, const ArbRoute& route) {
  return optimal_net(state, route).second;
}

struct Special {
  enum class Role { Creator, Competitor, Arb } role;
  Transaction tx;
};

class Builder {
 public:
  explicit Builder(const ScenarioSpec& spec) : spec_(spec), rng_(spec.seed), prices_(scenario_prices()) {}

  Scenario build() {
    const int n_blocks = spec_.n_blocks_max > spec_.n_blocks
                             ? static_cast<int>(uniform_int(rng_, spec_.n_blocks, spec_.n_blocks_max))
                             : spec_.n_blocks;
    const int noise = spec_.noise_tx_max > spec_.noise_tx_per_block
                          ? static_cast<int>(uniform_int(rng_, spec_.noise_tx_per_block, spec_.noise_tx_max))
                          : spec_.noise_tx_per_block;
    make_pools();
    make_creators();
    make_competitors();
    make_arb();
    place(n_blocks, noise);
    scenario_.prices = prices_;
    scenario_.truth.seed = spec_.seed;
    scenario_.truth.route = route_;
    return std::move(scenario_);
  }

 private:
  std::string pool_id(char kind, int j) const {
    return "s" + std::to_string(spec_.seed) + "-" + kind + std::to_string(j);
  }

  void make_pools() {
    std::vector<const char*> tokens(kRouteTokens.begin(), kRouteTokens.end());
    shuffle(tokens);
    const int len = spec_.route_length;
    for (int j = 0; j < len; ++j) {
      const TokenId a = tokens[static_cast<std::size_t>(j)];
      const TokenId b = len == 2 ? TokenId(tokens[1 - static_cast<std::size_t>(j)])
                                 : TokenId(tokens[static_cast<std::size_t>((j + 1) % len)]);
      PoolState p;
      p.pool_id = pool_id('r', j);
      const bool flip = uniform_below(rng_, 2) == 1;
      p.token0 = flip ? b : a;
      p.token1 = flip ? a : b;
      p.reserve0 = random_reserve(rng_);
      p.reserve1 = p.reserve0;
      p.fee_ppm = spec_.fee_ppm;
      route_.hops.push_back({p.pool_id, a, b});
      state_.put(std::move(p));
    }
    if (split() == SplitMode::Cascade) {
      // The second pool is much shallower than the first.
      PoolState& deep = state_.pools.at(route_.hops[0].pool_id);
      PoolState& shallow = state_.pools.at(route_.hops[1].pool_id);
      shallow.reserve0 = deep.reserve0 / 10;
      shallow.reserve1 = deep.reserve0 / 10;
    }
    for (int j = 0; j < spec_.n_pools - len; ++j) {
      const std::size_t a = uniform_below(rng_, kNoiseTokens.size());
      std::size_t b = uniform_below(rng_, kNoiseTokens.size() - 1);
      b += b >= a ? 1 : 0;
      PoolState p;
      p.pool_id = pool_id('n', j);
      p.token0 = kNoiseTokens[a];
      p.token1 = kNoiseTokens[b];
      p.reserve0 = random_reserve(rng_);
      p.reserve1 = random_reserve(rng_);
      p.fee_ppm = spec_.fee_ppm;
      noise_pools_.push_back(p.pool_id);
      state_.put(std::move(p));
    }
  }

  SplitMode split() const {
    if (spec_.split == SplitMode::Auto) {
      return spec_.n_creators >= 2 ? SplitMode::Dominant : SplitMode::Auto;
    }
    return spec_.split;
  }

  Transaction creator_tx(std::vector<SwapIntent> swaps) {
    Transaction tx;
    tx.sender = address("creator", uniform_int(rng_, 0, 19));
    tx.protocol_tag = kProtocols[uniform_below(rng_, kProtocols.size())];
    tx.swaps = std::move(swaps);
    return tx;
  }

  void make_creators() {
    const Int target_num = numerator_of(spec_.imbalance_magnitude);
    const Int target_den = denominator_of(spec_.imbalance_magnitude);
    auto reached_target = [&](const WorldState& s) {
      return k_at_least(s, route_, true, target_num, target_den);
    };
    const std::size_t hops = route_.hops.size();
    WorldState& s = state_;

    if (spec_.preexisting) {
      // The imbalance is already present before the first block.
      const std::size_t hop = uniform_below(rng_, hops);
      const Int a = solve_amount(s, route_, hop, 1, reached_target);
      s = apply_swaps(s, {push_swap(route_, hop, a)});
      initial_ = s;
      scenario_.truth.expected.kind = ExpectedSource::Kind::PreExisting;
      return;
    }
    initial_ = s;

    const SplitMode mode = split();
    if (mode == SplitMode::Symmetric) {
      const std::size_t hop = uniform_below(rng_, hops);
      const Int a = solve_amount(s, route_, hop, 2, reached_target);
      for (int c = 0; c < 2; ++c) {
        add_creator(creator_tx({push_swap(route_, hop, a)}));
      }
      scenario_.truth.expected.kind = ExpectedSource::Kind::Tied;
      return;
    }

    if (mode == SplitMode::Cascade) {
      const Int a_f = solve_amount(s, route_, 0, 1, reached_target);
      const WorldState after_f = apply_swaps(s, {push_swap(route_, 0, a_f)});
      auto [kf_num, kf_den] = coefficient_parts(after_f, route_, false);
      const Int a_g = solve_amount(after_f, route_, 1, 1, [&](const WorldState& w) {
        return k_at_least(w, route_, false, kf_num * 2, kf_den);
      });
      const WorldState after_g_only = apply_swaps(s, {push_swap(route_, 1, a_g)});
      const WorldState after_both = apply_swaps(after_f, {push_swap(route_, 1, a_g)});
      const Int v0 = net_profit_units(s, route_);
      const Int vf = net_profit_units(after_f, route_);
      const Int vg = net_profit_units(after_g_only, route_);
      const Int vfg = net_profit_units(after_both, route_);
      const Rational k0 = cycle_coefficient(s, route_);
      const Rational kf = cycle_coefficient(after_f, route_);
      const Rational kfg = cycle_coefficient(after_both, route_);
      const bool impact_favours_f = vf - v0 > vfg - vf;
      const bool shapley_favours_f = (vf - v0) + (vfg - vg) > (vg - v0) + (vfg - vf);
      const bool coefficient_favours_g = kfg - kf > kf - k0;
      if (!impact_favours_f || !shapley_favours_f || !coefficient_favours_g) {
        infeasible("cascade split needs a larger imbalance_magnitude (try >= 9)");
      }
      add_creator(creator_tx({push_swap(route_, 0, a_f)}));
      add_creator(creator_tx({push_swap(route_, 1, a_g)}));
      scenario_.truth.expected.kind = ExpectedSource::Kind::Tx;
      dominant_ = 0;
      return;
    }

    // One creator carries most of the move (in log space); the others nudge the same way.
    const int n = spec_.n_creators;
    const double fee_log = static_cast<double>(hops) *
                           std::log(static_cast<double>(kFeeDenominator - spec_.fee_ppm) / kFeeDenominator);
    const double total_log = std::log(to_double(spec_.imbalance_magnitude)) - fee_log;
    const std::size_t dominant = uniform_below(rng_, static_cast<std::uint64_t>(n));
    std::vector<double> shares(static_cast<std::size_t>(n), 0.0);
    double minor_total = 0;
    for (int i = 0; i < n; ++i) {
      if (static_cast<std::size_t>(i) != dominant) {
        shares[static_cast<std::size_t>(i)] = (0.2 + 0.6 * uniform_unit(rng_)) * 0.3 / (n - 1) * total_log;
        minor_total += shares[static_cast<std::size_t>(i)];
      }
    }
    shares[dominant] = total_log - minor_total;

    std::vector<Int> before_profit;
    double cumulative = 0;
    for (int i = 0; i < n; ++i) {
      cumulative += shares[static_cast<std::size_t>(i)];
      const std::size_t hop = uniform_below(rng_, hops);
      Int a;
      if (i + 1 == n) {
        a = solve_amount(s, route_, hop, 1, reached_target);
      } else {
        auto [num, den] = double_ratio(std::exp(cumulative));
        a = solve_amount(s, route_, hop, 1, [&](const WorldState& w) {
          return k_at_least(w, route_, false, num, den);
        });
      }
      before_profit.push_back(net_profit_units(s, route_));
      s = apply_swaps(s, {push_swap(route_, hop, a)});
      add_creator(creator_tx({push_swap(route_, hop, a)}));
    }
    before_profit.push_back(net_profit_units(s, route_));
    const Int dominant_impact = before_profit[dominant + 1] - before_profit[dominant];
    for (int i = 0; i < n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      if (u != dominant && before_profit[u + 1] - before_profit[u] >= dominant_impact) {
        infeasible("dominant creator does not have the largest impact");
      }
    }
    dominant_ = dominant;
    scenario_.truth.expected.kind = ExpectedSource::Kind::Tx;
  }

  void add_creator(Transaction tx) {
    if (split() != SplitMode::Dominant && split() != SplitMode::Auto) {
      state_ = apply_swaps(state_, tx.swaps);
    }
    specials_.push_back({Special::Role::Creator, std::move(tx)});
  }

  Transaction arb_tx(const Int& amount) {
    Transaction tx;
    tx.sender = address("arb", uniform_int(rng_, 0, 7));
    Int a = amount;
    WorldState scratch = state_;
    for (const auto& hop : route_.hops) {
      if (a <= 0) {
        infeasible("arbitrage amount floors to zero");
      }
      tx.swaps.push_back({hop.pool_id, hop.token_in, a});
      PoolState& p = scratch.pools.at(hop.pool_id);
      SwapResult r = swap_exact_in(p, hop.token_in, a);
      p = std::move(r.new_pool);
      a = r.amount_out;
    }
    const Int net = a - amount;
    const Rational gross = Rational(net) * prices_.price(route_.start_token());
    if (gross <= 0) {
      infeasible("arbitrage would not be profitable");
    }
    const Int whole = numerator_of(gross) / denominator_of(gross);
    tx.fee_tau = whole / 50;
    tx.bid_beta = whole / 100;
    state_ = std::move(scratch);
    return tx;
  }

  void make_competitors() {
    for (int i = 0; i < spec_.competing_arbs; ++i) {
      const Int best = optimal_net(state_, route_).first;
      if (best <= 0) {
        infeasible("no opportunity left for a competing arbitrage");
      }
      const double fraction = 0.2 + 0.25 * uniform_unit(rng_);
      Int amount = best * static_cast<std::int64_t>(std::llround(fraction * 1e6)) / 1000000;
      if (amount < 1) {
        amount = 1;
      }
      specials_.push_back({Special::Role::Competitor, arb_tx(amount)});
    }
  }

  void make_arb() {
    const Int best = optimal_net(state_, route_).first;
    if (best <= 0) {
      infeasible("no opportunity left for the final arbitrage");
    }
    specials_.push_back({Special::Role::Arb, arb_tx(best)});
  }

  Transaction noise_tx() {
    Transaction tx;
    tx.sender = address("user", uniform_int(rng_, 0, 999));
    tx.protocol_tag = kProtocols[uniform_below(rng_, kProtocols.size())];
    if (noise_pools_.empty() || uniform_below(rng_, 10) == 0) {
      return tx;  // plain transfer, no swaps
    }
    const int swaps = uniform_below(rng_, 5) == 0 ? 2 : 1;
    for (int i = 0; i < swaps; ++i) {
      const PoolState& p = initial_.at(noise_pools_[uniform_below(rng_, noise_pools_.size())]);
      const bool zero = uniform_below(rng_, 2) == 0;
      const Int& reserve = zero ? p.reserve0 : p.reserve1;
      const Int amount = reserve * uniform_int(rng_, 10, 1000) / 1000000;
      tx.swaps.push_back({p.pool_id, zero ? p.token0 : p.token1, amount});
    }
    return tx;
  }

  void place(int n_blocks, int noise) {
    // Block of each special tx: creators anywhere, competitors after the last creator,
    // the final arbitrage in the last block.
    std::vector<int> block_of(specials_.size());
    int last_creator = 0;
    std::vector<int> creator_blocks;
    std::vector<int> competitor_blocks;
    for (const auto& sp : specials_) {
      if (sp.role == Special::Role::Creator) {
        creator_blocks.push_back(static_cast<int>(uniform_int(rng_, 0, n_blocks - 1)));
      }
    }
    std::sort(creator_blocks.begin(), creator_blocks.end());
    if (!creator_blocks.empty()) {
      last_creator = creator_blocks.back();
    }
    for (const auto& sp : specials_) {
      if (sp.role == Special::Role::Competitor) {
        competitor_blocks.push_back(static_cast<int>(uniform_int(rng_, last_creator, n_blocks - 1)));
      }
    }
    std::sort(competitor_blocks.begin(), competitor_blocks.end());
    std::size_t ci = 0, ki = 0;
    for (std::size_t i = 0; i < specials_.size(); ++i) {
      switch (specials_[i].role) {
        case Special::Role::Creator: block_of[i] = creator_blocks[ci++]; break;
        case Special::Role::Competitor: block_of[i] = competitor_blocks[ki++]; break;
        case Special::Role::Arb: block_of[i] = n_blocks - 1; break;
      }
    }

    ChainSegment& segment = scenario_.segment;
    segment.initial_state = initial_;
    std::size_t next_special = 0;
    for (int b = 0; b < n_blocks; ++b) {
      std::size_t count = 0;
      while (next_special + count < specials_.size() && block_of[next_special + count] == b) {
        ++count;
      }
      const std::size_t total = static_cast<std::size_t>(noise) + count;
      // Pick `count` distinct slots (Floyd's algorithm), then fill them in order.
      std::vector<std::size_t> slots;
      for (std::size_t j = total - count; j < total; ++j) {
        const std::size_t t = uniform_below(rng_, j + 1);
        slots.push_back(std::find(slots.begin(), slots.end(), t) == slots.end() ? t : j);
      }
      std::sort(slots.begin(), slots.end());
      Block block;
      block.number = static_cast<std::uint64_t>(b + 1);
      std::size_t s = 0;
      for (std::size_t slot = 0; slot < total; ++slot) {
        Transaction tx;
        const Special* special = nullptr;
        if (s < slots.size() && slots[s] == slot) {
          special = &specials_[next_special + s];
          tx = special->tx;
          ++s;
        } else {
          tx = noise_tx();
        }
        tx.tx_hash = "0x" + sha256_hex(std::to_string(spec_.seed) + ":" + std::to_string(block.number) +
                                       ":" + std::to_string(slot));
        if (special != nullptr) {
          record(*special, tx.tx_hash);
        }
        block.txs.push_back(std::move(tx));
      }
      next_special += count;
      segment.blocks.push_back(std::move(block));
    }
  }

  void record(const Special& sp, const TxHash& hash) {
    GroundTruth& truth = scenario_.truth;
    switch (sp.role) {
      case Special::Role::Creator:
        if (truth.expected.kind == ExpectedSource::Kind::Tied ||
            truth.creator_hashes.size() == dominant_) {
          truth.expected.txs.push_back(hash);
        }
        truth.creator_hashes.push_back(hash);
        break;
      case Special::Role::Competitor: truth.competing_hashes.push_back(hash); break;
      case Special::Role::Arb: truth.arb_tx_hash = hash; break;
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_below(rng_, i)]);
    }
  }

  const ScenarioSpec& spec_;
  std::mt19937_64 rng_;
  PriceTable prices_;
  WorldState state_;    // route pools as the special transactions see them
  WorldState initial_;  // S_0
  ArbRoute route_;
  std::vector<PoolId> noise_pools_;
  std::vector<Special> specials_;
  std::size_t dominant_ = 0;
  Scenario scenario_;
};

}  // namespace

PriceTable scenario_prices() {
  PriceTable t;
  t.base_token = "WMATIC";
  t.prices = {
      {"WMATIC", Rational(1)},       {"USDC", Rational(5, 4)},  {"WETH", Rational(2600)},
      {"DAI", Rational(5, 4)},       {"WBTC", Rational(48000)}, {"LINK", Rational(12)},
      {"AAVE", Rational(110)},       {"CRV", Rational(3, 5)},   {"SUSHI", Rational(9, 10)},
      {"GHST", Rational(3, 2)},      {"QUICK", Rational(1, 20)}, {"BAL", Rational(4)},
  };
  return t;
}

void ScenarioSpec::validate() const {
  if (n_pools < 2) {
    infeasible("n_pools must be at least 2");
  }
  if (route_length != 2 && route_length != 3) {
    infeasible("route_length must be 2 or 3");
  }
  if (n_pools < route_length) {
    infeasible("n_pools smaller than route_length");
  }
  if (n_blocks < 1 || (n_blocks_max != 0 && n_blocks_max < n_blocks)) {
    infeasible("invalid block count");
  }
  if (noise_tx_per_block < 0 || (noise_tx_max != 0 && noise_tx_max < noise_tx_per_block)) {
    infeasible("invalid noise count");
  }
  if (n_creators < 0 || competing_arbs < 0) {
    infeasible("negative creator or competitor count");
  }
  if (fee_ppm >= kFeeDenominator / 2) {
    infeasible("fee_ppm too large");
  }
  if (!preexisting && n_creators == 0) {
    infeasible("no creator and no pre-existing imbalance: nothing to arbitrage");
  }
  if (imbalance_magnitude <= 1) {
    infeasible("imbalance_magnitude must exceed 1");
  }
  if (!preexisting && (split == SplitMode::Symmetric || split == SplitMode::Cascade) &&
      n_creators != 2) {
    infeasible(std::string(to_string(split)) + " split needs exactly two creators");
  }
  if (!preexisting && split == SplitMode::Cascade && route_length != 2) {
    infeasible("cascade split needs a two-pool route");
  }
}

Scenario generate(const ScenarioSpec& spec) {
  spec.validate();
  return Builder(spec).build();
}

std::vector<Scenario> generate_suite(std::uint64_t base_seed, std::size_t n,
                                     const ScenarioSpec& spec_template) {
  std::vector<Scenario> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ScenarioSpec spec = spec_template;
    spec.seed = base_seed + i;
    out.push_back(generate(spec));
  }
  return out;
}

Suite combine(const std::vector<Scenario>& scenarios) {
  Suite suite;
  suite.prices = scenario_prices();
  std::uint64_t offset = 0;
  for (const auto& sc : scenarios) {
    for (const auto& [id, pool] : sc.segment.initial_state.pools) {
      if (!suite.segment.initial_state.pools.emplace(id, pool).second) {
        throw Error(ErrorCode::InvalidArgument, "duplicate pool " + id.str() + " across scenarios");
      }
    }
    std::uint64_t last = 0;
    for (const auto& block : sc.segment.blocks) {
      Block b = block;
      b.number = offset + block.number;
      last = b.number;
      suite.segment.blocks.push_back(std::move(b));
    }
    offset = std::max(offset, last);
    suite.truths.push_back(sc.truth);
  }
  return suite;
}

}  // namespace mevattr
