#include "mevattr/attribution.hpp"
#include "mevattr/rng.hpp"

#include <boost/integer/common_factor.hpp>

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace mevattr {

namespace {

std::size_t replay_base(const AttributionContext& ctx, const ArbEvent& event,
                        const CandidateSet& candidates) {
  std::size_t base = std::min(ctx.index.lower_bound(candidates.window_start), event.entry);
  for (const auto& c : candidates.items) {
    base = std::min(base, c.entry);
  }
  return base;
}

ShapleyReport empty_report(const ArbEvent& event, const CandidateSet& candidates) {
  ShapleyReport report;
  report.total_profit = event.pi;
  for (const auto& c : candidates.items) {
    report.phi.push_back({c.tx_hash, c.position, 0, 0});
  }
  return report;
}

void finish(ShapleyReport& report) {
  Rational sum = report.phi_base;
  for (const auto& e : report.phi) {
    sum += e.phi;
  }
  report.residual = sum - report.total_profit;
}

struct MaskHash {
  std::size_t operator()(const std::vector<std::uint64_t>& words) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (std::uint64_t w : words) {
      h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

}  // namespace

ShapleyReport shapley_exact(const AttributionContext& ctx, const ArbEvent& event,
                            const CandidateSet& candidates) {
  const std::size_t n = candidates.items.size();
  if (n > kMaxExactCandidates) {
    throw Error(ErrorCode::TooManyCandidates,
                std::to_string(n) + " candidates, exact enumeration supports at most " +
                    std::to_string(kMaxExactCandidates));
  }
  ShapleyReport report = empty_report(event, candidates);
  const WindowReplay replay(ctx.index, event, candidates.items, replay_base(ctx, event, candidates));

  const std::size_t n_masks = std::size_t{1} << n;
  std::vector<Rational> value(n_masks);
  replay.for_each_subset([&](std::uint32_t mask, const WorldState& state) {
    value[mask] = mev_profit(state, *event.tx, event.route, ctx.mode, ctx.prices);
  });
  report.value_evaluations = n_masks;
  report.phi_base = value[0];
  if (n == 0) {
    finish(report);
    return report;
  }

  // Scale every coalition value to an integer over a shared denominator.
  Int denom = 1;
  for (const auto& v : value) {
    denom = boost::integer::lcm(denom, denominator_of(v));
  }
  std::vector<Int> scaled(n_masks);
  for (std::size_t mask = 0; mask < n_masks; ++mask) {
    scaled[mask] = numerator_of(value[mask]) * (denom / denominator_of(value[mask]));
  }

  // with[i][s]: sum of values over coalitions of size s containing i; total[s]: over all of size s.
  std::vector<std::vector<Int>> with(n, std::vector<Int>(n + 1));
  std::vector<Int> total(n + 1);
  for (std::size_t mask = 0; mask < n_masks; ++mask) {
    const auto s = static_cast<std::size_t>(__builtin_popcountll(mask));
    total[s] += scaled[mask];
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) {
        with[i][s] += scaled[mask];
      }
    }
  }
  std::vector<Int> factorial(n + 1, 1);
  for (std::size_t i = 1; i <= n; ++i) {
    factorial[i] = factorial[i - 1] * i;
  }
  // Weight of a coalition of size s not containing i: s! (n - s - 1)!.
  auto weight = [&](std::size_t s) { return factorial[s] * factorial[n - s - 1]; };
  for (std::size_t i = 0; i < n; ++i) {
    Int acc = 0;
    for (std::size_t s = 1; s <= n; ++s) {
      acc += weight(s - 1) * with[i][s];
    }
    for (std::size_t s = 0; s + 1 <= n; ++s) {
      acc -= weight(s) * (total[s] - with[i][s]);
    }
    report.phi[i].phi = Rational(acc, factorial[n] * denom);
  }

  const auto top = std::max_element(report.phi.begin(), report.phi.end(),
                                    [](const auto& a, const auto& b) { return a.phi < b.phi; });
  for (const auto& e : report.phi) {
    if (e.phi == top->phi) {
      report.tied_max.push_back(e.tx_hash);
    }
  }
  finish(report);
  return report;
}

ShapleyReport shapley_mc(const AttributionContext& ctx, const ArbEvent& event,
                         const CandidateSet& candidates, std::size_t n_samples,
                         std::uint64_t seed) {
  if (n_samples == 0) {
    throw Error(ErrorCode::InvalidArgument, "n_samples must be positive");
  }
  const std::size_t n = candidates.items.size();
  ShapleyReport report = empty_report(event, candidates);
  report.n_samples = n_samples;
  report.rng_seed = seed;
  const WindowReplay replay(ctx.index, event, candidates.items, replay_base(ctx, event, candidates));

  using Mask = std::vector<std::uint64_t>;
  std::unordered_map<Mask, Rational, MaskHash> memo;
  auto value = [&](const Mask& mask) -> const Rational& {
    auto it = memo.find(mask);
    if (it == memo.end()) {
      const WorldState state =
          replay.run([&](std::size_t i) { return (mask[i / 64] >> (i % 64) & 1) != 0; });
      it = memo.emplace(mask, mev_profit(state, *event.tx, event.route, ctx.mode, ctx.prices))
               .first;
    }
    return it->second;
  };

  const Mask empty((n + 63) / 64, 0);
  report.phi_base = value(empty);
  if (n == 0) {
    report.value_evaluations = memo.size();
    finish(report);
    return report;
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::vector<Rational> sum(n, Rational(0));
  std::vector<double> sum_sq(n, 0.0);
  for (std::size_t sample = 0; sample < n_samples; ++sample) {
    for (std::size_t i = 0; i < n; ++i) {
      order[i] = i;
    }
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(order[i], order[uniform_below(rng, i + 1)]);
    }
    Mask mask = empty;
    Rational previous = report.phi_base;
    for (std::size_t i : order) {
      mask[i / 64] |= std::uint64_t{1} << (i % 64);
      const Rational& current = value(mask);
      const Rational marginal = current - previous;
      sum[i] += marginal;
      const double m = to_double(marginal);
      sum_sq[i] += m * m;
      previous = current;
    }
  }
  report.value_evaluations = memo.size();

  const double samples = static_cast<double>(n_samples);
  for (std::size_t i = 0; i < n; ++i) {
    report.phi[i].phi = sum[i] / Rational(n_samples);
    const double mean = to_double(report.phi[i].phi);
    const double var = std::max(0.0, sum_sq[i] / samples - mean * mean);
    report.phi[i].std_error = std::sqrt(var / samples);
  }

  // Candidates whose estimate is within a 99% band of the top estimate count as tied.
  std::size_t top = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (report.phi[i].phi > report.phi[top].phi) {
      top = i;
    }
  }
  const double top_value = to_double(report.phi[top].phi);
  const double top_se = report.phi[top].std_error;
  for (std::size_t i = 0; i < n; ++i) {
    const double band =
        2.576 * std::sqrt(top_se * top_se + report.phi[i].std_error * report.phi[i].std_error);
    if (i == top || report.phi[i].phi == report.phi[top].phi ||
        std::abs(top_value - to_double(report.phi[i].phi)) <= band) {
      report.tied_max.push_back(report.phi[i].tx_hash);
    }
  }
  finish(report);
  return report;
}

std::string_view to_string(SourceShape s) {
  switch (s) {
    case SourceShape::SingleSource: return "single_source";
    case SourceShape::MultiSource: return "multi_source";
    case SourceShape::PreExisting: return "pre_existing";
  }
  return "?";
}

MultiSourceVerdict multi_source_report(const ShapleyReport& report, const Rational& dominance) {
  MultiSourceVerdict verdict;
  std::vector<const ShapleyEntry*> positive;
  Rational positive_total = 0;
  for (const auto& e : report.phi) {
    if (e.phi > 0) {
      positive.push_back(&e);
      positive_total += e.phi;
    }
  }
  if (positive.empty()) {
    verdict.shape = SourceShape::PreExisting;
    return verdict;
  }
  if (report.tied_max.size() >= 2) {
    verdict.shape = SourceShape::MultiSource;
    verdict.sources = report.tied_max;
    return verdict;
  }
  // Largest first; later position first among equal values.
  std::stable_sort(positive.begin(), positive.end(), [](const auto* a, const auto* b) {
    if (a->phi != b->phi) {
      return a->phi > b->phi;
    }
    return a->position > b->position;
  });
  const Rational bar = dominance * positive_total;
  if (positive.front()->phi > bar) {
    verdict.shape = SourceShape::SingleSource;
    verdict.sources = {positive.front()->tx_hash};
    return verdict;
  }
  // No dominant source: report the smallest top-ranked group that carries the dominant share.
  verdict.shape = SourceShape::MultiSource;
  Rational carried = 0;
  for (const auto* e : positive) {
    verdict.sources.push_back(e->tx_hash);
    carried += e->phi;
    if (carried > bar) {
      break;
    }
  }
  return verdict;
}

AttributionResult shapley_result(const ShapleyReport& report, const ArbEvent& event,
                                 Method method) {
  AttributionResult r;
  r.method = method;
  r.arb_tx_hash = event.tx->tx_hash;
  r.arb_position = event.position;
  r.pi = event.pi;
  r.source = Source::none();
  r.attributed_value = 0;
  auto& diag = r.diagnostics;
  diag["candidates"] = std::to_string(report.phi.size());
  diag["phi_base"] = to_string(report.phi_base);
  diag["residual"] = to_string(report.residual);
  diag["value_evaluations"] = std::to_string(report.value_evaluations);
  std::string phis;
  for (const auto& e : report.phi) {
    if (!phis.empty()) {
      phis += ',';
    }
    phis += e.tx_hash.str() + "=" + to_string(e.phi);
  }
  diag["phi"] = phis;

  const MultiSourceVerdict verdict = multi_source_report(report);
  diag["shape"] = std::string(to_string(verdict.shape));
  std::string sources;
  for (const auto& h : verdict.sources) {
    if (!sources.empty()) {
      sources += ',';
    }
    sources += h.str();
  }
  diag["shape_sources"] = sources;

  if (event.pi <= 0) {
    diag["reason"] = "non-positive realised profit";
    return r;
  }
  const ShapleyEntry* best = nullptr;
  for (const auto& e : report.phi) {
    if (e.phi > 0 && (best == nullptr || e.phi >= best->phi)) {
      best = &e;
    }
  }
  if (best == nullptr) {
    r.source = Source::pre_existing();
    r.attributed_value = report.phi_base > 0 ? report.phi_base : Rational(0);
    return r;
  }
  r.source = Source::tx(best->tx_hash);
  r.attributed_value = best->phi;
  return r;
}

}  // namespace mevattr
