#include "mevattr/attribution.hpp"

#include <algorithm>

namespace mevattr {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Simulation: return "simulation";
    case Method::Coefficient: return "coefficient";
    case Method::ShapleyExact: return "shapley-exact";
    case Method::ShapleyMC: return "shapley-mc";
    case Method::External: return "external";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::Simulation, Method::Coefficient, Method::ShapleyExact,
                   Method::ShapleyMC, Method::External}) {
    if (to_string(m) == name) {
      return m;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + std::string(name) + "'");
}

std::string_view to_string(SourceKind k) {
  switch (k) {
    case SourceKind::Tx: return "tx";
    case SourceKind::PreExisting: return "pre_existing";
    case SourceKind::None: return "none";
  }
  return "?";
}

ArbEvent make_event(const AttributionContext& ctx, const Position& arb_position) {
  const SegmentIndex& index = ctx.index;
  const auto& entry = index.entry_at(arb_position);
  ArbEvent event;
  event.entry = index.lower_bound(arb_position);
  event.position = arb_position;
  event.tx = entry.tx;
  event.route = extract_route(*entry.tx, index.segment().initial_state);
  const auto ids = event.route.pool_ids();
  const WorldState before =
      index.project_before_entry(std::set<PoolId>(ids.begin(), ids.end()), event.entry);
  event.pi = mev_profit(before, *event.tx, event.route, ctx.mode, ctx.prices);
  return event;
}

namespace {

bool touches(const Transaction& tx, const std::set<PoolId>& pools) {
  return std::any_of(tx.swaps.begin(), tx.swaps.end(),
                     [&](const SwapIntent& s) { return pools.contains(s.pool_id); });
}

Position window_start_for(const ChainSegment& segment, std::uint64_t arb_block, std::int64_t depth) {
  const std::uint64_t d = depth < 0 ? 0 : static_cast<std::uint64_t>(depth);
  const std::uint64_t first = arb_block > d ? arb_block - d : 0;
  auto it = std::lower_bound(segment.blocks.begin(), segment.blocks.end(), first,
                             [](const Block& b, std::uint64_t n) { return b.number < n; });
  return Position::before_block(it == segment.blocks.end() ? arb_block : it->number);
}

}  // namespace

CandidateSet filter_candidates(const SegmentIndex& index, const Position& arb_position,
                               std::int64_t depth_blocks) {
  const auto& arb = index.entry_at(arb_position);
  const ChainSegment& segment = index.segment();
  const ArbRoute route = extract_route(*arb.tx, segment.initial_state);
  const auto ids = route.pool_ids();
  const std::set<PoolId> pools(ids.begin(), ids.end());

  CandidateSet out;
  out.arb_position = arb_position;
  out.depth_used = depth_blocks;
  out.window_start = window_start_for(segment, arb_position.block_number, depth_blocks);
  const std::size_t arb_entry = index.lower_bound(arb_position);
  for (std::size_t i = index.lower_bound(out.window_start); i < arb_entry; ++i) {
    const auto& e = index.entries()[i];
    if (touches(*e.tx, pools)) {
      out.items.push_back({e.position, e.tx->tx_hash, i});
    }
  }
  return out;
}

WindowReplay::WindowReplay(const SegmentIndex& index, const ArbEvent& event,
                           const std::vector<Candidate>& toggled, std::size_t base_entry)
    : n_toggled_(toggled.size()) {
  for (const auto& id : event.route.pool_ids()) {
    pools_.insert(id);
  }
  std::map<std::size_t, int> toggle_of;
  for (std::size_t i = 0; i < toggled.size(); ++i) {
    const std::size_t e = toggled[i].entry;
    if (e < base_entry || e >= event.entry) {
      throw Error(ErrorCode::InvalidArgument,
                  "candidate " + toggled[i].tx_hash.str() + " outside the replay window");
    }
    toggle_of[e] = static_cast<int>(i);
    for (const auto& s : index.entries()[e].tx->swaps) {
      pools_.insert(s.pool_id);
    }
  }
  // Grow the pool set until no transaction in the window links a tracked pool to an untracked one.
  const auto& entries = index.entries();
  for (bool grew = true; grew;) {
    grew = false;
    for (std::size_t i = base_entry; i < event.entry; ++i) {
      const Transaction& tx = *entries[i].tx;
      if (!touches(tx, pools_)) {
        continue;
      }
      for (const auto& s : tx.swaps) {
        grew = pools_.insert(s.pool_id).second || grew;
      }
    }
  }
  for (std::size_t i = base_entry; i < event.entry; ++i) {
    auto t = toggle_of.find(i);
    if (t != toggle_of.end()) {
      steps_.push_back({entries[i].tx, t->second});
    } else if (touches(*entries[i].tx, pools_)) {
      steps_.push_back({entries[i].tx, -1});
    }
  }
  base_ = index.project_before_entry(pools_, base_entry);
}

WorldState WindowReplay::run(const std::function<bool(std::size_t)>& included) const {
  WorldState state = base_;
  for (const auto& step : steps_) {
    if (step.toggle < 0 || included(static_cast<std::size_t>(step.toggle))) {
      apply_tx_in_place(state, *step.tx);
    }
  }
  return state;
}

std::vector<WorldState> WindowReplay::prefix_states() const {
  std::vector<WorldState> out;
  out.reserve(n_toggled_ + 1);
  WorldState state = base_;
  for (const auto& step : steps_) {
    if (step.toggle >= 0) {
      if (out.empty()) {
        out.push_back(state);
      }
      apply_tx_in_place(state, *step.tx);
      if (static_cast<std::size_t>(step.toggle) + 1 < n_toggled_) {
        out.push_back(state);
      }
    } else {
      apply_tx_in_place(state, *step.tx);
    }
  }
  out.push_back(std::move(state));
  return out;
}

void WindowReplay::descend(std::size_t step, std::uint32_t mask, WorldState state,
                           const std::function<void(std::uint32_t, const WorldState&)>& fn) const {
  for (; step < steps_.size(); ++step) {
    const Step& s = steps_[step];
    if (s.toggle >= 0) {
      descend(step + 1, mask, state, fn);
      mask |= std::uint32_t{1} << s.toggle;
    }
    apply_tx_in_place(state, *s.tx);
  }
  fn(mask, state);
}

void WindowReplay::for_each_subset(
    const std::function<void(std::uint32_t, const WorldState&)>& fn) const {
  if (n_toggled_ >= 32) {
    throw Error(ErrorCode::TooManyCandidates, std::to_string(n_toggled_) + " candidates");
  }
  descend(0, 0, base_, fn);
}

namespace {

AttributionResult blank_result(Method method, const ArbEvent& event) {
  AttributionResult r;
  r.method = method;
  r.arb_tx_hash = event.tx->tx_hash;
  r.arb_position = event.position;
  r.pi = event.pi;
  r.source = Source::none();
  r.attributed_value = 0;
  return r;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) {
      out += ',';
    }
    out += parts[i];
  }
  return out;
}

}  // namespace

AttributionResult attribute_simulation(const AttributionContext& ctx, const ArbEvent& event,
                                       const CandidateSet& candidates,
                                       const SimulationOptions& options) {
  AttributionResult result = blank_result(Method::Simulation, event);
  auto& diag = result.diagnostics;
  diag["threshold"] = to_string(options.threshold);
  diag["candidates"] = std::to_string(candidates.items.size());
  if (event.pi <= 0) {
    diag["reason"] = "non-positive realised profit";
    return result;
  }

  std::vector<Candidate> retained = candidates.items;
  if (retained.size() > options.max_candidates) {
    retained.erase(retained.begin(),
                   retained.end() - static_cast<std::ptrdiff_t>(options.max_candidates));
    diag["truncated"] = "true";
  }
  const std::size_t base_entry = ctx.index.lower_bound(candidates.window_start);
  const WindowReplay replay(ctx.index, event, retained, base_entry);
  const std::vector<WorldState> states = replay.prefix_states();
  const std::size_t m = retained.size();

  std::vector<std::optional<Rational>> memo(m + 1);
  memo[m] = event.pi;
  std::size_t evaluations = 0;
  auto profit = [&](std::size_t j) -> const Rational& {
    if (!memo[j]) {
      memo[j] = mev_profit(states[j], *event.tx, event.route, ctx.mode, ctx.prices);
      ++evaluations;
    }
    return *memo[j];
  };
  const Rational threshold = options.threshold * event.pi;

  if (profit(0) > threshold) {
    result.source = Source::pre_existing();
    result.attributed_value = profit(0);
    diag["edge"] = "window_start";
    diag["evaluations"] = std::to_string(evaluations);
    return result;
  }

  // profit(0) <= threshold < profit(m): find the last prefix at or below the threshold.
  std::size_t lo = 0, hi = m;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (profit(mid) <= threshold) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  std::size_t edge = lo;
  bool verified = true;
  for (std::size_t j = edge + 1; j <= m; ++j) {
    if (profit(j) <= threshold) {
      verified = false;
      break;
    }
  }
  if (!verified) {
    edge = m;
    while (profit(edge) > threshold) {
      --edge;
    }
    diag["fallback"] = "linear_scan";
  }
  diag["edge"] = edge == 0 ? std::string("window_start") : to_string(retained[edge - 1].position);

  // Impact of candidate j (1-based) is profit after it minus profit before it.
  std::optional<std::size_t> best;
  Rational best_impact = 0;
  std::vector<std::string> impacts;
  for (std::size_t j = m; j > edge; --j) {
    const Rational impact = profit(j) - profit(j - 1);
    impacts.push_back(retained[j - 1].tx_hash.str() + "=" + to_string(impact));
    if (impact > best_impact) {
      best_impact = impact;
      best = j - 1;
    }
  }
  std::reverse(impacts.begin(), impacts.end());
  diag["impacts"] = join(impacts);
  diag["evaluations"] = std::to_string(evaluations);
  if (best) {
    result.source = Source::tx(retained[*best].tx_hash);
    result.attributed_value = best_impact;
  } else {
    diag["reason"] = "no positive impact after edge";
  }
  return result;
}

AttributionResult attribute_coefficient(const AttributionContext& ctx, const ArbEvent& event,
                                        const CandidateSet& candidates) {
  AttributionResult result = blank_result(Method::Coefficient, event);
  auto& diag = result.diagnostics;
  diag["candidates"] = std::to_string(candidates.items.size());

  std::set<PoolId> pools;
  for (const auto& id : event.route.pool_ids()) {
    pools.insert(id);
  }
  for (const auto& c : candidates.items) {
    for (const auto& s : ctx.index.entries()[c.entry].tx->swaps) {
      pools.insert(s.pool_id);
    }
  }
  const std::size_t base_entry =
      std::min(ctx.index.lower_bound(candidates.window_start),
               candidates.items.empty() ? event.entry : candidates.items.front().entry);
  WorldState state = ctx.index.project_before_entry(pools, base_entry);

  const Rational k_base = cycle_coefficient(state, event.route, false);
  Rational previous = k_base;
  std::optional<std::size_t> best;
  Rational best_delta = 0;
  Rational positive_total = 0;
  std::vector<std::string> deltas;
  for (std::size_t i = 0; i < candidates.items.size(); ++i) {
    apply_tx_in_place(state, *ctx.index.entries()[candidates.items[i].entry].tx);
    const Rational k = cycle_coefficient(state, event.route, false);
    const Rational delta = k - previous;
    previous = k;
    deltas.push_back(candidates.items[i].tx_hash.str() + "=" + to_string(delta));
    if (delta > 0) {
      positive_total += delta;
    }
    // >= so that equal deltas go to the later transaction.
    if (delta > 0 && delta >= best_delta) {
      best_delta = delta;
      best = i;
    }
  }
  diag["k_base"] = to_string(k_base);
  diag["k_final"] = to_string(previous);
  diag["deltas"] = join(deltas);

  if (!best) {
    const Rational k_fee = cycle_coefficient(ctx.index.project_before_entry(pools, base_entry),
                                             event.route, true);
    diag["k_fee_base"] = to_string(k_fee);
    if (k_fee > 1) {
      result.source = Source::pre_existing();
      result.attributed_value = event.pi > 0 ? event.pi : Rational(0);
    }
    return result;
  }
  diag["delta_k"] = to_string(best_delta);
  result.source = Source::tx(candidates.items[*best].tx_hash);
  result.attributed_value =
      event.pi > 0 ? Rational(event.pi * best_delta / positive_total) : Rational(0);
  return result;
}

bool agreement(const AttributionResult& a, const AttributionResult& b) {
  if (a.arb_tx_hash != b.arb_tx_hash) {
    throw Error(ErrorCode::MismatchedEvent,
                a.arb_tx_hash.str() + " vs " + b.arb_tx_hash.str());
  }
  if (a.source.kind == SourceKind::PreExisting && b.source.kind == SourceKind::PreExisting) {
    return true;
  }
  return a.source.kind == SourceKind::Tx && b.source.kind == SourceKind::Tx &&
         a.source.tx_hash == b.source.tx_hash;
}

void StaticAttributionProvider::add(const TxHash& arb_tx_hash, Source source, Rational value) {
  AttributionResult r;
  r.method = Method::External;
  r.arb_tx_hash = arb_tx_hash;
  r.source = std::move(source);
  r.attributed_value = std::move(value);
  results_[arb_tx_hash] = std::move(r);
}

std::optional<AttributionResult> StaticAttributionProvider::attribute(
    const ChainSegment& /*segment*/, const Transaction& arb_tx) const {
  auto it = results_.find(arb_tx.tx_hash);
  if (it == results_.end()) {
    return std::nullopt;
  }
  return it->second;
}

}  // namespace mevattr
