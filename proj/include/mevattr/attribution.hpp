#pragma once

#include "mevattr/arb.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mevattr {

inline constexpr std::int64_t kDefaultDepth = 100;
inline constexpr std::size_t kMaxSimulationCandidates = 200;
inline constexpr std::size_t kMaxExactCandidates = 19;

struct Candidate {
  Position position;
  TxHash tx_hash;
  std::size_t entry = 0;  // index into SegmentIndex::entries()
};

/// Earlier transactions touching the arbitrage's pools, oldest first.
struct CandidateSet {
  std::vector<Candidate> items;
  Position arb_position;
  std::int64_t depth_used = kDefaultDepth;
  Position window_start;  // boundary before the first block inside the lookback window
};

struct AttributionContext {
  const SegmentIndex& index;
  const PriceTable& prices;
  ReplayMode mode = ReplayMode::OptimalAmount;
};

/// An arbitrage transaction located in the segment, with its route and realised profit.
struct ArbEvent {
  std::size_t entry = 0;
  Position position;
  const Transaction* tx = nullptr;
  ArbRoute route;
  Rational pi;  // mev_profit in the actual pre-arb state
};

/// Throws PositionOutOfRange, NotACycle.
ArbEvent make_event(const AttributionContext& ctx, const Position& arb_position);

/// Throws PositionOutOfRange, NotACycle.
CandidateSet filter_candidates(const SegmentIndex& index, const Position& arb_position,
                               std::int64_t depth_blocks = kDefaultDepth);

enum class Method { Simulation, Coefficient, ShapleyExact, ShapleyMC, External };
std::string_view to_string(Method m);
/// Accepts the CLI spellings (simulation, coefficient, shapley-exact, shapley-mc, external).
Method parse_method(std::string_view name);

enum class SourceKind { Tx, PreExisting, None };
std::string_view to_string(SourceKind k);

struct Source {
  SourceKind kind = SourceKind::None;
  TxHash tx_hash;  // set when kind == Tx

  static Source tx(TxHash h) { return {SourceKind::Tx, std::move(h)}; }
  static Source pre_existing() { return {SourceKind::PreExisting, {}}; }
  static Source none() { return {SourceKind::None, {}}; }
  friend bool operator==(const Source&, const Source&) = default;
};

struct AttributionResult {
  Method method = Method::Simulation;
  TxHash arb_tx_hash;
  Position arb_position;
  Source source;
  Rational attributed_value;
  Rational pi;
  std::map<std::string, std::string> diagnostics;
};

struct SimulationOptions {
  Rational threshold{1, 20};
  std::size_t max_candidates = kMaxSimulationCandidates;
};

/// Backward edge search over prefix profits, then the largest marginal impact after the edge.
AttributionResult attribute_simulation(const AttributionContext& ctx, const ArbEvent& event,
                                       const CandidateSet& candidates,
                                       const SimulationOptions& options = {});

/// Largest increase of the (fee-exclusive) cycle coefficient, replaying candidates only.
AttributionResult attribute_coefficient(const AttributionContext& ctx, const ArbEvent& event,
                                        const CandidateSet& candidates);

struct ShapleyEntry {
  TxHash tx_hash;
  Position position;
  Rational phi;
  double std_error = 0;  // Monte Carlo only
};

struct ShapleyReport {
  std::vector<ShapleyEntry> phi;  // candidate order
  Rational phi_base;
  Rational total_profit;
  Rational residual;
  std::vector<TxHash> tied_max;
  std::optional<std::size_t> n_samples;
  std::optional<std::uint64_t> rng_seed;
  std::size_t value_evaluations = 0;
};

/// Exact Shapley values by enumerating every coalition. Throws TooManyCandidates when |C| >= 20.
ShapleyReport shapley_exact(const AttributionContext& ctx, const ArbEvent& event,
                            const CandidateSet& candidates);

/// Permutation-sampling estimate; deterministic for a given seed.
ShapleyReport shapley_mc(const AttributionContext& ctx, const ArbEvent& event,
                         const CandidateSet& candidates, std::size_t n_samples, std::uint64_t seed);

enum class SourceShape { SingleSource, MultiSource, PreExisting };
std::string_view to_string(SourceShape s);

struct MultiSourceVerdict {
  SourceShape shape = SourceShape::PreExisting;
  std::vector<TxHash> sources;  // one for SingleSource, the set for MultiSource
};

MultiSourceVerdict multi_source_report(const ShapleyReport& report,
                                       const Rational& dominance = Rational(7, 10));

/// Collapses a Shapley report into a single-source result (largest phi, later tx on ties).
AttributionResult shapley_result(const ShapleyReport& report, const ArbEvent& event, Method method);

/// Same tx, or both pre-existing. Throws MismatchedEvent for results about different arbitrages.
bool agreement(const AttributionResult& a, const AttributionResult& b);

/// Source of externally computed attributions (e.g. from bot data); compared by agreement only.
class AttributionProvider {
 public:
  virtual ~AttributionProvider() = default;
  virtual std::optional<AttributionResult> attribute(const ChainSegment& segment,
                                                     const Transaction& arb_tx) const = 0;
};

/// Provider backed by a fixed table keyed by arbitrage hash.
class StaticAttributionProvider : public AttributionProvider {
 public:
  void add(const TxHash& arb_tx_hash, Source source, Rational value = 0);
  std::optional<AttributionResult> attribute(const ChainSegment& segment,
                                             const Transaction& arb_tx) const override;

 private:
  std::map<TxHash, AttributionResult> results_;
};

/// Counterfactual replay of the transactions between a base boundary and the arbitrage, limited
/// to the pools that can influence the arbitrage's pools. Candidates listed as toggled can be
/// switched off; every other transaction always executes at its original position.
class WindowReplay {
 public:
  WindowReplay(const SegmentIndex& index, const ArbEvent& event,
               const std::vector<Candidate>& toggled, std::size_t base_entry);

  std::size_t n_toggled() const noexcept { return n_toggled_; }
  const std::set<PoolId>& pools() const noexcept { return pools_; }
  std::size_t steps() const noexcept { return steps_.size(); }

  /// Pre-arb state (restricted to pools()) with toggled candidate i executed iff included(i).
  WorldState run(const std::function<bool(std::size_t)>& included) const;
  /// [0]: state just before the first toggled candidate; [j]: state right after candidate j;
  /// the last element is the actual pre-arb state.
  std::vector<WorldState> prefix_states() const;
  /// Calls fn(mask, pre-arb state) for every subset of the (< 32) toggled candidates.
  void for_each_subset(const std::function<void(std::uint32_t, const WorldState&)>& fn) const;

 private:
  struct Step {
    const Transaction* tx;
    int toggle;  // -1 when always executed
  };

  void descend(std::size_t step, std::uint32_t mask, WorldState state,
               const std::function<void(std::uint32_t, const WorldState&)>& fn) const;

  std::set<PoolId> pools_;
  std::vector<Step> steps_;
  WorldState base_;
  std::size_t n_toggled_ = 0;
};

}  // namespace mevattr
