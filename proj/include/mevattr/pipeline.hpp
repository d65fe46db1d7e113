#pragma once

#include "mevattr/attribution.hpp"
#include "mevattr/scenario.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mevattr {

struct RunConfig {
  std::vector<Method> methods{Method::Simulation, Method::Coefficient};
  std::int64_t depth = kDefaultDepth;
  Rational threshold{1, 20};
  std::size_t n_samples = 1000;
  std::uint64_t seed = 0;
  ReplayMode mode = ReplayMode::OptimalAmount;
  std::size_t jobs = 1;

  /// Throws InvalidArgument.
  void validate() const;
};

struct Detection {
  Position position;
  TxHash tx_hash;
  std::string sender;
  std::optional<std::string> protocol_tag;
  ArbClassification classification;
};

/// One pass over the segment, classifying each multi-swap transaction against its real pre-state.
std::vector<Detection> detect(const SegmentIndex& index, const PriceTable& prices);

struct ResultRecord {
  AttributionResult result;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_samples;
  std::optional<std::string> error;
  std::string arb_sender;
  std::optional<std::string> arb_protocol;
  std::optional<std::string> source_sender;
  std::optional<std::string> source_protocol;
  double seconds = 0;  // wall time of this method on this event; never serialised
};

/// Runs every configured method on every event, `jobs` events at a time. Per-event failures
/// become records with `error` set. Output is ordered by (block, index, method).
std::vector<ResultRecord> attribute_events(const SegmentIndex& index, const PriceTable& prices,
                                           const std::vector<Position>& events,
                                           const RunConfig& config);

std::string detection_to_json(const Detection& d);
std::string record_to_json(const ResultRecord& r);
ResultRecord record_from_json(const std::string& line);
std::vector<ResultRecord> read_records(std::istream& in);

struct MethodScore {
  Method method = Method::Simulation;
  std::size_t scenarios = 0;
  std::size_t correct = 0;
  std::size_t covered = 0;  // a source (tx or pre-existing) was produced without error
  double mean_seconds = 0;
};

struct EvaluationSummary {
  std::size_t scenarios = 0;
  std::size_t undetected = 0;
  std::vector<MethodScore> methods;
};

/// Whether a result matches the expected source. Tied truths accept any tied member or a
/// multi-source report naming exactly the tied set.
bool matches_truth(const AttributionResult& result, const ExpectedSource& expected);

/// Scores records against ground truth. Throws GroundTruthMismatch when a ground-truth
/// arbitrage is not in the segment.
EvaluationSummary evaluate(const SegmentIndex& index, const std::vector<GroundTruth>& truths,
                           const std::vector<ResultRecord>& records,
                           const std::vector<Method>& methods);
std::string summary_to_json(const EvaluationSummary& summary);

struct ValueShare {
  std::string key;
  Rational value;
  std::size_t count = 0;
};

struct MethodAggregate {
  Method method = Method::Simulation;
  std::size_t events = 0;
  std::size_t covered = 0;
  std::size_t pre_existing = 0;
  Rational attributed_total;  // over records with a tx source
  Rational pre_existing_total;
  std::vector<ValueShare> by_sender;    // largest first
  std::vector<ValueShare> by_protocol;  // largest first
  Rational top_creator_share;           // top 1% of creator senders
  Rational arbs_per_source;             // distinct events / distinct source txs
};

struct AggregateReport {
  std::vector<MethodAggregate> methods;
  std::vector<ValueShare> arbitrageurs;  // realised profit by arbitrage sender, largest first
  Rational top_arbitrageur_share;
  // agreement[i][j]: fraction of shared events where methods i and j agree
  std::vector<std::vector<Rational>> agreement;
};

AggregateReport aggregate(const std::vector<ResultRecord>& records);
std::string aggregate_to_json(const AggregateReport& report);
/// name -> CSV body, for by_sender.csv, by_protocol.csv, agreement.csv.
std::vector<std::pair<std::string, std::string>> aggregate_tables(const AggregateReport& report);

/// Share of the total held by the top ceil(fraction * n) entries of a descending list.
Rational top_share(const std::vector<ValueShare>& sorted_desc, const Rational& fraction);

}  // namespace mevattr
