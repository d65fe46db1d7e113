#include "mevattr/pipeline.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <istream>
#include <set>
#include <sstream>
#include <thread>

namespace mevattr {

using json = nlohmann::ordered_json;

void RunConfig::validate() const {
  if (methods.empty()) {
    throw Error(ErrorCode::InvalidArgument, "at least one method is required");
  }
  if (threshold <= 0 || threshold >= 1) {
    throw Error(ErrorCode::InvalidArgument, "threshold must lie in (0, 1)");
  }
  if (depth < 0) {
    throw Error(ErrorCode::InvalidArgument, "depth must be non-negative");
  }
  if (n_samples == 0) {
    throw Error(ErrorCode::InvalidArgument, "samples must be positive");
  }
  if (jobs == 0) {
    throw Error(ErrorCode::InvalidArgument, "jobs must be positive");
  }
}

std::vector<Detection> detect(const SegmentIndex& index, const PriceTable& prices) {
  std::vector<Detection> out;
  WorldState state = index.segment().initial_state;
  for (const auto& e : index.entries()) {
    const Transaction& tx = *e.tx;
    if (tx.swaps.size() >= 2) {
      WorldState before;
      for (const auto& s : tx.swaps) {
        before.pools.emplace(s.pool_id, state.at(s.pool_id));
      }
      ArbClassification c = classify(tx, before, prices);
      if (c.is_atomic_arb) {
        out.push_back({e.position, tx.tx_hash, tx.sender, tx.protocol_tag, std::move(c)});
      }
    }
    apply_tx_in_place(state, tx);
  }
  return out;
}

namespace {

std::vector<Method> canonical_methods(std::vector<Method> methods) {
  std::sort(methods.begin(), methods.end());
  methods.erase(std::unique(methods.begin(), methods.end()), methods.end());
  return methods;
}

void describe_source(const SegmentIndex& index, ResultRecord& r) {
  if (r.result.source.kind != SourceKind::Tx) {
    return;
  }
  if (auto i = index.find(r.result.source.tx_hash)) {
    const Transaction& tx = *index.entries()[*i].tx;
    r.source_sender = tx.sender;
    r.source_protocol = tx.protocol_tag;
  }
}

std::vector<ResultRecord> run_event(const SegmentIndex& index, const PriceTable& prices,
                                    const Position& pos, const RunConfig& config,
                                    const std::vector<Method>& methods) {
  const Transaction& tx = *index.entry_at(pos).tx;
  auto blank = [&](Method m) {
    ResultRecord r;
    r.result.method = m;
    r.result.arb_tx_hash = tx.tx_hash;
    r.result.arb_position = pos;
    r.result.attributed_value = 0;
    r.result.pi = 0;
    r.arb_sender = tx.sender;
    r.arb_protocol = tx.protocol_tag;
    if (m == Method::ShapleyMC) {
      r.seed = config.seed;
      r.n_samples = config.n_samples;
    }
    return r;
  };

  std::vector<ResultRecord> out;
  const AttributionContext ctx{index, prices, config.mode};
  ArbEvent event;
  CandidateSet candidates;
  try {
    event = make_event(ctx, pos);
    candidates = filter_candidates(index, pos, config.depth);
  } catch (const Error& e) {
    for (Method m : methods) {
      ResultRecord r = blank(m);
      r.error = e.what();
      out.push_back(std::move(r));
    }
    return out;
  }

  for (Method m : methods) {
    ResultRecord r = blank(m);
    const auto start = std::chrono::steady_clock::now();
    try {
      switch (m) {
        case Method::Simulation: {
          SimulationOptions options;
          options.threshold = config.threshold;
          r.result = attribute_simulation(ctx, event, candidates, options);
          break;
        }
        case Method::Coefficient:
          r.result = attribute_coefficient(ctx, event, candidates);
          break;
        case Method::ShapleyExact:
          r.result = shapley_result(shapley_exact(ctx, event, candidates), event, m);
          break;
        case Method::ShapleyMC:
          r.result = shapley_result(
              shapley_mc(ctx, event, candidates, config.n_samples, config.seed), event, m);
          break;
        case Method::External:
          throw Error(ErrorCode::InvalidArgument, "no external attribution provider configured");
      }
    } catch (const Error& e) {
      r.result.pi = event.pi;
      r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    describe_source(index, r);
    out.push_back(std::move(r));
  }
  return out;
}

json rational_json(const Rational& r) {
  return {{"value", to_string(r)}, {"approx", to_double(r)}};
}

}  // namespace

std::vector<ResultRecord> attribute_events(const SegmentIndex& index, const PriceTable& prices,
                                           const std::vector<Position>& events,
                                           const RunConfig& config) {
  config.validate();
  const std::vector<Method> methods = canonical_methods(config.methods);
  std::vector<Position> order = events;
  std::sort(order.begin(), order.end());

  std::vector<std::vector<ResultRecord>> slots(order.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < order.size(); i = next++) {
      slots[i] = run_event(index, prices, order[i], config, methods);
    }
  };
  const std::size_t width = std::min(config.jobs, std::max<std::size_t>(order.size(), 1));
  if (width <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < width; ++t) {
      threads.emplace_back(worker);
    }
    for (auto& t : threads) {
      t.join();
    }
  }
  std::vector<ResultRecord> out;
  for (auto& s : slots) {
    for (auto& r : s) {
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::string detection_to_json(const Detection& d) {
  json net = json::object();
  for (const auto& [token, delta] : d.classification.net_changes) {
    net[token.str()] = delta.str();
  }
  json j = {{"tx_hash", d.tx_hash.str()},
            {"block", d.position.block_number},
            {"tx_index", d.position.tx_index},
            {"sender", d.sender},
            {"protocol_tag", d.protocol_tag ? json(*d.protocol_tag) : json(nullptr)},
            {"n_swaps", d.classification.n_swaps},
            {"net_changes", std::move(net)},
            {"gross_value_num", numerator_of(d.classification.gross_value).str()},
            {"gross_value_den", denominator_of(d.classification.gross_value).str()},
            {"profit_num", numerator_of(d.classification.profit).str()},
            {"profit_den", denominator_of(d.classification.profit).str()}};
  return j.dump();
}

std::string record_to_json(const ResultRecord& r) {
  const AttributionResult& a = r.result;
  json source = {{"kind", std::string(to_string(a.source.kind))}};
  if (a.source.kind == SourceKind::Tx) {
    source["tx_hash"] = a.source.tx_hash.str();
    source["sender"] = r.source_sender ? json(*r.source_sender) : json(nullptr);
    source["protocol_tag"] = r.source_protocol ? json(*r.source_protocol) : json(nullptr);
  }
  json diag = json::object();
  for (const auto& [k, v] : a.diagnostics) {
    diag[k] = v;
  }
  json j = {{"arb_tx_hash", a.arb_tx_hash.str()},
            {"block", a.arb_position.block_number},
            {"tx_index", a.arb_position.tx_index},
            {"method", std::string(to_string(a.method))},
            {"source", std::move(source)},
            {"attributed_value_num", numerator_of(a.attributed_value).str()},
            {"attributed_value_den", denominator_of(a.attributed_value).str()},
            {"pi_num", numerator_of(a.pi).str()},
            {"pi_den", denominator_of(a.pi).str()},
            {"arb_sender", r.arb_sender},
            {"arb_protocol_tag", r.arb_protocol ? json(*r.arb_protocol) : json(nullptr)},
            {"diagnostics", std::move(diag)}};
  if (r.seed) {
    j["seed"] = *r.seed;
  }
  if (r.n_samples) {
    j["n_samples"] = *r.n_samples;
  }
  if (r.error) {
    j["error"] = *r.error;
  }
  return j.dump();
}

namespace {

Int record_int(const json& v) {
  if (v.is_string()) {
    return parse_int(v.get<std::string>());
  }
  if (v.is_number_unsigned()) {
    return Int(v.get<std::uint64_t>());
  }
  if (v.is_number_integer()) {
    return Int(v.get<std::int64_t>());
  }
  throw Error(ErrorCode::ParseError, "expected an integer, got " + v.dump());
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) {
    return std::nullopt;
  }
  return j[key].get<std::string>();
}

}  // namespace

ResultRecord record_from_json(const std::string& line) {
  ResultRecord r;
  try {
    const json j = json::parse(line);
    AttributionResult& a = r.result;
    a.arb_tx_hash = j.at("arb_tx_hash").get<std::string>();
    a.arb_position.block_number = record_int(j.at("block")).convert_to<std::uint64_t>();
    a.arb_position.tx_index = record_int(j.at("tx_index")).convert_to<std::int64_t>();
    a.method = parse_method(j.at("method").get<std::string>());
    const json& source = j.at("source");
    const std::string kind = source.at("kind").get<std::string>();
    if (kind == "tx") {
      a.source = Source::tx(source.at("tx_hash").get<std::string>());
      r.source_sender = optional_string(source, "sender");
      r.source_protocol = optional_string(source, "protocol_tag");
    } else if (kind == "pre_existing") {
      a.source = Source::pre_existing();
    } else if (kind == "none") {
      a.source = Source::none();
    } else {
      throw Error(ErrorCode::ParseError, "unknown source kind '" + kind + "'");
    }
    a.attributed_value = make_rational(record_int(j.at("attributed_value_num")),
                                       record_int(j.at("attributed_value_den")));
    a.pi = make_rational(record_int(j.at("pi_num")), record_int(j.at("pi_den")));
    r.arb_sender = j.value("arb_sender", "");
    r.arb_protocol = optional_string(j, "arb_protocol_tag");
    if (j.contains("diagnostics")) {
      for (const auto& [k, v] : j["diagnostics"].items()) {
        a.diagnostics[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
    }
    if (j.contains("seed")) {
      r.seed = record_int(j["seed"]).convert_to<std::uint64_t>();
    }
    if (j.contains("n_samples")) {
      r.n_samples = record_int(j["n_samples"]).convert_to<std::size_t>();
    }
    r.error = optional_string(j, "error");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return r;
}

std::vector<ResultRecord> read_records(std::istream& in) {
  std::vector<ResultRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      out.push_back(record_from_json(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, "records line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

bool matches_truth(const AttributionResult& result, const ExpectedSource& expected) {
  switch (expected.kind) {
    case ExpectedSource::Kind::PreExisting:
      return result.source.kind == SourceKind::PreExisting;
    case ExpectedSource::Kind::Tx:
      return result.source.kind == SourceKind::Tx && result.source.tx_hash == expected.txs.front();
    case ExpectedSource::Kind::Tied: {
      const std::set<TxHash> tied(expected.txs.begin(), expected.txs.end());
      if (result.source.kind == SourceKind::Tx && tied.contains(result.source.tx_hash)) {
        return true;
      }
      auto shape = result.diagnostics.find("shape");
      auto sources = result.diagnostics.find("shape_sources");
      if (shape == result.diagnostics.end() || sources == result.diagnostics.end() ||
          shape->second != to_string(SourceShape::MultiSource)) {
        return false;
      }
      std::set<TxHash> reported;
      std::stringstream ss(sources->second);
      for (std::string h; std::getline(ss, h, ',');) {
        reported.insert(h);
      }
      return reported == tied;
    }
  }
  return false;
}

EvaluationSummary evaluate(const SegmentIndex& index, const std::vector<GroundTruth>& truths,
                           const std::vector<ResultRecord>& records,
                           const std::vector<Method>& methods) {
  EvaluationSummary summary;
  summary.scenarios = truths.size();
  std::map<std::pair<TxHash, Method>, const ResultRecord*> by_event;
  for (const auto& r : records) {
    by_event.emplace(std::make_pair(r.result.arb_tx_hash, r.result.method), &r);
  }
  const std::vector<Method> ordered = canonical_methods(methods);
  std::vector<double> seconds(ordered.size(), 0);
  std::vector<std::size_t> timed(ordered.size(), 0);
  for (Method m : ordered) {
    summary.methods.push_back({m, truths.size(), 0, 0, 0});
  }
  for (const auto& truth : truths) {
    if (!index.find(truth.arb_tx_hash)) {
      throw Error(ErrorCode::GroundTruthMismatch, "arbitrage " + truth.arb_tx_hash.str() +
                                                      " (seed " + std::to_string(truth.seed) +
                                                      ") is not in the block file");
    }
    bool seen = false;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      auto it = by_event.find({truth.arb_tx_hash, ordered[i]});
      if (it == by_event.end()) {
        continue;
      }
      seen = true;
      const ResultRecord& r = *it->second;
      seconds[i] += r.seconds;
      ++timed[i];
      if (r.error || r.result.source.kind == SourceKind::None) {
        continue;
      }
      ++summary.methods[i].covered;
      if (matches_truth(r.result, truth.expected)) {
        ++summary.methods[i].correct;
      }
    }
    summary.undetected += seen ? 0 : 1;
  }
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    summary.methods[i].mean_seconds = timed[i] == 0 ? 0 : seconds[i] / static_cast<double>(timed[i]);
  }
  return summary;
}

std::string summary_to_json(const EvaluationSummary& summary) {
  json methods = json::array();
  for (const auto& m : summary.methods) {
    const Rational accuracy = m.scenarios == 0 ? Rational(0) : Rational(m.correct, m.scenarios);
    const Rational coverage = m.scenarios == 0 ? Rational(0) : Rational(m.covered, m.scenarios);
    methods.push_back({{"method", std::string(to_string(m.method))},
                       {"scenarios", m.scenarios},
                       {"correct", m.correct},
                       {"covered", m.covered},
                       {"accuracy", rational_json(accuracy)},
                       {"coverage", rational_json(coverage)}});
  }
  json j = {{"ground_truth",
             "synthetic: expected sources are fixed by the scenario generator; no multi-source "
             "consensus is available"},
            {"scenarios", summary.scenarios},
            {"undetected", summary.undetected},
            {"methods", std::move(methods)}};
  return j.dump(1);
}

Rational top_share(const std::vector<ValueShare>& sorted_desc, const Rational& fraction) {
  if (sorted_desc.empty()) {
    return 0;
  }
  Rational total = 0;
  for (const auto& v : sorted_desc) {
    total += v.value;
  }
  if (total <= 0) {
    return 0;
  }
  const Rational scaled = fraction * static_cast<long long>(sorted_desc.size());
  Int k = numerator_of(scaled) / denominator_of(scaled);
  if (Rational(k) < scaled || k == 0) {
    k += 1;
  }
  const auto count = std::min(sorted_desc.size(), k.convert_to<std::size_t>());
  Rational top = 0;
  for (std::size_t i = 0; i < count; ++i) {
    top += sorted_desc[i].value;
  }
  return top / total;
}

namespace {

std::vector<ValueShare> sorted_shares(const std::map<std::string, ValueShare>& groups) {
  std::vector<ValueShare> out;
  for (const auto& [k, v] : groups) {
    out.push_back(v);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ValueShare& a, const ValueShare& b) { return a.value > b.value; });
  return out;
}

}  // namespace

AggregateReport aggregate(const std::vector<ResultRecord>& records) {
  AggregateReport report;
  std::set<Method> present;
  for (const auto& r : records) {
    present.insert(r.result.method);
  }
  const std::vector<Method> methods(present.begin(), present.end());

  std::map<TxHash, std::pair<std::string, Rational>> arb_value;  // first error-free record wins
  std::map<TxHash, std::map<Method, const ResultRecord*>> by_event;
  for (const auto& r : records) {
    by_event[r.result.arb_tx_hash][r.result.method] = &r;
    if (!r.error && !arb_value.contains(r.result.arb_tx_hash)) {
      arb_value[r.result.arb_tx_hash] = {r.arb_sender, r.result.pi > 0 ? r.result.pi : Rational(0)};
    }
  }

  for (Method m : methods) {
    MethodAggregate agg;
    agg.method = m;
    agg.attributed_total = 0;
    agg.pre_existing_total = 0;
    std::map<std::string, ValueShare> senders, protocols;
    std::map<std::string, std::set<TxHash>> sender_sources, protocol_sources;
    std::set<TxHash> sources, sourced_events;
    for (const auto& r : records) {
      if (r.result.method != m) {
        continue;
      }
      ++agg.events;
      if (r.error) {
        continue;
      }
      const AttributionResult& a = r.result;
      if (a.source.kind == SourceKind::PreExisting) {
        ++agg.covered;
        ++agg.pre_existing;
        agg.pre_existing_total += a.attributed_value;
      } else if (a.source.kind == SourceKind::Tx) {
        ++agg.covered;
        agg.attributed_total += a.attributed_value;
        const std::string sender = r.source_sender.value_or("unknown");
        const std::string protocol = r.source_protocol.value_or("untagged");
        senders[sender].key = sender;
        senders[sender].value += a.attributed_value;
        sender_sources[sender].insert(a.source.tx_hash);
        protocols[protocol].key = protocol;
        protocols[protocol].value += a.attributed_value;
        protocol_sources[protocol].insert(a.source.tx_hash);
        sources.insert(a.source.tx_hash);
        sourced_events.insert(a.arb_tx_hash);
      }
    }
    for (auto& [k, v] : senders) {
      v.count = sender_sources[k].size();
    }
    for (auto& [k, v] : protocols) {
      v.count = protocol_sources[k].size();
    }
    agg.by_sender = sorted_shares(senders);
    agg.by_protocol = sorted_shares(protocols);
    agg.top_creator_share = top_share(agg.by_sender, Rational(1, 100));
    agg.arbs_per_source = sources.empty()
                              ? Rational(0)
                              : Rational(static_cast<long long>(sourced_events.size()),
                                         static_cast<long long>(sources.size()));
    report.methods.push_back(std::move(agg));
  }

  std::map<std::string, ValueShare> arbs;
  for (const auto& [hash, sv] : arb_value) {
    arbs[sv.first].key = sv.first;
    arbs[sv.first].value += sv.second;
    ++arbs[sv.first].count;
  }
  report.arbitrageurs = sorted_shares(arbs);
  report.top_arbitrageur_share = top_share(report.arbitrageurs, Rational(1, 100));

  report.agreement.assign(methods.size(), std::vector<Rational>(methods.size(), Rational(0)));
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = 0; j < methods.size(); ++j) {
      long long shared = 0, agreed = 0;
      for (const auto& [hash, per_method] : by_event) {
        auto a = per_method.find(methods[i]);
        auto b = per_method.find(methods[j]);
        if (a == per_method.end() || b == per_method.end() || a->second->error ||
            b->second->error) {
          continue;
        }
        ++shared;
        agreed += agreement(a->second->result, b->second->result) ? 1 : 0;
      }
      report.agreement[i][j] = shared == 0 ? Rational(0) : Rational(agreed, shared);
    }
  }
  return report;
}

namespace {

json shares_json(const std::vector<ValueShare>& shares) {
  json out = json::array();
  for (const auto& s : shares) {
    out.push_back({{"key", s.key}, {"value", rational_json(s.value)}, {"count", s.count}});
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    out += c == '"' ? std::string("\"\"") : std::string(1, c);
  }
  return out + "\"";
}

std::string approx(const Rational& r) { return json(to_double(r)).dump(); }

}  // namespace

std::string aggregate_to_json(const AggregateReport& report) {
  json methods = json::array();
  for (const auto& m : report.methods) {
    const Rational coverage =
        m.events == 0 ? Rational(0) : Rational(static_cast<long long>(m.covered),
                                               static_cast<long long>(m.events));
    methods.push_back({{"method", std::string(to_string(m.method))},
                       {"events", m.events},
                       {"coverage", rational_json(coverage)},
                       {"pre_existing", m.pre_existing},
                       {"attributed_total", rational_json(m.attributed_total)},
                       {"pre_existing_total", rational_json(m.pre_existing_total)},
                       {"top_1pct_creator_share", rational_json(m.top_creator_share)},
                       {"arbs_per_source", rational_json(m.arbs_per_source)},
                       {"by_sender", shares_json(m.by_sender)},
                       {"by_protocol", shares_json(m.by_protocol)}});
  }
  json matrix = json::array();
  for (std::size_t i = 0; i < report.methods.size(); ++i) {
    for (std::size_t j = 0; j < report.methods.size(); ++j) {
      matrix.push_back({{"a", std::string(to_string(report.methods[i].method))},
                        {"b", std::string(to_string(report.methods[j].method))},
                        {"agreement", rational_json(report.agreement[i][j])}});
    }
  }
  json j = {{"methods", std::move(methods)},
            {"arbitrageurs", shares_json(report.arbitrageurs)},
            {"top_1pct_arbitrageur_share", rational_json(report.top_arbitrageur_share)},
            {"agreement", std::move(matrix)}};
  return j.dump(1);
}

std::vector<std::pair<std::string, std::string>> aggregate_tables(const AggregateReport& report) {
  std::string senders = "method,sender,value,approx,sources\n";
  std::string protocols = "method,protocol,value,approx,sources\n";
  for (const auto& m : report.methods) {
    const std::string method(to_string(m.method));
    for (const auto& s : m.by_sender) {
      senders += method + "," + csv_field(s.key) + "," + to_string(s.value) + "," + approx(s.value) +
                 "," + std::to_string(s.count) + "\n";
    }
    for (const auto& s : m.by_protocol) {
      protocols += method + "," + csv_field(s.key) + "," + to_string(s.value) + "," +
                   approx(s.value) + "," + std::to_string(s.count) + "\n";
    }
  }
  std::string matrix = "method_a,method_b,agreement,approx\n";
  for (std::size_t i = 0; i < report.methods.size(); ++i) {
    for (std::size_t j = 0; j < report.methods.size(); ++j) {
      matrix += std::string(to_string(report.methods[i].method)) + "," +
                std::string(to_string(report.methods[j].method)) + "," +
                to_string(report.agreement[i][j]) + "," + approx(report.agreement[i][j]) + "\n";
    }
  }
  std::string arbs = "arb_sender,profit,approx,events\n";
  for (const auto& s : report.arbitrageurs) {
    arbs += csv_field(s.key) + "," + to_string(s.value) + "," + approx(s.value) + "," +
            std::to_string(s.count) + "\n";
  }
  return {{"by_sender.csv", senders},
          {"by_protocol.csv", protocols},
          {"agreement.csv", matrix},
          {"arbitrageurs.csv", arbs}};
}

}  // namespace mevattr
