// mevattr: detect atomic arbitrage in a block file and attribute who created each opportunity.

#include "mevattr/io.hpp"
#include "mevattr/pipeline.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace mevattr;

namespace {

// "0.05", "1/20" or "3" as an exact rational.
Rational parse_ratio(const std::string& text) {
  if (auto slash = text.find('/'); slash != std::string::npos) {
    return make_rational(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
  }
  auto dot = text.find('.');
  if (dot == std::string::npos) {
    return Rational(parse_int(text));
  }
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  const bool negative = !digits.empty() && digits[0] == '-';
  if (digits.empty() || digits == "-" || text.substr(dot + 1).empty()) {
    throw Error(ErrorCode::InvalidArgument, "bad number '" + text + "'");
  }
  if (text.substr(0, dot).empty() || text.substr(0, dot) == "-") {
    digits.insert(negative ? 1 : 0, "0");
  }
  Int den = 1;
  for (std::size_t i = dot + 1; i < text.size(); ++i) {
    den *= 10;
  }
  return make_rational(parse_int(digits), den);
}

// Writes to --out when given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) {
        throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
      }
    }
  }
  std::ostream& out() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

struct Inputs {
  std::string blocks, state, prices, truth, records;
};

struct Loaded {
  ChainSegment segment;
  PriceTable prices;
};

Loaded load(const Inputs& in) {
  Loaded l{load_segment(in.blocks, in.state), load_prices(in.prices)};
  return l;
}

std::vector<Position> detected_positions(const std::vector<Detection>& detections) {
  std::vector<Position> out;
  for (const auto& d : detections) {
    out.push_back(d.position);
  }
  return out;
}

void add_inputs(CLI::App* cmd, Inputs& in, bool need_prices = true) {
  cmd->add_option("--blocks", in.blocks, "block file (JSONL)")->required();
  cmd->add_option("--state", in.state, "initial state file")->required();
  auto* p = cmd->add_option("--prices", in.prices, "reference price table");
  if (need_prices) {
    p->required();
  }
}

struct RunFlags {
  std::vector<std::string> methods{"simulation", "coefficient"};
  std::int64_t depth = kDefaultDepth;
  std::string threshold = "1/20";
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  std::string mode = "optimal";
  std::size_t jobs = 1;

  RunConfig config() const {
    RunConfig c;
    c.methods.clear();
    for (const auto& m : methods) {
      const Method parsed = parse_method(m);
      if (parsed == Method::External) {
        throw Error(ErrorCode::InvalidArgument, "the external method needs a provider");
      }
      c.methods.push_back(parsed);
    }
    c.depth = depth;
    c.threshold = parse_ratio(threshold);
    c.n_samples = samples;
    c.seed = seed;
    c.mode = mode == "fixed" ? ReplayMode::FixedAmounts : ReplayMode::OptimalAmount;
    c.jobs = jobs;
    c.validate();
    return c;
  }
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--methods", f.methods,
                  "simulation, coefficient, shapley-exact, shapley-mc")
      ->delimiter(',');
  cmd->add_option("--depth", f.depth, "lookback in blocks");
  cmd->add_option("--threshold", f.threshold, "edge threshold as a fraction of profit");
  cmd->add_option("--samples", f.samples, "Monte Carlo permutations");
  cmd->add_option("--seed", f.seed, "Monte Carlo seed");
  cmd->add_option("--mode", f.mode, "counterfactual replay mode")
      ->check(CLI::IsMember({"fixed", "optimal"}));
  cmd->add_option("--jobs", f.jobs, "events attributed concurrently");
}

std::vector<Method> methods_of(const std::vector<ResultRecord>& records) {
  std::set<Method> seen;
  for (const auto& r : records) {
    seen.insert(r.result.method);
  }
  return {seen.begin(), seen.end()};
}

int run(int argc, char** argv) {
  CLI::App app{"Attribute atomic arbitrage to the transactions that created the opportunity"};
  app.require_subcommand(1);

  Inputs in;
  RunFlags flags;
  std::string out;

  auto* detect_cmd = app.add_subcommand("detect", "list atomic arbitrage transactions");
  add_inputs(detect_cmd, in);
  detect_cmd->add_option("--out", out, "output file (default stdout)");

  auto* attribute_cmd = app.add_subcommand("attribute", "attribute every detected arbitrage");
  add_inputs(attribute_cmd, in);
  add_run_flags(attribute_cmd, flags);
  attribute_cmd->add_option("--out", out, "output file (default stdout)");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "score attributions against ground truth");
  add_inputs(evaluate_cmd, in);
  add_run_flags(evaluate_cmd, flags);
  evaluate_cmd->add_option("--truth", in.truth, "ground-truth file")->required();
  evaluate_cmd->add_option("--records", in.records,
                           "existing attribution records (default: attribute now)");
  evaluate_cmd->add_option("--out", out, "output file (default stdout)");

  auto* aggregate_cmd = app.add_subcommand("aggregate", "summarise attribution records");
  aggregate_cmd->add_option("--records", in.records, "attribution records")->required();
  aggregate_cmd->add_option("--out", out,
                            "output directory for aggregate.json and CSV tables (default stdout)");

  ScenarioSpec spec;
  std::size_t n = 1;
  std::string imbalance = "6/5", split = "auto";
  auto* generate_cmd = app.add_subcommand("generate", "write a synthetic scenario suite");
  generate_cmd->add_option("--n", n, "number of scenarios");
  generate_cmd->add_option("--seed", spec.seed, "seed of the first scenario");
  generate_cmd->add_option("--pools", spec.n_pools, "pools per scenario");
  generate_cmd->add_option("--blocks-min", spec.n_blocks, "blocks per scenario");
  generate_cmd->add_option("--blocks-max", spec.n_blocks_max, "draw block count up to this");
  generate_cmd->add_option("--noise", spec.noise_tx_per_block, "noise transactions per block");
  generate_cmd->add_option("--noise-max", spec.noise_tx_max, "draw noise count up to this");
  generate_cmd->add_option("--creators", spec.n_creators, "creator transactions");
  generate_cmd->add_option("--competitors", spec.competing_arbs, "competing arbitrages");
  generate_cmd->add_option("--imbalance", imbalance, "cycle coefficient after the creators");
  generate_cmd->add_option("--fee", spec.fee_ppm, "pool fee in parts per million");
  generate_cmd->add_flag("--preexisting", spec.preexisting, "opportunity already in the state");
  generate_cmd->add_option("--split", split, "auto, dominant, symmetric, cascade");
  generate_cmd->add_option("--route-length", spec.route_length, "pools in the arbitrage cycle");
  generate_cmd->add_option("--out", out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*detect_cmd) {
      const Loaded l = load(in);
      const SegmentIndex index(l.segment);
      Sink sink(out);
      for (const auto& d : detect(index, l.prices)) {
        sink.out() << detection_to_json(d) << '\n';
      }
    } else if (*attribute_cmd) {
      const RunConfig config = flags.config();
      const Loaded l = load(in);
      const SegmentIndex index(l.segment);
      const auto records =
          attribute_events(index, l.prices, detected_positions(detect(index, l.prices)), config);
      Sink sink(out);
      for (const auto& r : records) {
        sink.out() << record_to_json(r) << '\n';
      }
    } else if (*evaluate_cmd) {
      const RunConfig config = flags.config();
      const Loaded l = load(in);
      const SegmentIndex index(l.segment);
      const auto truths = load_ground_truth(in.truth);
      std::vector<ResultRecord> records;
      std::vector<Method> methods = config.methods;
      if (!in.records.empty()) {
        std::ifstream f(in.records);
        if (!f) {
          throw Error(ErrorCode::ParseError, "cannot open " + in.records);
        }
        records = read_records(f);
        if (evaluate_cmd->count("--methods") == 0) {
          methods = methods_of(records);
        }
      } else {
        // Only the ground-truth arbitrages are scored, so only they are attributed.
        std::vector<Position> events;
        for (const auto& t : truths) {
          auto e = index.find(t.arb_tx_hash);
          if (!e) {
            throw Error(ErrorCode::GroundTruthMismatch,
                        "arbitrage " + t.arb_tx_hash.str() + " is not in the block file");
          }
          events.push_back(index.entries()[*e].position);
        }
        records = attribute_events(index, l.prices, events, config);
      }
      const EvaluationSummary summary = evaluate(index, truths, records, methods);
      Sink sink(out);
      sink.out() << summary_to_json(summary) << '\n';
      for (const auto& m : summary.methods) {
        std::cerr << to_string(m.method) << ": mean " << m.mean_seconds * 1000 << " ms/event\n";
      }
    } else if (*aggregate_cmd) {
      std::ifstream f(in.records);
      if (!f) {
        throw Error(ErrorCode::ParseError, "cannot open " + in.records);
      }
      const AggregateReport report = aggregate(read_records(f));
      if (out.empty()) {
        std::cout << aggregate_to_json(report) << '\n';
      } else {
        fs::create_directories(out);
        Sink json(fs::path(out) / "aggregate.json");
        json.out() << aggregate_to_json(report) << '\n';
        for (const auto& [name, body] : aggregate_tables(report)) {
          Sink table(fs::path(out) / name);
          table.out() << body;
        }
      }
    } else if (*generate_cmd) {
      spec.imbalance_magnitude = parse_ratio(imbalance);
      spec.split = parse_split(split);
      spec.validate();
      const Suite suite = combine(generate_suite(spec.seed, n, spec));
      save_suite(out, suite);
    }
  } catch (const Error& e) {
    std::cerr << "mevattr: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::InvalidArgument:
      case ErrorCode::InfeasibleSpec:
        return 1;
      default:
        return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "mevattr: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
