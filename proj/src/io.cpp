#include "mevattr/io.hpp"

#include "json.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace mevattr {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ParseError, where + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) {
    parse_fail(where, "expected an object");
  }
  auto it = obj.find(key);
  if (it == obj.end()) {
    parse_fail(where, std::string("missing field '") + key + "'");
  }
  return *it;
}

Int as_int(const json& v, const std::string& where) {
  if (v.is_string()) {
    try {
      return parse_int(v.get_ref<const std::string&>());
    } catch (const Error& e) {
      parse_fail(where, e.what());
    }
  }
  if (v.is_number_unsigned()) {
    return Int(v.get<std::uint64_t>());
  }
  if (v.is_number_integer()) {
    return Int(v.get<std::int64_t>());
  }
  parse_fail(where, "expected an integer, got " + v.dump());
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) {
    parse_fail(where, "expected a string, got " + v.dump());
  }
  return v.get<std::string>();
}

std::uint64_t as_u64(const json& v, const std::string& where) {
  const Int i = as_int(v, where);
  if (i < 0 || i > std::numeric_limits<std::uint64_t>::max()) {
    parse_fail(where, "integer out of range");
  }
  return i.convert_to<std::uint64_t>();
}

json parse_document(std::istream& in, const std::string& what) {
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    parse_fail(what + " at byte " + std::to_string(e.byte), e.what());
  }
}

Transaction tx_from_json(const json& j, const std::string& where) {
  Transaction tx;
  tx.tx_hash = as_string(field(j, "tx_hash", where), where);
  tx.sender = j.contains("sender") ? as_string(j["sender"], where) : std::string();
  if (j.contains("protocol_tag") && !j["protocol_tag"].is_null()) {
    tx.protocol_tag = as_string(j["protocol_tag"], where);
  }
  tx.fee_tau = j.contains("fee_tau") ? as_int(j["fee_tau"], where) : Int(0);
  tx.bid_beta = j.contains("bid_beta") ? as_int(j["bid_beta"], where) : Int(0);
  const std::string tx_where = where + " tx " + tx.tx_hash.str();
  for (const auto& s : field(j, "swaps", where)) {
    SwapIntent swap;
    swap.pool_id = as_string(field(s, "pool_id", tx_where), tx_where);
    swap.token_in = as_string(field(s, "token_in", tx_where), tx_where);
    swap.amount_in = as_int(field(s, "amount_in", tx_where), tx_where);
    if (swap.amount_in <= 0) {
      parse_fail(tx_where, "amount_in must be positive");
    }
    tx.swaps.push_back(std::move(swap));
  }
  return tx;
}

json tx_to_json(const Transaction& tx) {
  json swaps = json::array();
  for (const auto& s : tx.swaps) {
    swaps.push_back({{"pool_id", s.pool_id.str()},
                     {"token_in", s.token_in.str()},
                     {"amount_in", s.amount_in.str()}});
  }
  return {{"tx_hash", tx.tx_hash.str()},
          {"sender", tx.sender},
          {"protocol_tag", tx.protocol_tag ? json(*tx.protocol_tag) : json(nullptr)},
          {"fee_tau", tx.fee_tau.str()},
          {"bid_beta", tx.bid_beta.str()},
          {"swaps", std::move(swaps)}};
}

template <typename F>
auto with_file(const std::filesystem::path& path, F&& read) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  }
  return read(in);
}

}  // namespace

WorldState read_state(std::istream& in) {
  const json doc = parse_document(in, "state");
  WorldState state;
  std::size_t i = 0;
  for (const auto& p : field(doc, "pools", "state")) {
    const std::string where = "state pool #" + std::to_string(i++);
    PoolState pool;
    pool.pool_id = as_string(field(p, "pool_id", where), where);
    pool.token0 = as_string(field(p, "token0", where), where);
    pool.token1 = as_string(field(p, "token1", where), where);
    pool.reserve0 = as_int(field(p, "reserve0", where), where);
    pool.reserve1 = as_int(field(p, "reserve1", where), where);
    const Int fee = as_int(field(p, "fee_ppm", where), where);
    if (fee < 0 || fee >= kFeeDenominator) {
      parse_fail(where, "fee_ppm out of range");
    }
    pool.fee_ppm = fee.convert_to<std::uint32_t>();
    try {
      pool.validate();
    } catch (const Error& e) {
      parse_fail(where, e.what());
    }
    if (state.find(pool.pool_id) != nullptr) {
      parse_fail(where, "duplicate pool " + pool.pool_id.str());
    }
    state.put(std::move(pool));
  }
  return state;
}

void write_state(std::ostream& out, const WorldState& state) {
  json pools = json::array();
  for (const auto& [id, p] : state.pools) {
    pools.push_back({{"pool_id", id.str()},
                     {"token0", p.token0.str()},
                     {"token1", p.token1.str()},
                     {"reserve0", p.reserve0.str()},
                     {"reserve1", p.reserve1.str()},
                     {"fee_ppm", std::to_string(p.fee_ppm)}});
  }
  out << json{{"pools", std::move(pools)}}.dump(1) << '\n';
}

std::vector<Block> read_blocks(std::istream& in) {
  std::vector<Block> blocks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const std::string where = "blocks line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      parse_fail(where + " offset " + std::to_string(e.byte), e.what());
    }
    Block block;
    block.number = as_u64(field(j, "number", where), where);
    for (const auto& t : field(j, "txs", where)) {
      block.txs.push_back(tx_from_json(t, where));
    }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

void write_blocks(std::ostream& out, const std::vector<Block>& blocks) {
  for (const auto& b : blocks) {
    json txs = json::array();
    for (const auto& tx : b.txs) {
      txs.push_back(tx_to_json(tx));
    }
    out << json{{"number", std::to_string(b.number)}, {"txs", std::move(txs)}}.dump() << '\n';
  }
}

PriceTable read_prices(std::istream& in) {
  const json doc = parse_document(in, "prices");
  PriceTable t;
  t.base_token = as_string(field(doc, "base_token", "prices"), "prices");
  for (const auto& p : field(doc, "prices", "prices")) {
    const std::string where = "prices entry";
    const TokenId token = as_string(field(p, "token", where), where);
    const Int num = as_int(field(p, "price_num", where), where + " " + token.str());
    const Int den = as_int(field(p, "price_den", where), where + " " + token.str());
    if (den <= 0 || num <= 0) {
      parse_fail(where + " " + token.str(), "price must be positive");
    }
    t.prices[token] = Rational(num, den);
  }
  try {
    t.validate();
  } catch (const Error& e) {
    parse_fail("prices", e.what());
  }
  return t;
}

void write_prices(std::ostream& out, const PriceTable& prices) {
  json list = json::array();
  for (const auto& [token, p] : prices.prices) {
    list.push_back({{"token", token.str()},
                    {"price_num", numerator_of(p).str()},
                    {"price_den", denominator_of(p).str()}});
  }
  out << json{{"base_token", prices.base_token.str()}, {"prices", std::move(list)}}.dump(1) << '\n';
}

std::vector<GroundTruth> read_ground_truth(std::istream& in) {
  const json doc = parse_document(in, "ground truth");
  std::vector<GroundTruth> out;
  for (const auto& s : field(doc, "scenarios", "ground truth")) {
    const std::string where = "ground truth scenario";
    GroundTruth g;
    g.seed = as_u64(field(s, "seed", where), where);
    g.arb_tx_hash = as_string(field(s, "arb_tx_hash", where), where);
    const json& src = field(s, "expected_source", where);
    const std::string kind = as_string(field(src, "kind", where), where);
    if (kind == "tx") {
      g.expected.kind = ExpectedSource::Kind::Tx;
      g.expected.txs = {as_string(field(src, "tx_hash", where), where)};
    } else if (kind == "pre_existing") {
      g.expected.kind = ExpectedSource::Kind::PreExisting;
    } else if (kind == "tied") {
      g.expected.kind = ExpectedSource::Kind::Tied;
      for (const auto& h : field(src, "tx_hashes", where)) {
        g.expected.txs.push_back(as_string(h, where));
      }
    } else {
      parse_fail(where, "unknown expected_source kind '" + kind + "'");
    }
    if (s.contains("creators")) {
      for (const auto& h : s["creators"]) {
        g.creator_hashes.push_back(as_string(h, where));
      }
    }
    if (s.contains("competitors")) {
      for (const auto& h : s["competitors"]) {
        g.competing_hashes.push_back(as_string(h, where));
      }
    }
    if (s.contains("route")) {
      for (const auto& h : s["route"]) {
        g.route.hops.push_back({as_string(field(h, "pool_id", where), where),
                                as_string(field(h, "token_in", where), where),
                                as_string(field(h, "token_out", where), where)});
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

void write_ground_truth(std::ostream& out, const std::vector<GroundTruth>& truths) {
  json list = json::array();
  for (const auto& g : truths) {
    json src = {{"kind", std::string(to_string(g.expected.kind))}};
    if (g.expected.kind == ExpectedSource::Kind::Tx) {
      src["tx_hash"] = g.expected.txs.front().str();
    } else if (g.expected.kind == ExpectedSource::Kind::Tied) {
      json hashes = json::array();
      for (const auto& h : g.expected.txs) {
        hashes.push_back(h.str());
      }
      src["tx_hashes"] = std::move(hashes);
    }
    json creators = json::array();
    for (const auto& h : g.creator_hashes) {
      creators.push_back(h.str());
    }
    json competitors = json::array();
    for (const auto& h : g.competing_hashes) {
      competitors.push_back(h.str());
    }
    json route = json::array();
    for (const auto& hop : g.route.hops) {
      route.push_back({{"pool_id", hop.pool_id.str()},
                       {"token_in", hop.token_in.str()},
                       {"token_out", hop.token_out.str()}});
    }
    list.push_back({{"seed", std::to_string(g.seed)},
                    {"arb_tx_hash", g.arb_tx_hash.str()},
                    {"expected_source", std::move(src)},
                    {"creators", std::move(creators)},
                    {"competitors", std::move(competitors)},
                    {"route", std::move(route)}});
  }
  out << json{{"scenarios", std::move(list)}}.dump(1) << '\n';
}

ChainSegment load_segment(const std::filesystem::path& blocks, const std::filesystem::path& state) {
  ChainSegment segment;
  segment.initial_state = with_file(state, [](std::istream& in) { return read_state(in); });
  segment.blocks = with_file(blocks, [](std::istream& in) { return read_blocks(in); });
  segment.validate();
  return segment;
}

PriceTable load_prices(const std::filesystem::path& path) {
  return with_file(path, [](std::istream& in) { return read_prices(in); });
}

std::vector<GroundTruth> load_ground_truth(const std::filesystem::path& path) {
  return with_file(path, [](std::istream& in) { return read_ground_truth(in); });
}

void save_suite(const std::filesystem::path& dir, const Suite& suite) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) {
      throw Error(ErrorCode::InvalidArgument, "cannot write " + (dir / name).string());
    }
    return out;
  };
  {
    auto out = open("blocks.jsonl");
    write_blocks(out, suite.segment.blocks);
  }
  {
    auto out = open("state.json");
    write_state(out, suite.segment.initial_state);
  }
  {
    auto out = open("prices.json");
    write_prices(out, suite.prices);
  }
  {
    auto out = open("ground_truth.json");
    write_ground_truth(out, suite.truths);
  }
}

}  // namespace mevattr
