#include "mevattr/chain.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>

namespace mevattr {

std::string to_string(const Position& p) {
  return std::to_string(p.block_number) + ":" + std::to_string(p.tx_index);
}

void ChainSegment::validate() const {
  for (const auto& [id, pool] : initial_state.pools) {
    pool.validate();
    if (id != pool.pool_id) {
      throw Error(ErrorCode::InvalidArgument, "pool keyed under wrong id " + id.str());
    }
  }
  std::unordered_set<TxHash> seen;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (b > 0 && blocks[b].number <= blocks[b - 1].number) {
      throw Error(ErrorCode::InvalidArgument,
                  "block numbers not strictly increasing at " + std::to_string(blocks[b].number));
    }
    for (const auto& tx : blocks[b].txs) {
      if (tx.tx_hash.empty() || !seen.insert(tx.tx_hash).second) {
        throw Error(ErrorCode::InvalidArgument, "duplicate or empty tx hash '" + tx.tx_hash.str() + "'");
      }
      for (const auto& s : tx.swaps) {
        if (initial_state.find(s.pool_id) == nullptr) {
          throw Error(ErrorCode::MissingPool,
                      s.pool_id.str() + " referenced by " + tx.tx_hash.str());
        }
        if (s.amount_in <= 0) {
          throw Error(ErrorCode::InvalidArgument, "non-positive amount_in in " + tx.tx_hash.str());
        }
      }
      if (tx.fee_tau < 0 || tx.bid_beta < 0) {
        throw Error(ErrorCode::InvalidArgument, "negative fee or bid in " + tx.tx_hash.str());
      }
    }
  }
}

Position ChainSegment::start() const {
  return Position::before_block(blocks.empty() ? 0 : blocks.front().number);
}

namespace {

const Block* find_block(const ChainSegment& segment, std::uint64_t number) {
  auto it = std::lower_bound(segment.blocks.begin(), segment.blocks.end(), number,
                             [](const Block& b, std::uint64_t n) { return b.number < n; });
  if (it == segment.blocks.end() || it->number != number) {
    return nullptr;
  }
  return &*it;
}

}  // namespace

bool ChainSegment::contains(const Position& pos) const {
  if (blocks.empty()) {
    return pos == start();
  }
  const Block* b = find_block(*this, pos.block_number);
  if (b == nullptr) {
    return false;
  }
  return pos.tx_index >= -1 && pos.tx_index < static_cast<std::int64_t>(b->txs.size());
}

const Transaction& ChainSegment::tx_at(const Position& pos) const {
  const Block* b = find_block(*this, pos.block_number);
  if (b == nullptr || pos.tx_index < 0 || pos.tx_index >= static_cast<std::int64_t>(b->txs.size())) {
    throw Error(ErrorCode::PositionOutOfRange, to_string(pos));
  }
  return b->txs[static_cast<std::size_t>(pos.tx_index)];
}

void StateDelta::apply_to(WorldState& state) const {
  for (const auto& [id, d] : pools) {
    PoolState* p = state.find(id);
    if (p == nullptr) {
      throw Error(ErrorCode::MissingPool, id.str());
    }
    p->reserve0 += d.reserve0;
    p->reserve1 += d.reserve1;
  }
}

TxReceipt apply_tx_in_place(WorldState& state, const Transaction& tx) {
  TxReceipt receipt;
  if (tx.swaps.empty()) {
    return receipt;
  }
  // Scratch copies of the touched pools; committed only if every swap succeeds.
  std::vector<std::pair<PoolState*, PoolState>> scratch;
  auto scratch_for = [&](const PoolId& id) -> PoolState& {
    for (auto& [orig, copy] : scratch) {
      if (orig->pool_id == id) {
        return copy;
      }
    }
    PoolState* orig = state.find(id);
    if (orig == nullptr) {
      throw Error(ErrorCode::MissingPool, id.str() + " referenced by " + tx.tx_hash.str());
    }
    scratch.emplace_back(orig, *orig);
    return scratch.back().second;
  };

  for (const auto& swap : tx.swaps) {
    PoolState& pool = scratch_for(swap.pool_id);
    try {
      SwapResult r = swap_exact_in(pool, swap.token_in, swap.amount_in);
      receipt.fills.push_back({swap.pool_id, swap.token_in, pool.other(swap.token_in), r.amount_in,
                               r.amount_out});
      pool = std::move(r.new_pool);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::MissingPool) {
        throw;
      }
      receipt.reverted = true;
      receipt.revert_reason = e.what();
      receipt.fills.clear();
      return receipt;
    }
  }
  for (auto& [orig, copy] : scratch) {
    receipt.delta.pools[orig->pool_id] =
        PoolDelta{copy.reserve0 - orig->reserve0, copy.reserve1 - orig->reserve1};
    *orig = std::move(copy);
  }
  return receipt;
}

ApplyResult apply_tx(const WorldState& state, const Transaction& tx) {
  ApplyResult out{state, {}, {}, false};
  TxReceipt receipt = apply_tx_in_place(out.state, tx);
  out.delta = std::move(receipt.delta);
  out.fills = std::move(receipt.fills);
  out.reverted = receipt.reverted;
  return out;
}

WorldState replay_prefix(const ChainSegment& segment, const Position& upto) {
  if (!segment.contains(upto)) {
    throw Error(ErrorCode::PositionOutOfRange, to_string(upto));
  }
  WorldState state = segment.initial_state;
  for (const auto& block : segment.blocks) {
    for (std::size_t i = 0; i < block.txs.size(); ++i) {
      if (Position{block.number, static_cast<std::int64_t>(i)} > upto) {
        return state;
      }
      apply_tx_in_place(state, block.txs[i]);
    }
  }
  return state;
}

WorldState replay_with_subset(const ChainSegment& segment, const std::unordered_set<TxHash>& include,
                              const Position& upto) {
  if (!segment.contains(upto)) {
    throw Error(ErrorCode::PositionOutOfRange, to_string(upto));
  }
  WorldState state = segment.initial_state;
  std::size_t applied = 0;
  for (const auto& block : segment.blocks) {
    for (std::size_t i = 0; i < block.txs.size(); ++i) {
      if (Position{block.number, static_cast<std::int64_t>(i)} > upto) {
        break;
      }
      if (include.contains(block.txs[i].tx_hash)) {
        apply_tx_in_place(state, block.txs[i]);
        ++applied;
      }
    }
  }
  if (applied != include.size()) {
    // Some requested hash is not at a position <= upto; report the first one in sorted order.
    std::vector<std::string> missing;
    std::unordered_set<TxHash> present;
    for (const auto& block : segment.blocks) {
      for (std::size_t i = 0; i < block.txs.size(); ++i) {
        if (Position{block.number, static_cast<std::int64_t>(i)} <= upto) {
          present.insert(block.txs[i].tx_hash);
        }
      }
    }
    for (const auto& h : include) {
      if (!present.contains(h)) {
        missing.push_back(h.str());
      }
    }
    std::sort(missing.begin(), missing.end());
    throw Error(ErrorCode::UnknownHash, missing.empty() ? std::string("?") : missing.front());
  }
  return state;
}

std::set<PoolId> pools_touched(const Transaction& tx) {
  std::set<PoolId> out;
  for (const auto& s : tx.swaps) {
    out.insert(s.pool_id);
  }
  return out;
}

std::string state_digest(const WorldState& state) {
  std::string canonical;
  for (const auto& [id, p] : state.pools) {
    canonical += id.str();
    canonical += '\x1f';
    canonical += p.token0.str();
    canonical += '\x1f';
    canonical += p.token1.str();
    canonical += '\x1f';
    canonical += p.reserve0.str();
    canonical += '\x1f';
    canonical += p.reserve1.str();
    canonical += '\x1f';
    canonical += std::to_string(p.fee_ppm);
    canonical += '\x1e';
  }
  return sha256_hex(canonical);
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 0xf];
  }
  return hex;
}

SegmentIndex::SegmentIndex(const ChainSegment& segment) : segment_(&segment) {
  for (const auto& block : segment.blocks) {
    for (std::size_t i = 0; i < block.txs.size(); ++i) {
      entries_.push_back({Position{block.number, static_cast<std::int64_t>(i)}, &block.txs[i]});
      by_hash_.emplace(block.txs[i].tx_hash, entries_.size() - 1);
    }
  }
  WorldState state = segment.initial_state;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    TxReceipt receipt = apply_tx_in_place(state, *entries_[i].tx);
    for (const auto& [id, d] : receipt.delta.pools) {
      const PoolState& p = state.at(id);
      history_[id].push_back({i, p.reserve0, p.reserve1});
    }
  }
}

std::size_t SegmentIndex::lower_bound(const Position& pos) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), pos,
                             [](const Entry& e, const Position& p) { return e.position < p; });
  return static_cast<std::size_t>(it - entries_.begin());
}

std::size_t SegmentIndex::upper_bound(const Position& pos) const {
  auto it = std::upper_bound(entries_.begin(), entries_.end(), pos,
                             [](const Position& p, const Entry& e) { return p < e.position; });
  return static_cast<std::size_t>(it - entries_.begin());
}

std::optional<std::size_t> SegmentIndex::find(const TxHash& hash) const {
  auto it = by_hash_.find(hash);
  if (it == by_hash_.end()) {
    return std::nullopt;
  }
  return it->second;
}

const SegmentIndex::Entry& SegmentIndex::entry_at(const Position& pos) const {
  const std::size_t i = lower_bound(pos);
  if (i == entries_.size() || entries_[i].position != pos) {
    throw Error(ErrorCode::PositionOutOfRange, to_string(pos));
  }
  return entries_[i];
}

void SegmentIndex::load_pool(PoolState& pool, std::size_t end_entry) const {
  auto h = history_.find(pool.pool_id);
  if (h == history_.end()) {
    return;
  }
  const auto& records = h->second;
  auto it = std::lower_bound(records.begin(), records.end(), end_entry,
                             [](const Reserves& r, std::size_t e) { return r.entry < e; });
  if (it == records.begin()) {
    return;
  }
  --it;
  pool.reserve0 = it->reserve0;
  pool.reserve1 = it->reserve1;
}

WorldState SegmentIndex::state_before_entry(std::size_t end_entry) const {
  WorldState state = segment_->initial_state;
  for (auto& [id, pool] : state.pools) {
    load_pool(pool, end_entry);
  }
  return state;
}

WorldState SegmentIndex::project_before_entry(const std::set<PoolId>& pools,
                                              std::size_t end_entry) const {
  WorldState state;
  for (const auto& id : pools) {
    PoolState pool = segment_->initial_state.at(id);
    load_pool(pool, end_entry);
    state.pools.emplace(id, std::move(pool));
  }
  return state;
}

WorldState SegmentIndex::state_at(const Position& upto) const {
  if (!segment_->contains(upto)) {
    throw Error(ErrorCode::PositionOutOfRange, to_string(upto));
  }
  return state_before_entry(upper_bound(upto));
}

}  // namespace mevattr
