#pragma once

#include "mevattr/amm.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace mevattr {

struct SwapIntent {
  PoolId pool_id;
  TokenId token_in;
  Int amount_in;

  friend bool operator==(const SwapIntent&, const SwapIntent&) = default;
};

struct Transaction {
  TxHash tx_hash;
  std::string sender;
  std::optional<std::string> protocol_tag;
  std::vector<SwapIntent> swaps;  // empty for non-swap transactions
  Int fee_tau = 0;                // base-token units
  Int bid_beta = 0;               // base-token units

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

struct Block {
  std::uint64_t number = 0;
  std::vector<Transaction> txs;  // consensus order

  friend bool operator==(const Block&, const Block&) = default;
};

/// (block, index) in consensus order; tx_index == -1 is the boundary before the block's first tx.
struct Position {
  std::uint64_t block_number = 0;
  std::int64_t tx_index = -1;

  static Position before_block(std::uint64_t block) { return {block, -1}; }

  friend auto operator<=>(const Position&, const Position&) = default;
  friend bool operator==(const Position&, const Position&) = default;
};

std::string to_string(const Position& p);

struct ChainSegment {
  WorldState initial_state;
  std::vector<Block> blocks;

  /// Strictly increasing block numbers, unique hashes, every referenced pool present initially.
  void validate() const;
  /// Boundary before the segment's first transaction.
  Position start() const;
  /// Throws PositionOutOfRange.
  const Transaction& tx_at(const Position& pos) const;
  bool contains(const Position& pos) const;
};

struct PoolDelta {
  Int reserve0;
  Int reserve1;

  friend bool operator==(const PoolDelta&, const PoolDelta&) = default;
};

struct StateDelta {
  std::map<PoolId, PoolDelta> pools;

  bool empty() const { return pools.empty(); }
  /// Adds the delta to every pool in state. Throws MissingPool.
  void apply_to(WorldState& state) const;

  friend bool operator==(const StateDelta&, const StateDelta&) = default;
};

/// One executed swap with its realised amounts.
struct SwapFill {
  PoolId pool_id;
  TokenId token_in;
  TokenId token_out;
  Int amount_in;
  Int amount_out;
};

struct TxReceipt {
  StateDelta delta;
  std::vector<SwapFill> fills;
  bool reverted = false;
  std::string revert_reason;
};

struct ApplyResult {
  WorldState state;
  StateDelta delta;
  std::vector<SwapFill> fills;
  bool reverted = false;
};

/// Executes the swaps in order; any failing swap reverts the whole transaction.
ApplyResult apply_tx(const WorldState& state, const Transaction& tx);

/// In-place variant of apply_tx; on revert the state is left untouched.
TxReceipt apply_tx_in_place(WorldState& state, const Transaction& tx);

/// Applies every transaction at position <= upto, starting from the initial state.
WorldState replay_prefix(const ChainSegment& segment, const Position& upto);

/// Applies only transactions whose hash is in include (position <= upto), in chronological order.
WorldState replay_with_subset(const ChainSegment& segment, const std::unordered_set<TxHash>& include,
                              const Position& upto);

std::set<PoolId> pools_touched(const Transaction& tx);

/// SHA-256 (hex) over the pools sorted by id.
std::string state_digest(const WorldState& state);

/// Lower-case hex SHA-256 of bytes.
std::string sha256_hex(std::string_view bytes);

/// Flattened view of a segment with per-pool reserve histories, so the state of any set of
/// pools at any boundary is a binary search away. Holds a reference to the segment; the
/// segment must outlive the index.
class SegmentIndex {
 public:
  struct Entry {
    Position position;
    const Transaction* tx;
  };

  explicit SegmentIndex(const ChainSegment& segment);

  const ChainSegment& segment() const noexcept { return *segment_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

  /// Index into entries() of the first transaction at or after pos.
  std::size_t lower_bound(const Position& pos) const;
  /// Index into entries() of the first transaction strictly after pos.
  std::size_t upper_bound(const Position& pos) const;
  std::optional<std::size_t> find(const TxHash& hash) const;
  const Entry& entry_at(const Position& pos) const;

  /// Same result as replay_prefix(segment, upto).
  WorldState state_at(const Position& upto) const;
  /// State after applying entries [0, end_entry).
  WorldState state_before_entry(std::size_t end_entry) const;
  /// Like state_before_entry but only containing the listed pools. Throws MissingPool.
  WorldState project_before_entry(const std::set<PoolId>& pools, std::size_t end_entry) const;

 private:
  struct Reserves {
    std::size_t entry;  // reserves after this entry executed
    Int reserve0;
    Int reserve1;
  };

  void load_pool(PoolState& pool, std::size_t end_entry) const;

  const ChainSegment* segment_;
  std::vector<Entry> entries_;
  std::unordered_map<TxHash, std::size_t> by_hash_;
  std::unordered_map<PoolId, std::vector<Reserves>> history_;
};

}  // namespace mevattr
