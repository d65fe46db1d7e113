#pragma once

#include "mevattr/scenario.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace mevattr {

// File formats. Every integer is written as a decimal string; readers also accept JSON numbers.
//   blocks.jsonl       one block per line: {number, txs:[{tx_hash, sender, protocol_tag, fee_tau,
//                      bid_beta, swaps:[{pool_id, token_in, amount_in}]}]}
//   state.json         {pools:[{pool_id, token0, token1, reserve0, reserve1, fee_ppm}]}
//   prices.json        {base_token, prices:[{token, price_num, price_den}]}
//   ground_truth.json  {scenarios:[{seed, arb_tx_hash, expected_source, creators, competitors, route}]}
// Readers throw ParseError naming the line (JSONL) or byte offset.

WorldState read_state(std::istream& in);
void write_state(std::ostream& out, const WorldState& state);

std::vector<Block> read_blocks(std::istream& in);
void write_blocks(std::ostream& out, const std::vector<Block>& blocks);

PriceTable read_prices(std::istream& in);
void write_prices(std::ostream& out, const PriceTable& prices);

std::vector<GroundTruth> read_ground_truth(std::istream& in);
void write_ground_truth(std::ostream& out, const std::vector<GroundTruth>& truths);

/// Reads and validates a segment from a block file and a state file.
ChainSegment load_segment(const std::filesystem::path& blocks, const std::filesystem::path& state);
PriceTable load_prices(const std::filesystem::path& path);
std::vector<GroundTruth> load_ground_truth(const std::filesystem::path& path);

/// Writes blocks.jsonl, state.json, prices.json and ground_truth.json into dir.
void save_suite(const std::filesystem::path& dir, const Suite& suite);

}  // namespace mevattr
