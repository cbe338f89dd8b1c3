#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "memhard/argon2m.hpp"
#include "memhard/merkle.hpp"
#include "memhard/mtp.hpp"

namespace testutil {

inline std::string hex(std::span<const std::uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

inline std::vector<std::uint8_t> bytes_of(const std::string& s) {
  return {s.begin(), s.end()};
}

inline memhard::argon2m::MBlock random_block(std::mt19937_64& rng) {
  memhard::argon2m::MBlock b;
  for (auto& w : b.words) w = rng();
  return b;
}

// Independent serial replay of the fill schedule through the public
// operations, with chosen block indices replaced by pseudorandom garbage.
// With an empty corrupt set this is the recurrence oracle for t = 1 fills.
inline memhard::argon2m::MemoryArray replay_fill(
    const memhard::argon2m::ChallengeDigest& h0,
    const memhard::argon2m::MemParams& params,
    const std::set<std::uint64_t>& corrupt = {}, std::uint64_t garble_seed = 0) {
  using namespace memhard::argon2m;
  MemoryArray mem;
  mem.params = params;
  mem.blocks.resize(params.blocks);
  for (std::uint32_t lane = 0; lane < params.lanes; ++lane) {
    auto [b0, b1] = expand_first_blocks(h0, lane);
    mem.blocks[psi_inv(lane, 0, params)] = b0;
    mem.blocks[psi_inv(lane, 1, params)] = b1;
  }
  std::mt19937_64 grng(garble_seed);
  const std::uint64_t seg = params.segment_length();
  for (std::uint32_t slice = 0; slice < kSyncSlices; ++slice)
    for (std::uint32_t lane = 0; lane < params.lanes; ++lane)
      for (std::uint64_t col = std::max<std::uint64_t>(slice * seg, 2);
           col < (slice + 1) * seg; ++col) {
        const std::uint64_t i = psi_inv(lane, col, params);
        if (corrupt.count(i)) {
          mem.blocks[i] = random_block(grng);
        } else {
          const MBlock& prev = mem.blocks[i - 1];
          const std::uint64_t ref = phi_index(prev, i, params);
          mem.blocks[i] = compress(prev, mem.blocks[ref], i, h0, params);
        }
      }
  return mem;
}

// Prover state over a cheating fill: `corrupt` blocks are garbage produced
// during the fill, downstream blocks use them normally, the tree commits the
// result. Openings of corrupted positions verify; only the recomputation of
// an opened corrupted block exposes the cheat.
inline memhard::mtp::ProverState cheating_state(
    std::span<const std::uint8_t> challenge,
    const memhard::mtp::PowParams& params,
    const std::set<std::uint64_t>& corrupt, std::uint64_t garble_seed) {
  memhard::mtp::ProverState state;
  state.challenge.assign(challenge.begin(), challenge.end());
  state.h0 = memhard::argon2m::initial_digest(challenge);
  state.memory = replay_fill(state.h0, params.mem, corrupt, garble_seed);
  state.tree = memhard::merkle::build_tree(state.memory.view(), 0);
  return state;
}

}  // namespace testutil
