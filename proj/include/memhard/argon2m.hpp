#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "memhard/blake2b.hpp"

namespace memhard::argon2m {

inline constexpr std::size_t kBlockBytes = 1024;
inline constexpr std::size_t kBlockWords = kBlockBytes / 8;
inline constexpr std::uint32_t kSyncSlices = 4;
inline constexpr std::size_t kMaxChallengeBytes = std::size_t{1} << 20;

// 1024-byte memory block held as 128 little-endian 64-bit words. The
// compression function views it as an 8x8 matrix of 16-byte registers,
// register k being words 2k and 2k+1.
struct MBlock {
  std::array<std::uint64_t, kBlockWords> words{};

  void xor_with(const MBlock& other) {
    for (std::size_t i = 0; i < kBlockWords; ++i) words[i] ^= other.words[i];
  }

  std::array<std::uint8_t, kBlockBytes> to_bytes() const;
  static MBlock from_bytes(std::span<const std::uint8_t> bytes);

  friend bool operator==(const MBlock&, const MBlock&) = default;
};

struct MemParams {
  std::uint64_t blocks = 0;  // T: total block count, a power of two
  std::uint32_t lanes = 1;   // p
  std::uint32_t passes = 1;  // t

  std::uint64_t lane_length() const { return blocks / lanes; }
  std::uint64_t segment_length() const { return lane_length() / kSyncSlices; }

  // Throws std::invalid_argument unless T is a power of two, p divides T,
  // T/p >= 8, 4 | T/p and t >= 1.
  void validate() const;
};

struct ChallengeDigest {
  std::array<std::uint8_t, 32> bytes{};
  friend bool operator==(const ChallengeDigest&, const ChallengeDigest&) = default;
};

struct LaneColumn {
  std::uint32_t lane;
  std::uint64_t column;
  friend bool operator==(const LaneColumn&, const LaneColumn&) = default;
};

// H_0 for the proof-of-work setting: password and salt slots pinned to
// all-zero 16-byte strings, the challenge riding in the auxiliary-data slot.
ChallengeDigest initial_digest(std::span<const std::uint8_t> challenge);

// General form used by the encryption scheme: length-framed password and salt.
ChallengeDigest initial_digest_ps(std::span<const std::uint8_t> password,
                                  std::span<const std::uint8_t> salt);

// One/two-dimensional index mapping. psi is total on indices < T.
LaneColumn psi(std::uint64_t index, const MemParams& params);
std::uint64_t psi_inv(std::uint32_t lane, std::uint64_t column,
                      const MemParams& params);

// Blake2b round with the multiplicative 64-bit word mixing, applied in place
// to 128 bytes (16 words).
void permute_p(std::span<std::uint64_t, 16> v);

// F_{H0,i}: requires column(index) >= 2; those columns are the only ones the
// recurrence produces.
MBlock compress(const MBlock& prev, const MBlock& ref, std::uint64_t index,
                const ChallengeDigest& h0, const MemParams& params);

// Blocks at columns 0 and 1 of a lane, derived from H_0 by the 1024-byte
// expansion below.
std::pair<MBlock, MBlock> expand_first_blocks(const ChallengeDigest& h0,
                                              std::uint32_t lane);

// Data-dependent reference index. J1 = first word of prev, J2 = second word;
// candidate lane J2 mod p (forced to the own lane in slice 0 of the first
// pass); J1 picks uniformly inside the window of finished blocks visible
// under slice synchronization.
std::uint64_t phi_index(const MBlock& prev, std::uint64_t index,
                        const MemParams& params, std::uint32_t pass = 0);

struct MemoryArray {
  MemParams params;
  std::vector<MBlock> blocks;

  std::span<const MBlock> view() const { return blocks; }
};

struct FillResult {
  MemoryArray memory;
  ChallengeDigest h0;
};

// Fills the T-block array. threads <= 0 selects the OpenMP default; the
// result is a pure function of (challenge, params) regardless of the worker
// count. Slice boundaries are synchronization barriers.
FillResult fill_memory(std::span<const std::uint8_t> challenge,
                       const MemParams& params, int threads = 0);

MemoryArray fill_from_digest(const ChallengeDigest& h0, const MemParams& params,
                             int threads = 0);

// Straight-line serial implementation kept as the reference the OpenMP fill
// is checked and benchmarked against.
MemoryArray fill_from_digest_reference(const ChallengeDigest& h0,
                                       const MemParams& params);

// Variable-length expansion: V_0 = Blake2b-512(le32(1024) || seed),
// V_k = Blake2b-512(V_{k-1}); output is the 32-byte prefixes of V_0..V_29
// followed by all 64 bytes of V_30.
void hprime_1024(std::span<const std::uint8_t> seed, MBlock& out);

namespace detail {

// Compression without the column check. `index` may exceed T: the encryption
// body extends the index space past the filled array, and the injected
// (lane, column) pair keeps following the psi formula.
MBlock compress_raw(const MBlock& prev, const MBlock& ref, std::uint64_t index,
                    const ChallengeDigest& h0, const MemParams& params);

}  // namespace detail

}  // namespace memhard::argon2m
