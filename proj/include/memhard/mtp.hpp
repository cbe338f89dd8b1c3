#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "memhard/argon2m.hpp"
#include "memhard/merkle.hpp"

namespace memhard::mtp {

inline constexpr std::array<std::uint8_t, 4> kProofMagic = {'M', 'T', 'P', '2'};
inline constexpr std::uint8_t kProofVersion = 1;

struct PowParams {
  argon2m::MemParams mem;
  std::uint8_t search_length = 70;  // L
  std::uint8_t difficulty = 0;      // d, trailing zero bits of Y_L

  // Single pass only: the verifier recomputes phi from the final array, which
  // the recurrence pins down only for t = 1.
  void validate() const;
};

using ChainValue = std::array<std::uint8_t, 32>;  // Y_j

// i_j <- Y_{j-1} mod eligible, remapped so the selected block always has
// column >= 2 (both parents exist).
std::uint64_t select_index(const ChainValue& y_prev, const PowParams& params);

// True iff the low d bits of y as a little-endian integer are zero.
bool difficulty_check(const ChainValue& y, unsigned difficulty);

struct ProofEntry {
  std::uint64_t index = 0;      // i_j
  std::uint64_t ref_index = 0;  // phi(i_j); echo, the recomputed value rules
  argon2m::MBlock prev_block;   // X[i_j - 1]
  argon2m::MBlock ref_block;    // X[phi(i_j)]
  merkle::OpeningPath prev_path;
  merkle::OpeningPath ref_path;
  merkle::OpeningPath cur_path;  // opening of X[i_j]; the block itself is absent
};

struct Proof {
  std::vector<std::uint8_t> challenge;
  merkle::Digest16 root;  // Phi
  std::uint64_t nonce = 0;
  std::vector<ProofEntry> entries;
};

// Filled array plus its commitment; immutable while nonce workers scan.
struct ProverState {
  std::vector<std::uint8_t> challenge;
  argon2m::ChallengeDigest h0;
  argon2m::MemoryArray memory;
  merkle::MerkleTree tree;
};

ProverState build_prover_state(std::span<const std::uint8_t> challenge,
                               const PowParams& params, int threads = 0);

struct SearchResult {
  std::optional<std::uint64_t> nonce;  // smallest success in the range
  std::uint64_t nonces_scanned = 0;    // start..found (or the whole range)
};

// Scans [nonce_start, nonce_start + nonce_count). Workers claim disjoint
// chunks; the reported nonce is the smallest success regardless of the
// thread count.
SearchResult search_nonce(const ProverState& state, const PowParams& params,
                          std::uint64_t nonce_start, std::uint64_t nonce_count,
                          int threads = 0);

Proof assemble_proof(const ProverState& state, const PowParams& params,
                     std::uint64_t nonce);

struct ProveStats {
  std::uint64_t nonces_scanned = 0;
  double fill_seconds = 0;  // fill plus tree commitment
  double search_seconds = 0;
};

// Fill once, commit once, then scan nonces. Empty optional = range exhausted;
// the caller may continue from the next range (the search is progress-free).
std::optional<Proof> prove(std::span<const std::uint8_t> challenge,
                           const PowParams& params,
                           std::uint64_t nonce_start = 0,
                           std::uint64_t nonce_count = UINT64_MAX,
                           int threads = 0, ProveStats* stats = nullptr);

enum class Reject {
  none,
  bad_entry_count,
  position_mismatch,
  opening_invalid,
  phi_mismatch,
  difficulty_failed,
  malformed_encoding,
};

const char* to_string(Reject reason);

struct VerifyResult {
  bool ok = false;
  Reject reason = Reject::none;
  int entry = -1;  // first failing entry, -1 when not entry-specific

  explicit operator bool() const { return ok; }
};

// Memoryless verification: O(L log T) working state, no memory array.
VerifyResult verify(const Proof& proof, const PowParams& params);

// Wire format, all little-endian:
//   "MTP2" | version u8 | T u64 | p u32 | L u8 | d u8 |
//   len(I) u32 | I | Phi(16) | N(8) | L entries, each
//   i u64 | phi u64 | prev block(1024) | ref block(1024) |
//   prev path | ref path | cur path   (path = index u64 | log2(T) digests)
std::vector<std::uint8_t> serialize(const Proof& proof, const PowParams& params);

// Empty optional on any truncation, bad magic/version or params mismatch.
std::optional<Proof> deserialize(std::span<const std::uint8_t> bytes,
                                 const PowParams& params);

// Params as recorded in a serialized proof header, for CLI use.
std::optional<PowParams> peek_params(std::span<const std::uint8_t> bytes);

std::size_t serialized_size(const PowParams& params, std::size_t challenge_len);

}  // namespace memhard::mtp
