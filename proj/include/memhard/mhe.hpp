#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "memhard/argon2m.hpp"
#include "memhard/cipher.hpp"

namespace memhard::mhe {

enum class HeaderMode : std::uint8_t { per_chunk = 0, shared = 1 };

struct MheParams {
  std::uint64_t memory_blocks = 0;  // M
  std::uint32_t chunk_blocks = 0;   // q, chunk length in 1024-byte blocks
  std::uint32_t passes = 1;         // t
  std::uint8_t cipher_id = kCipherAes256;
  HeaderMode header_mode = HeaderMode::per_chunk;
  // Fallback hardening: run each X_{i-1} through the 1024-byte expansion
  // before the inner ECB layer, so those inputs stay distinct even if the
  // compression function's collision resistance fails. Off by default; the
  // container format does not carry this flag, both sides must agree.
  bool hash_body_inputs = false;

  std::uint64_t header_blocks() const { return memory_blocks - chunk_blocks; }

  // The header is its own filler instance: M - q must be a power of two >= 8.
  // Four lanes when the header is big enough for them, one otherwise.
  argon2m::MemParams header_mem_params() const;

  void validate() const;
};

// M - q password-derived blocks; x0 is the last block produced. In shared
// mode the same header serves every chunk and the associated data only enters
// the session key.
struct MheHeader {
  argon2m::MemoryArray memory;
  argon2m::ChallengeDigest h0;

  const argon2m::MBlock& x0() const { return memory.blocks.back(); }
};

using Key256 = std::array<std::uint8_t, 32>;

MheHeader init_header(std::span<const std::uint8_t> password,
                      std::span<const std::uint8_t> assoc,
                      const MheParams& params, int threads = 0);

// K_0 = H(x0) in per-chunk mode, H(x0 || S) in shared mode.
Key256 derive_k0(const MheHeader& header, std::span<const std::uint8_t> assoc,
                 const MheParams& params);

// Fresh random session key from the OS generator.
Key256 generate_session_key();

struct MheChunk {
  std::vector<std::uint8_t> assoc;              // S
  std::array<std::uint8_t, 16> iv{};            // first 16 bytes of H(x0||S||"iv")
  std::vector<std::uint8_t> body_ct;            // C_1..C_q, q * 1024 bytes
  std::array<std::uint8_t, 32> key_wrap{};      // E_k0(H(X_q) xor k1)
};

// plaintext.size() must be exactly q * 1024 (padding is the caller's job).
MheChunk encrypt_chunk(const MheHeader& header,
                       std::span<const std::uint8_t> assoc, const Key256& k1,
                       std::span<const std::uint8_t> plaintext,
                       const MheParams& params);

// Per-ciphertext-block read accounting plus the position of the moment k1
// became available, for the dependency audit.
struct DecryptTrace {
  std::vector<std::uint32_t> reads_before_key;
  std::vector<std::uint32_t> reads_after_key;
  std::uint64_t reads_at_key_unwrap = 0;  // total block reads when k1 appeared
  bool key_unwrapped = false;
};

// Two passes over the ciphertext: CBC + body replay to reach H(X_q) and k1,
// then a second CBC pass peeling the plaintext. Wrong keys produce garbage,
// never an error (the scheme is unauthenticated).
std::vector<std::uint8_t> decrypt_chunk(const MheHeader& header,
                                        const MheChunk& chunk,
                                        const MheParams& params,
                                        DecryptTrace* trace = nullptr);

struct DelegationReport {
  bool ciphertext_read_before_key = false;   // every block touched before k1
  bool two_passes = false;                   // each block read exactly twice
  bool header_independent_of_ciphertext = false;
  std::uint64_t chunk_blocks = 0;
  std::string render() const;
};

// Structural audit of the decryption data path on a self-generated chunk.
DelegationReport delegation_resistance_audit(const MheParams& params);

// Container wire format, all little-endian:
//   "MHE1" | version u8 | header_mode u8 | M u64 | q u32 | t u32 |
//   cipher id u8 | len(S) u32 | S | IV(16) | body_ct | key_wrap(32) |
//   optional tag(32)
inline constexpr std::array<std::uint8_t, 4> kContainerMagic = {'M', 'H', 'E', '1'};
inline constexpr std::uint8_t kContainerVersion = 1;

std::vector<std::uint8_t> serialize_chunk(const MheChunk& chunk,
                                          const MheParams& params,
                                          const std::array<std::uint8_t, 32>* tag);

struct ParsedChunk {
  MheParams params;
  MheChunk chunk;
  std::optional<std::array<std::uint8_t, 32>> tag;
  std::size_t consumed = 0;  // container bytes read, for concatenated files
};

std::optional<ParsedChunk> parse_chunk(std::span<const std::uint8_t> bytes);

}  // namespace memhard::mhe
