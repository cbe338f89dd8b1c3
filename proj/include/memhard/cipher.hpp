#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>

namespace memhard {

inline constexpr std::size_t kCipherBlockBytes = 16;
inline constexpr std::uint8_t kCipherAes256 = 1;

// Abstract 16-byte block permutation; modes are layered on top of it. One
// instance per key; instances are not safe for concurrent use.
class BlockCipher {
 public:
  virtual ~BlockCipher() = default;
  virtual void encrypt_block(const std::uint8_t in[kCipherBlockBytes],
                             std::uint8_t out[kCipherBlockBytes]) const = 0;
  virtual void decrypt_block(const std::uint8_t in[kCipherBlockBytes],
                             std::uint8_t out[kCipherBlockBytes]) const = 0;
};

// Throws std::invalid_argument for an unknown cipher id.
std::unique_ptr<BlockCipher> make_cipher(std::uint8_t cipher_id,
                                         std::span<const std::uint8_t, 32> key);

}  // namespace memhard
