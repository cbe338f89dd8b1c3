#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace memhard {

// Incremental Blake2b (unkeyed, sequential mode) with a configurable number
// of compression rounds. The Merkle layer runs it with 4 rounds; everything
// else uses the full 12.
class Blake2b {
 public:
  static constexpr std::size_t kMaxDigest = 64;
  static constexpr unsigned kFullRounds = 12;

  explicit Blake2b(std::size_t digest_len, unsigned rounds = kFullRounds);

  void update(std::span<const std::uint8_t> data);

  // out.size() must equal the digest length passed at construction.
  void finish(std::span<std::uint8_t> out);

  static void hash(std::size_t digest_len, std::span<const std::uint8_t> in,
                   std::span<std::uint8_t> out, unsigned rounds = kFullRounds);

 private:
  void compress(const std::uint8_t* block, bool last);

  std::array<std::uint64_t, 8> h_;
  std::uint64_t t0_ = 0;
  std::uint64_t t1_ = 0;
  std::array<std::uint8_t, 128> buf_;
  std::size_t buf_len_ = 0;
  std::size_t digest_len_;
  unsigned rounds_;
};

std::array<std::uint8_t, 32> blake2b_256(std::span<const std::uint8_t> in);
std::array<std::uint8_t, 64> blake2b_512(std::span<const std::uint8_t> in);

}  // namespace memhard
