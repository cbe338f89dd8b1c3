#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "memhard/argon2m.hpp"

namespace memhard::merkle {

inline constexpr std::size_t kDigestBytes = 16;
inline constexpr unsigned kTreeHashRounds = 4;

struct Digest16 {
  std::array<std::uint8_t, kDigestBytes> bytes{};
  friend bool operator==(const Digest16&, const Digest16&) = default;
};

// G: Blake2b truncated to 4 of the standard 12 rounds, 128-bit output.
Digest16 g_hash(std::span<const std::uint8_t> data);

// Domain-separated node hashes: 0x00 prefix for leaves, 0x01 for internals.
Digest16 leaf_hash(const argon2m::MBlock& block);
Digest16 node_hash(const Digest16& left, const Digest16& right);

struct OpeningPath {
  std::uint64_t index = 0;              // leaf position the path belongs to
  std::vector<Digest16> siblings;       // leaf-to-root order, log2(T) entries

  // Wire form: index as 8-byte little-endian, then siblings concatenated.
  void serialize_to(std::vector<std::uint8_t>& out) const;
};

// Full binary tree over the memory blocks in heap layout (2T-1 digests,
// node k has children 2k+1 and 2k+2). Immutable once built; openings are
// read-only and safe to take concurrently.
class MerkleTree {
 public:
  const Digest16& root() const { return nodes_[0]; }
  std::uint64_t leaf_count() const { return leaves_; }

  OpeningPath open(std::uint64_t index) const;

  friend MerkleTree build_tree(std::span<const argon2m::MBlock> blocks,
                               int threads);
  friend MerkleTree build_tree_reference(
      std::span<const argon2m::MBlock> blocks);

 private:
  std::uint64_t leaves_ = 0;
  std::vector<Digest16> nodes_;
};

// Leaf count must be a power of two. threads <= 0 selects the OpenMP default;
// level order makes the result thread-count invariant.
MerkleTree build_tree(std::span<const argon2m::MBlock> blocks, int threads = 0);
MerkleTree build_tree_reference(std::span<const argon2m::MBlock> blocks);

// Recomputes the leaf hash and folds the siblings, using the index bits to
// pick the side at each level. True iff the reconstruction hits `root` and
// the path's claimed index equals `index`.
bool verify_opening(const Digest16& root, std::uint64_t index,
                    const argon2m::MBlock& block, const OpeningPath& path);

}  // namespace memhard::merkle
