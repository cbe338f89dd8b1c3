#include "memhard/merkle.hpp"

#include <omp.h>

#include <bit>
#include <cstring>
#include <stdexcept>

namespace memhard::merkle {

namespace {

constexpr std::uint8_t kLeafPrefix = 0x00;
constexpr std::uint8_t kNodePrefix = 0x01;

}  // namespace

Digest16 g_hash(std::span<const std::uint8_t> data) {
  Digest16 d;
  Blake2b::hash(kDigestBytes, data, d.bytes, kTreeHashRounds);
  return d;
}

Digest16 leaf_hash(const argon2m::MBlock& block) {
  Blake2b state(kDigestBytes, kTreeHashRounds);
  state.update(std::span(&kLeafPrefix, 1));
  state.update(block.to_bytes());
  Digest16 d;
  state.finish(d.bytes);
  return d;
}

Digest16 node_hash(const Digest16& left, const Digest16& right) {
  Blake2b state(kDigestBytes, kTreeHashRounds);
  state.update(std::span(&kNodePrefix, 1));
  state.update(left.bytes);
  state.update(right.bytes);
  Digest16 d;
  state.finish(d.bytes);
  return d;
}

void OpeningPath::serialize_to(std::vector<std::uint8_t>& out) const {
  std::uint8_t idx[8];
  std::memcpy(idx, &index, 8);  // little-endian host
  out.insert(out.end(), idx, idx + 8);
  for (const Digest16& s : siblings)
    out.insert(out.end(), s.bytes.begin(), s.bytes.end());
}

MerkleTree build_tree(std::span<const argon2m::MBlock> blocks, int threads) {
  const std::uint64_t t = blocks.size();
  if (t == 0 || !std::has_single_bit(t))
    throw std::invalid_argument("build_tree: leaf count must be a power of two");

  MerkleTree tree;
  tree.leaves_ = t;
  tree.nodes_.resize(2 * t - 1);

  const int n = threads > 0 ? threads : omp_get_max_threads();
  const std::int64_t tn = static_cast<std::int64_t>(t);

#pragma omp parallel for num_threads(n) schedule(static)
  for (std::int64_t j = 0; j < tn; ++j)
    tree.nodes_[t - 1 + j] = leaf_hash(blocks[j]);

  for (std::uint64_t width = t / 2; width >= 1; width /= 2) {
    const std::int64_t lo = static_cast<std::int64_t>(width) - 1;
    const std::int64_t hi = 2 * static_cast<std::int64_t>(width) - 1;
#pragma omp parallel for num_threads(n) schedule(static)
    for (std::int64_t k = lo; k < hi; ++k)
      tree.nodes_[k] = node_hash(tree.nodes_[2 * k + 1], tree.nodes_[2 * k + 2]);
  }
  return tree;
}

MerkleTree build_tree_reference(std::span<const argon2m::MBlock> blocks) {
  const std::uint64_t t = blocks.size();
  if (t == 0 || !std::has_single_bit(t))
    throw std::invalid_argument("build_tree: leaf count must be a power of two");

  MerkleTree tree;
  tree.leaves_ = t;
  tree.nodes_.resize(2 * t - 1);
  for (std::uint64_t j = 0; j < t; ++j)
    tree.nodes_[t - 1 + j] = leaf_hash(blocks[j]);
  for (std::uint64_t k = t - 1; k-- > 0;)
    tree.nodes_[k] = node_hash(tree.nodes_[2 * k + 1], tree.nodes_[2 * k + 2]);
  return tree;
}

OpeningPath MerkleTree::open(std::uint64_t index) const {
  if (index >= leaves_)
    throw std::invalid_argument("open: leaf index out of range");
  OpeningPath path;
  path.index = index;
  std::uint64_t pos = leaves_ - 1 + index;
  while (pos > 0) {
    const std::uint64_t sibling = (pos % 2 == 1) ? pos + 1 : pos - 1;
    path.siblings.push_back(nodes_[sibling]);
    pos = (pos - 1) / 2;
  }
  return path;
}

bool verify_opening(const Digest16& root, std::uint64_t index,
                    const argon2m::MBlock& block, const OpeningPath& path) {
  if (path.index != index) return false;
  if (path.siblings.size() >= 64) return false;
  if (path.siblings.size() < 64 && (index >> path.siblings.size()) != 0)
    return false;

  Digest16 h = leaf_hash(block);
  std::uint64_t idx = index;
  for (const Digest16& sib : path.siblings) {
    h = (idx % 2 == 0) ? node_hash(h, sib) : node_hash(sib, h);
    idx /= 2;
  }
  return h == root;
}

}  // namespace memhard::merkle
