#include "memhard/argon2m.hpp"

#include <omp.h>

#include <bit>
#include <cstring>
#include <stdexcept>

namespace memhard::argon2m {

namespace {

inline void store32(std::uint8_t* p, std::uint32_t v) { std::memcpy(p, &v, 4); }

inline std::uint64_t mul_lo32(std::uint64_t x, std::uint64_t y) {
  return 2 * (x & 0xffffffffULL) * (y & 0xffffffffULL);
}

inline std::uint64_t rotr64(std::uint64_t x, unsigned n) {
  return (x >> n) | (x << (64 - n));
}

// Enhanced quarter-round: a <- a + b + 2*lo32(a)*lo32(b) etc.
inline void gb(std::uint64_t& a, std::uint64_t& b, std::uint64_t& c,
               std::uint64_t& d) {
  a = a + b + mul_lo32(a, b);
  d = rotr64(d ^ a, 32);
  c = c + d + mul_lo32(c, d);
  b = rotr64(b ^ c, 24);
  a = a + b + mul_lo32(a, b);
  d = rotr64(d ^ a, 16);
  c = c + d + mul_lo32(c, d);
  b = rotr64(b ^ c, 63);
}

int resolve_threads(int threads) {
  return threads > 0 ? threads : omp_get_max_threads();
}

}  // namespace

std::array<std::uint8_t, kBlockBytes> MBlock::to_bytes() const {
  std::array<std::uint8_t, kBlockBytes> out;
  std::memcpy(out.data(), words.data(), kBlockBytes);  // little-endian host
  return out;
}

MBlock MBlock::from_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kBlockBytes)
    throw std::invalid_argument("MBlock: need exactly 1024 bytes");
  MBlock b;
  std::memcpy(b.words.data(), bytes.data(), kBlockBytes);
  return b;
}

void MemParams::validate() const {
  if (blocks == 0 || !std::has_single_bit(blocks))
    throw std::invalid_argument("MemParams: T must be a power of two");
  if (blocks > (std::uint64_t{1} << 32))
    throw std::invalid_argument("MemParams: T too large");
  if (lanes == 0 || blocks % lanes != 0)
    throw std::invalid_argument("MemParams: p must divide T");
  if (lane_length() < 8)
    throw std::invalid_argument("MemParams: T/p must be at least 8");
  if (lane_length() % kSyncSlices != 0)
    throw std::invalid_argument("MemParams: 4 must divide T/p");
  if (passes == 0) throw std::invalid_argument("MemParams: t must be >= 1");
}

ChallengeDigest initial_digest(std::span<const std::uint8_t> challenge) {
  if (challenge.empty() || challenge.size() > kMaxChallengeBytes)
    throw std::invalid_argument("initial_digest: challenge length out of range");
  static constexpr std::uint8_t kZero16[16] = {};
  Blake2b state(32);
  state.update(kZero16);  // P
  state.update(kZero16);  // S
  state.update(challenge);
  ChallengeDigest d;
  state.finish(d.bytes);
  return d;
}

ChallengeDigest initial_digest_ps(std::span<const std::uint8_t> password,
                                  std::span<const std::uint8_t> salt) {
  std::uint8_t len[4];
  Blake2b state(32);
  store32(len, static_cast<std::uint32_t>(password.size()));
  state.update(len);
  state.update(password);
  store32(len, static_cast<std::uint32_t>(salt.size()));
  state.update(len);
  state.update(salt);
  ChallengeDigest d;
  state.finish(d.bytes);
  return d;
}

LaneColumn psi(std::uint64_t index, const MemParams& params) {
  if (index >= params.blocks)
    throw std::invalid_argument("psi: index out of range");
  const std::uint64_t ll = params.lane_length();
  return {static_cast<std::uint32_t>(index / ll), index % ll};
}

std::uint64_t psi_inv(std::uint32_t lane, std::uint64_t column,
                      const MemParams& params) {
  if (lane >= params.lanes || column >= params.lane_length())
    throw std::invalid_argument("psi_inv: coordinates out of range");
  return static_cast<std::uint64_t>(lane) * params.lane_length() + column;
}

void permute_p(std::span<std::uint64_t, 16> v) {
  gb(v[0], v[4], v[8], v[12]);
  gb(v[1], v[5], v[9], v[13]);
  gb(v[2], v[6], v[10], v[14]);
  gb(v[3], v[7], v[11], v[15]);
  gb(v[0], v[5], v[10], v[15]);
  gb(v[1], v[6], v[11], v[12]);
  gb(v[2], v[7], v[8], v[13]);
  gb(v[3], v[4], v[9], v[14]);
}

namespace detail {

MBlock compress_raw(const MBlock& prev, const MBlock& ref, std::uint64_t index,
                    const ChallengeDigest& h0, const MemParams& params) {
  MBlock r = prev;
  r.xor_with(ref);

  // R_7 <- psi(i) as two little-endian words, R_8,9 <- H_0. The psi formula
  // extends past T for encryption-body indices.
  const std::uint64_t ll = params.lane_length();
  r.words[14] = index / ll;
  r.words[15] = index % ll;
  std::memcpy(&r.words[16], h0.bytes.data(), 32);

  MBlock rp = r;  // R'

  // P applied rowwise (register rows are contiguous word runs)...
  for (int row = 0; row < 8; ++row)
    permute_p(std::span<std::uint64_t, 16>(&r.words[16 * row], 16));

  // ...then columnwise (registers c, c+8, ..., c+56).
  for (int col = 0; col < 8; ++col) {
    std::uint64_t v[16];
    for (int k = 0; k < 8; ++k) {
      v[2 * k] = r.words[2 * (col + 8 * k)];
      v[2 * k + 1] = r.words[2 * (col + 8 * k) + 1];
    }
    permute_p(std::span<std::uint64_t, 16>(v, 16));
    for (int k = 0; k < 8; ++k) {
      r.words[2 * (col + 8 * k)] = v[2 * k];
      r.words[2 * (col + 8 * k) + 1] = v[2 * k + 1];
    }
  }

  r.xor_with(rp);  // Z xor R'
  return r;
}

}  // namespace detail

MBlock compress(const MBlock& prev, const MBlock& ref, std::uint64_t index,
                const ChallengeDigest& h0, const MemParams& params) {
  if (psi(index, params).column < 2)
    throw std::invalid_argument(
        "compress: columns 0 and 1 come from the expansion, not the recurrence");
  return detail::compress_raw(prev, ref, index, h0, params);
}

void hprime_1024(std::span<const std::uint8_t> seed, MBlock& out) {
  std::uint8_t bytes[kBlockBytes];
  std::uint8_t len[4];
  store32(len, static_cast<std::uint32_t>(kBlockBytes));

  Blake2b first(64);
  first.update(len);
  first.update(seed);
  std::array<std::uint8_t, 64> v;
  first.finish(v);

  for (int k = 0; k < 30; ++k) {
    std::memcpy(bytes + 32 * k, v.data(), 32);
    if (k < 29) v = blake2b_512(v);
  }
  v = blake2b_512(v);
  std::memcpy(bytes + 960, v.data(), 64);

  out = MBlock::from_bytes(bytes);
}

std::pair<MBlock, MBlock> expand_first_blocks(const ChallengeDigest& h0,
                                              std::uint32_t lane) {
  std::uint8_t seed[40];
  std::memcpy(seed, h0.bytes.data(), 32);
  store32(seed + 36, lane);
  MBlock b0, b1;
  store32(seed + 32, 0);
  hprime_1024(seed, b0);
  store32(seed + 32, 1);
  hprime_1024(seed, b1);
  return {b0, b1};
}

namespace {

// Reference window under slice synchronization. Returns the global index.
//
// First pass: the candidate lane's finished blocks, i.e. own-lane columns
// [0, c-1) or, cross-lane, the columns of slices before the current one.
// Later passes: every column except c and c-1 (own lane) or every column
// outside the current slice (cross-lane); columns ahead of the write position
// still hold their previous-pass values.
std::uint64_t phi_pick(std::uint64_t j1, std::uint32_t ref_lane,
                       std::uint32_t lane, std::uint64_t column,
                       std::uint32_t slice, std::uint32_t pass,
                       const MemParams& params) {
  const std::uint64_t ll = params.lane_length();
  const std::uint64_t seg = params.segment_length();
  std::uint64_t size, col;
  if (pass == 0) {
    size = (ref_lane == lane) ? column - 1 : slice * seg;
    col = j1 % size;
  } else if (ref_lane == lane) {
    size = ll - 2;
    col = j1 % size;
    if (col >= column - 1) col += 2;
  } else {
    size = ll - seg;
    col = j1 % size;
    if (col >= slice * seg) col += seg;
  }
  return psi_inv(ref_lane, col, params);
}

std::uint64_t phi_for(const MBlock& prev, std::uint32_t lane,
                      std::uint64_t column, std::uint32_t pass,
                      const MemParams& params) {
  const std::uint32_t slice =
      static_cast<std::uint32_t>(column / params.segment_length());
  const std::uint64_t j1 = prev.words[0];
  const std::uint64_t j2 = prev.words[1];
  std::uint32_t ref_lane = static_cast<std::uint32_t>(j2 % params.lanes);
  if (pass == 0 && slice == 0) ref_lane = lane;  // first segment stays in lane
  return phi_pick(j1, ref_lane, lane, column, slice, pass, params);
}

}  // namespace

std::uint64_t phi_index(const MBlock& prev, std::uint64_t index,
                        const MemParams& params, std::uint32_t pass) {
  const LaneColumn lc = psi(index, params);
  if (lc.column < 2)
    throw std::invalid_argument("phi_index: column must be >= 2");
  return phi_for(prev, lc.lane, lc.column, pass, params);
}

namespace {

void fill_segment(MemoryArray& mem, const ChallengeDigest& h0,
                  std::uint32_t pass, std::uint32_t slice, std::uint32_t lane) {
  const MemParams& params = mem.params;
  const std::uint64_t seg = params.segment_length();
  const std::uint64_t base = static_cast<std::uint64_t>(lane) * params.lane_length();
  std::uint64_t col = slice * seg;
  if (col < 2) col = 2;  // columns 0-1 stay expansion output on every pass
  const std::uint64_t end = (slice + 1) * seg;
  for (; col < end; ++col) {
    const std::uint64_t i = base + col;
    const MBlock& prev = mem.blocks[i - 1];
    const std::uint64_t ref = phi_for(prev, lane, col, pass, params);
    mem.blocks[i] = detail::compress_raw(prev, mem.blocks[ref], i, h0, params);
  }
}

}  // namespace

MemoryArray fill_from_digest(const ChallengeDigest& h0, const MemParams& params,
                             int threads) {
  params.validate();
  MemoryArray mem;
  mem.params = params;
  mem.blocks.resize(params.blocks);

  const int n = resolve_threads(threads);
  const int lanes = static_cast<int>(params.lanes);

#pragma omp parallel for num_threads(n) schedule(static)
  for (int lane = 0; lane < lanes; ++lane) {
    auto [b0, b1] = expand_first_blocks(h0, static_cast<std::uint32_t>(lane));
    const std::uint64_t base = static_cast<std::uint64_t>(lane) * params.lane_length();
    mem.blocks[base] = b0;
    mem.blocks[base + 1] = b1;
  }

  for (std::uint32_t pass = 0; pass < params.passes; ++pass) {
    for (std::uint32_t slice = 0; slice < kSyncSlices; ++slice) {
#pragma omp parallel for num_threads(n) schedule(static)
      for (int lane = 0; lane < lanes; ++lane)
        fill_segment(mem, h0, pass, slice, static_cast<std::uint32_t>(lane));
    }
  }
  return mem;
}

MemoryArray fill_from_digest_reference(const ChallengeDigest& h0,
                                       const MemParams& params) {
  params.validate();
  MemoryArray mem;
  mem.params = params;
  mem.blocks.resize(params.blocks);

  for (std::uint32_t lane = 0; lane < params.lanes; ++lane) {
    auto [b0, b1] = expand_first_blocks(h0, lane);
    mem.blocks[psi_inv(lane, 0, params)] = b0;
    mem.blocks[psi_inv(lane, 1, params)] = b1;
  }
  const std::uint64_t seg = params.segment_length();
  for (std::uint32_t pass = 0; pass < params.passes; ++pass)
    for (std::uint32_t slice = 0; slice < kSyncSlices; ++slice)
      for (std::uint32_t lane = 0; lane < params.lanes; ++lane)
        for (std::uint64_t col = std::max<std::uint64_t>(slice * seg, 2);
             col < (slice + 1) * seg; ++col) {
          const std::uint64_t i = psi_inv(lane, col, params);
          const MBlock& prev = mem.blocks[i - 1];
          const std::uint64_t ref = phi_index(prev, i, params, pass);
          mem.blocks[i] =
              detail::compress_raw(prev, mem.blocks[ref], i, h0, params);
        }
  return mem;
}

FillResult fill_memory(std::span<const std::uint8_t> challenge,
                       const MemParams& params, int threads) {
  ChallengeDigest h0 = initial_digest(challenge);
  return {fill_from_digest(h0, params, threads), h0};
}

}  // namespace memhard::argon2m
