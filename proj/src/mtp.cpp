#include "memhard/mtp.hpp"

#include <omp.h>

#include <atomic>
#include <bit>
#include <chrono>
#include <cstring>
#include <stdexcept>

namespace memhard::mtp {

namespace {

using argon2m::MBlock;

std::uint32_t log2_u64(std::uint64_t v) { return 63 - std::countl_zero(v); }

ChainValue chain_start(std::span<const std::uint8_t> challenge,
                       const merkle::Digest16& root, std::uint64_t nonce) {
  Blake2b state(32);
  state.update(challenge);
  state.update(root.bytes);
  std::uint8_t n[8];
  std::memcpy(n, &nonce, 8);
  state.update(n);
  ChainValue y;
  state.finish(y);
  return y;
}

ChainValue chain_step(const ChainValue& y, const MBlock& block) {
  Blake2b state(32);
  state.update(y);
  state.update(block.to_bytes());
  ChainValue out;
  state.finish(out);
  return out;
}

// y mod m for the 32-byte little-endian integer y.
std::uint64_t mod_le256(const ChainValue& y, std::uint64_t m) {
  unsigned __int128 acc = 0;
  for (int k = 31; k >= 0; --k)
    acc = ((acc << 8) | y[static_cast<std::size_t>(k)]) % m;
  return static_cast<std::uint64_t>(acc);
}

// Runs the Y-chain for one nonce; true iff the difficulty test passes.
bool chain_passes(const ProverState& state, const PowParams& params,
                  std::uint64_t nonce) {
  ChainValue y = chain_start(state.challenge, state.tree.root(), nonce);
  for (unsigned j = 0; j < params.search_length; ++j) {
    const std::uint64_t i = select_index(y, params);
    y = chain_step(y, state.memory.blocks[i]);
  }
  return difficulty_check(y, params.difficulty);
}

struct Reader {
  std::span<const std::uint8_t> data;
  std::size_t pos = 0;

  bool take(void* out, std::size_t n) {
    if (data.size() - pos < n) return false;
    std::memcpy(out, data.data() + pos, n);
    pos += n;
    return true;
  }
  template <typename T>
  bool take_int(T& out) {
    return take(&out, sizeof(T));
  }
};

template <typename T>
void put_int(std::vector<std::uint8_t>& out, T v) {
  std::uint8_t b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

}  // namespace

void PowParams::validate() const {
  mem.validate();
  if (mem.passes != 1)
    throw std::invalid_argument("PowParams: proof-of-work uses a single pass");
  if (search_length == 0)
    throw std::invalid_argument("PowParams: L must be in [1,255]");
  if (difficulty > 64)
    throw std::invalid_argument("PowParams: d must be at most 64");
}

std::uint64_t select_index(const ChainValue& y_prev, const PowParams& params) {
  const std::uint64_t ll = params.mem.lane_length();
  const std::uint64_t eligible = params.mem.blocks - 2 * params.mem.lanes;
  const std::uint64_t r = mod_le256(y_prev, eligible);
  const std::uint64_t lane = r / (ll - 2);
  const std::uint64_t column = 2 + r % (ll - 2);
  return lane * ll + column;
}

bool difficulty_check(const ChainValue& y, unsigned difficulty) {
  if (difficulty == 0) return true;
  std::uint64_t low;
  std::memcpy(&low, y.data(), 8);
  const std::uint64_t mask =
      difficulty >= 64 ? ~0ULL : (std::uint64_t{1} << difficulty) - 1;
  return (low & mask) == 0;
}

ProverState build_prover_state(std::span<const std::uint8_t> challenge,
                               const PowParams& params, int threads) {
  params.validate();
  ProverState state;
  state.challenge.assign(challenge.begin(), challenge.end());
  auto filled = argon2m::fill_memory(challenge, params.mem, threads);
  state.h0 = filled.h0;
  state.memory = std::move(filled.memory);
  state.tree = merkle::build_tree(state.memory.view(), threads);
  return state;
}

SearchResult search_nonce(const ProverState& state, const PowParams& params,
                          std::uint64_t nonce_start, std::uint64_t nonce_count,
                          int threads) {
  constexpr std::uint64_t kChunk = 16;
  const int n = threads > 0 ? threads : omp_get_max_threads();
  const std::uint64_t window =
      kChunk * static_cast<std::uint64_t>(n) * 8;

  std::atomic<std::uint64_t> best{UINT64_MAX};
  const std::uint64_t end =
      nonce_count > UINT64_MAX - nonce_start ? UINT64_MAX
                                             : nonce_start + nonce_count;

  // Windows are scanned fully before moving on, so the reported nonce is the
  // smallest success in the range no matter how chunks land on threads.
  for (std::uint64_t wstart = nonce_start;
       wstart < end && wstart <= best.load(std::memory_order_relaxed);
       wstart += window) {
    const std::uint64_t wend = std::min(end, wstart + std::min(window, end - wstart));
    const std::int64_t chunks =
        static_cast<std::int64_t>((wend - wstart + kChunk - 1) / kChunk);

#pragma omp parallel for num_threads(n) schedule(dynamic, 1)
    for (std::int64_t c = 0; c < chunks; ++c) {
      const std::uint64_t first = wstart + static_cast<std::uint64_t>(c) * kChunk;
      if (first >= best.load(std::memory_order_relaxed)) continue;
      const std::uint64_t last = std::min(first + kChunk, wend);
      for (std::uint64_t nonce = first; nonce < last; ++nonce) {
        if (chain_passes(state, params, nonce)) {
          std::uint64_t seen = best.load(std::memory_order_relaxed);
          while (nonce < seen && !best.compare_exchange_weak(
                                     seen, nonce, std::memory_order_relaxed)) {
          }
          break;
        }
      }
    }
  }

  SearchResult result;
  if (best.load() != UINT64_MAX) {
    result.nonce = best.load();
    result.nonces_scanned = best.load() - nonce_start + 1;
  } else {
    result.nonces_scanned = nonce_count;
  }
  return result;
}

Proof assemble_proof(const ProverState& state, const PowParams& params,
                     std::uint64_t nonce) {
  Proof proof;
  proof.challenge = state.challenge;
  proof.root = state.tree.root();
  proof.nonce = nonce;
  proof.entries.reserve(params.search_length);

  ChainValue y = chain_start(state.challenge, proof.root, nonce);
  for (unsigned j = 0; j < params.search_length; ++j) {
    const std::uint64_t i = select_index(y, params);
    const MBlock& prev = state.memory.blocks[i - 1];
    const std::uint64_t ref = argon2m::phi_index(prev, i, params.mem);

    ProofEntry entry;
    entry.index = i;
    entry.ref_index = ref;
    entry.prev_block = prev;
    entry.ref_block = state.memory.blocks[ref];
    entry.prev_path = state.tree.open(i - 1);
    entry.ref_path = state.tree.open(ref);
    entry.cur_path = state.tree.open(i);
    proof.entries.push_back(std::move(entry));

    y = chain_step(y, state.memory.blocks[i]);
  }
  return proof;
}

std::optional<Proof> prove(std::span<const std::uint8_t> challenge,
                           const PowParams& params, std::uint64_t nonce_start,
                           std::uint64_t nonce_count, int threads,
                           ProveStats* stats) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  ProverState state = build_prover_state(challenge, params, threads);
  const auto t1 = clock::now();
  SearchResult found = search_nonce(state, params, nonce_start, nonce_count, threads);
  const auto t2 = clock::now();

  if (stats) {
    stats->nonces_scanned = found.nonces_scanned;
    stats->fill_seconds = std::chrono::duration<double>(t1 - t0).count();
    stats->search_seconds = std::chrono::duration<double>(t2 - t1).count();
  }
  if (!found.nonce) return std::nullopt;
  return assemble_proof(state, params, *found.nonce);
}

const char* to_string(Reject reason) {
  switch (reason) {
    case Reject::none: return "none";
    case Reject::bad_entry_count: return "bad-entry-count";
    case Reject::position_mismatch: return "position-mismatch";
    case Reject::opening_invalid: return "opening-invalid";
    case Reject::phi_mismatch: return "phi-mismatch";
    case Reject::difficulty_failed: return "difficulty-failed";
    case Reject::malformed_encoding: return "malformed-encoding";
  }
  return "unknown";
}

VerifyResult verify(const Proof& proof, const PowParams& params) {
  params.validate();
  const auto reject = [](Reject r, int entry = -1) {
    return VerifyResult{false, r, entry};
  };

  if (proof.entries.size() != params.search_length)
    return reject(Reject::bad_entry_count);
  if (proof.challenge.empty() ||
      proof.challenge.size() > argon2m::kMaxChallengeBytes)
    return reject(Reject::malformed_encoding);

  const std::uint32_t depth = log2_u64(params.mem.blocks);
  const argon2m::ChallengeDigest h0 = argon2m::initial_digest(proof.challenge);

  ChainValue y = chain_start(proof.challenge, proof.root, proof.nonce);
  for (unsigned j = 0; j < params.search_length; ++j) {
    const int ej = static_cast<int>(j);
    const ProofEntry& e = proof.entries[j];

    const std::uint64_t i = select_index(y, params);
    if (e.index != i) return reject(Reject::position_mismatch, ej);
    if (e.prev_path.siblings.size() != depth ||
        e.ref_path.siblings.size() != depth ||
        e.cur_path.siblings.size() != depth)
      return reject(Reject::opening_invalid, ej);

    if (e.prev_path.index != i - 1)
      return reject(Reject::position_mismatch, ej);
    if (!merkle::verify_opening(proof.root, i - 1, e.prev_block, e.prev_path))
      return reject(Reject::opening_invalid, ej);

    // phi(i_j) is computed out of X[i_j - 1]; the proof's echo must agree.
    const std::uint64_t ref = argon2m::phi_index(e.prev_block, i, params.mem);
    if (e.ref_index != ref) return reject(Reject::phi_mismatch, ej);
    if (e.ref_path.index != ref) return reject(Reject::position_mismatch, ej);
    if (!merkle::verify_opening(proof.root, ref, e.ref_block, e.ref_path))
      return reject(Reject::opening_invalid, ej);

    const MBlock cur = argon2m::compress(e.prev_block, e.ref_block, i, h0, params.mem);
    if (e.cur_path.index != i) return reject(Reject::position_mismatch, ej);
    if (!merkle::verify_opening(proof.root, i, cur, e.cur_path))
      return reject(Reject::opening_invalid, ej);

    y = chain_step(y, cur);
  }

  if (!difficulty_check(y, params.difficulty))
    return reject(Reject::difficulty_failed);
  return VerifyResult{true, Reject::none, -1};
}

std::size_t serialized_size(const PowParams& params, std::size_t challenge_len) {
  const std::size_t path = 8 + std::size_t{log2_u64(params.mem.blocks)} * 16;
  const std::size_t entry = 8 + 8 + 2 * argon2m::kBlockBytes + 3 * path;
  return 4 + 1 + 8 + 4 + 1 + 1 + 4 + challenge_len + 16 + 8 +
         std::size_t{params.search_length} * entry;
}

std::vector<std::uint8_t> serialize(const Proof& proof, const PowParams& params) {
  params.validate();
  if (proof.entries.size() != params.search_length)
    throw std::invalid_argument("serialize: entry count does not match L");

  std::vector<std::uint8_t> out;
  out.reserve(serialized_size(params, proof.challenge.size()));
  out.insert(out.end(), kProofMagic.begin(), kProofMagic.end());
  put_int<std::uint8_t>(out, kProofVersion);
  put_int<std::uint64_t>(out, params.mem.blocks);
  put_int<std::uint32_t>(out, params.mem.lanes);
  put_int<std::uint8_t>(out, params.search_length);
  put_int<std::uint8_t>(out, params.difficulty);
  put_int<std::uint32_t>(out, static_cast<std::uint32_t>(proof.challenge.size()));
  out.insert(out.end(), proof.challenge.begin(), proof.challenge.end());
  out.insert(out.end(), proof.root.bytes.begin(), proof.root.bytes.end());
  put_int<std::uint64_t>(out, proof.nonce);

  for (const ProofEntry& e : proof.entries) {
    put_int<std::uint64_t>(out, e.index);
    put_int<std::uint64_t>(out, e.ref_index);
    const auto prev = e.prev_block.to_bytes();
    out.insert(out.end(), prev.begin(), prev.end());
    const auto ref = e.ref_block.to_bytes();
    out.insert(out.end(), ref.begin(), ref.end());
    e.prev_path.serialize_to(out);
    e.ref_path.serialize_to(out);
    e.cur_path.serialize_to(out);
  }
  return out;
}

namespace {

bool read_path(Reader& r, std::uint32_t depth, merkle::OpeningPath& path) {
  if (!r.take_int(path.index)) return false;
  path.siblings.resize(depth);
  for (auto& s : path.siblings)
    if (!r.take(s.bytes.data(), s.bytes.size())) return false;
  return true;
}

}  // namespace

std::optional<PowParams> peek_params(std::span<const std::uint8_t> bytes) {
  Reader r{bytes};
  std::array<std::uint8_t, 4> magic;
  std::uint8_t version;
  if (!r.take(magic.data(), 4) || magic != kProofMagic) return std::nullopt;
  if (!r.take_int(version) || version != kProofVersion) return std::nullopt;

  PowParams params;
  if (!r.take_int(params.mem.blocks)) return std::nullopt;
  if (!r.take_int(params.mem.lanes)) return std::nullopt;
  if (!r.take_int(params.search_length)) return std::nullopt;
  if (!r.take_int(params.difficulty)) return std::nullopt;
  params.mem.passes = 1;
  try {
    params.validate();
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  return params;
}

std::optional<Proof> deserialize(std::span<const std::uint8_t> bytes,
                                 const PowParams& params) {
  params.validate();
  auto header = peek_params(bytes);
  if (!header) return std::nullopt;
  if (header->mem.blocks != params.mem.blocks ||
      header->mem.lanes != params.mem.lanes ||
      header->search_length != params.search_length ||
      header->difficulty != params.difficulty)
    return std::nullopt;

  Reader r{bytes, 4 + 1 + 8 + 4 + 1 + 1};
  std::uint32_t challenge_len;
  if (!r.take_int(challenge_len)) return std::nullopt;
  if (challenge_len == 0 || challenge_len > argon2m::kMaxChallengeBytes)
    return std::nullopt;

  Proof proof;
  proof.challenge.resize(challenge_len);
  if (!r.take(proof.challenge.data(), challenge_len)) return std::nullopt;
  if (!r.take(proof.root.bytes.data(), proof.root.bytes.size()))
    return std::nullopt;
  if (!r.take_int(proof.nonce)) return std::nullopt;

  const std::uint32_t depth = log2_u64(params.mem.blocks);
  proof.entries.resize(params.search_length);
  for (ProofEntry& e : proof.entries) {
    if (!r.take_int(e.index)) return std::nullopt;
    if (!r.take_int(e.ref_index)) return std::nullopt;
    std::array<std::uint8_t, argon2m::kBlockBytes> block;
    if (!r.take(block.data(), block.size())) return std::nullopt;
    e.prev_block = MBlock::from_bytes(block);
    if (!r.take(block.data(), block.size())) return std::nullopt;
    e.ref_block = MBlock::from_bytes(block);
    if (!read_path(r, depth, e.prev_path)) return std::nullopt;
    if (!read_path(r, depth, e.ref_path)) return std::nullopt;
    if (!read_path(r, depth, e.cur_path)) return std::nullopt;
  }
  if (r.pos != bytes.size()) return std::nullopt;  // trailing garbage
  return proof;
}

}  // namespace memhard::mtp
