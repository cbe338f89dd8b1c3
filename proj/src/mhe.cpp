#include "memhard/mhe.hpp"

#include <unistd.h>

#include <bit>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace memhard::mhe {

namespace {

using argon2m::ChallengeDigest;
using argon2m::kBlockBytes;
using argon2m::MBlock;

constexpr std::size_t kSubBlocks = kBlockBytes / kCipherBlockBytes;  // 64

std::array<std::uint8_t, 16> derive_iv(const MBlock& x0,
                                       std::span<const std::uint8_t> assoc) {
  static constexpr std::uint8_t kLabel[2] = {'i', 'v'};
  Blake2b state(32);
  state.update(x0.to_bytes());
  state.update(assoc);
  state.update(kLabel);
  std::array<std::uint8_t, 32> full;
  state.finish(full);
  std::array<std::uint8_t, 16> iv;
  std::memcpy(iv.data(), full.data(), 16);
  return iv;
}

// X_i <- F(X_{i-1}, X[phi]) on the sequential extension: the window is every
// block strictly before the predecessor, J1 picking uniformly.
void generate_body_block(std::vector<MBlock>& work, std::uint64_t cur,
                         const ChallengeDigest& h0,
                         const argon2m::MemParams& geom) {
  const MBlock& prev = work[cur - 1];
  const std::uint64_t window = cur - 1;
  const std::uint64_t ref = prev.words[0] % window;
  work[cur] = argon2m::detail::compress_raw(prev, work[ref], cur, h0, geom);
}

void ecb_1024(const BlockCipher& cipher, const std::uint8_t in[kBlockBytes],
              std::uint8_t out[kBlockBytes]) {
  for (std::size_t s = 0; s < kSubBlocks; ++s)
    cipher.encrypt_block(in + s * kCipherBlockBytes, out + s * kCipherBlockBytes);
}

void xor_bytes(std::uint8_t* dst, const std::uint8_t* a, const std::uint8_t* b,
               std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] ^ b[i];
}

template <typename T>
void put_int(std::vector<std::uint8_t>& out, T v) {
  std::uint8_t b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

}  // namespace

argon2m::MemParams MheParams::header_mem_params() const {
  argon2m::MemParams geom;
  geom.blocks = header_blocks();
  geom.lanes = header_blocks() >= 32 ? 4 : 1;
  geom.passes = passes;
  return geom;
}

void MheParams::validate() const {
  if (chunk_blocks == 0 || memory_blocks <= chunk_blocks)
    throw std::invalid_argument("MheParams: need M > q >= 1");
  if (passes == 0) throw std::invalid_argument("MheParams: t must be >= 1");
  if (header_blocks() < 8 || !std::has_single_bit(header_blocks()))
    throw std::invalid_argument(
        "MheParams: header size M - q must be a power of two >= 8");
  header_mem_params().validate();
}

MheHeader init_header(std::span<const std::uint8_t> password,
                      std::span<const std::uint8_t> assoc,
                      const MheParams& params, int threads) {
  params.validate();
  // Shared mode ignores the associated data while filling, so one header can
  // serve every chunk.
  const ChallengeDigest h0 =
      params.header_mode == HeaderMode::shared
          ? argon2m::initial_digest_ps(password, {})
          : argon2m::initial_digest_ps(password, assoc);
  MheHeader header;
  header.h0 = h0;
  header.memory = argon2m::fill_from_digest(h0, params.header_mem_params(), threads);
  return header;
}

Key256 derive_k0(const MheHeader& header, std::span<const std::uint8_t> assoc,
                 const MheParams& params) {
  Blake2b state(32);
  state.update(header.x0().to_bytes());
  if (params.header_mode == HeaderMode::shared) state.update(assoc);
  Key256 k0;
  state.finish(k0);
  return k0;
}

Key256 generate_session_key() {
  Key256 key;
  if (getentropy(key.data(), key.size()) != 0)
    throw std::runtime_error("generate_session_key: OS entropy unavailable");
  return key;
}

MheChunk encrypt_chunk(const MheHeader& header,
                       std::span<const std::uint8_t> assoc, const Key256& k1,
                       std::span<const std::uint8_t> plaintext,
                       const MheParams& params) {
  params.validate();
  const std::uint64_t q = params.chunk_blocks;
  if (plaintext.size() != q * kBlockBytes)
    throw std::invalid_argument("encrypt_chunk: plaintext must be q*1024 bytes");
  if (header.memory.blocks.size() != params.header_blocks())
    throw std::invalid_argument("encrypt_chunk: header size mismatch");

  const Key256 k0 = derive_k0(header, assoc, params);
  const auto outer = make_cipher(params.cipher_id, k0);
  const auto inner = make_cipher(params.cipher_id, k1);
  const argon2m::MemParams geom = params.header_mem_params();

  MheChunk chunk;
  chunk.assoc.assign(assoc.begin(), assoc.end());
  chunk.iv = derive_iv(header.x0(), assoc);
  chunk.body_ct.resize(q * kBlockBytes);

  std::vector<MBlock> work = header.memory.blocks;
  work.resize(params.memory_blocks);

  std::uint8_t cbc_prev[kCipherBlockBytes];
  std::memcpy(cbc_prev, chunk.iv.data(), kCipherBlockBytes);

  const std::uint64_t hdr = params.header_blocks();
  for (std::uint64_t i = 1; i <= q; ++i) {
    const std::uint64_t slot = hdr - 1 + (i - 1);
    auto pre = work[slot].to_bytes();
    if (params.hash_body_inputs) {
      MBlock hashed;
      hprime_1024(pre, hashed);
      pre = hashed.to_bytes();
    }
    const std::uint8_t* m = plaintext.data() + (i - 1) * kBlockBytes;
    std::uint8_t* ct = chunk.body_ct.data() + (i - 1) * kBlockBytes;

    std::array<std::uint8_t, kBlockBytes> cdp;  // C''_i
    for (std::size_t s = 0; s < kSubBlocks; ++s) {
      const std::size_t off = s * kCipherBlockBytes;
      std::uint8_t cp[kCipherBlockBytes];
      inner->encrypt_block(pre.data() + off, cp);            // C'
      xor_bytes(cdp.data() + off, cp, m + off, kCipherBlockBytes);
      std::uint8_t x[kCipherBlockBytes];
      xor_bytes(x, cdp.data() + off, cbc_prev, kCipherBlockBytes);
      outer->encrypt_block(x, ct + off);                     // C, one CBC chain
      std::memcpy(cbc_prev, ct + off, kCipherBlockBytes);
    }

    work[slot].xor_with(MBlock::from_bytes(cdp));
    generate_body_block(work, hdr - 1 + i, header.h0, geom);
  }

  const auto hq = blake2b_256(work[params.memory_blocks - 1].to_bytes());
  for (int half = 0; half < 2; ++half) {
    std::uint8_t x[kCipherBlockBytes];
    xor_bytes(x, hq.data() + 16 * half, k1.data() + 16 * half, kCipherBlockBytes);
    outer->encrypt_block(x, chunk.key_wrap.data() + 16 * half);
  }
  return chunk;
}

namespace {

struct CtReader {
  const std::uint8_t* ct;
  DecryptTrace* trace;
  bool key_ready = false;
  std::uint64_t total_reads = 0;

  const std::uint8_t* read_block(std::uint64_t i) {
    ++total_reads;
    if (trace) {
      auto& bucket = key_ready ? trace->reads_after_key : trace->reads_before_key;
      ++bucket[i - 1];
    }
    return ct + (i - 1) * kBlockBytes;
  }

  void mark_key_unwrapped() {
    key_ready = true;
    if (trace) {
      trace->key_unwrapped = true;
      trace->reads_at_key_unwrap = total_reads;
    }
  }
};

// CBC-decrypts ciphertext block i into C''_i, carrying the rolling previous
// ciphertext sub-block across calls.
void cbc_decrypt_block(const BlockCipher& outer, const std::uint8_t* ct,
                       std::uint8_t cbc_prev[kCipherBlockBytes],
                       std::uint8_t out[kBlockBytes]) {
  for (std::size_t s = 0; s < kSubBlocks; ++s) {
    const std::size_t off = s * kCipherBlockBytes;
    std::uint8_t p[kCipherBlockBytes];
    outer.decrypt_block(ct + off, p);
    xor_bytes(out + off, p, cbc_prev, kCipherBlockBytes);
    std::memcpy(cbc_prev, ct + off, kCipherBlockBytes);
  }
}

}  // namespace

std::vector<std::uint8_t> decrypt_chunk(const MheHeader& header,
                                        const MheChunk& chunk,
                                        const MheParams& params,
                                        DecryptTrace* trace) {
  params.validate();
  const std::uint64_t q = params.chunk_blocks;
  if (chunk.body_ct.size() != q * kBlockBytes)
    throw std::invalid_argument("decrypt_chunk: body size mismatch");
  if (header.memory.blocks.size() != params.header_blocks())
    throw std::invalid_argument("decrypt_chunk: header size mismatch");
  if (trace) {
    trace->reads_before_key.assign(q, 0);
    trace->reads_after_key.assign(q, 0);
    trace->key_unwrapped = false;
    trace->reads_at_key_unwrap = 0;
  }

  const Key256 k0 = derive_k0(header, chunk.assoc, params);
  const auto outer = make_cipher(params.cipher_id, k0);
  const argon2m::MemParams geom = params.header_mem_params();
  const std::uint64_t hdr = params.header_blocks();

  CtReader reader{chunk.body_ct.data(), trace};

  // Pass 1: recover C'' blocks, replay the body generation up to X_q. The
  // C'' values are not kept; the second pass rederives them from the
  // ciphertext.
  std::vector<MBlock> work = header.memory.blocks;
  work.resize(params.memory_blocks);
  {
    std::uint8_t cbc_prev[kCipherBlockBytes];
    std::memcpy(cbc_prev, chunk.iv.data(), kCipherBlockBytes);
    for (std::uint64_t i = 1; i <= q; ++i) {
      std::array<std::uint8_t, kBlockBytes> cdp;
      cbc_decrypt_block(*outer, reader.read_block(i), cbc_prev, cdp.data());
      work[hdr - 1 + (i - 1)].xor_with(MBlock::from_bytes(cdp));
      generate_body_block(work, hdr - 1 + i, header.h0, geom);
    }
  }

  const auto hq = blake2b_256(work[params.memory_blocks - 1].to_bytes());
  Key256 k1;
  for (int half = 0; half < 2; ++half) {
    std::uint8_t p[kCipherBlockBytes];
    outer->decrypt_block(chunk.key_wrap.data() + 16 * half, p);
    xor_bytes(k1.data() + 16 * half, p, hq.data() + 16 * half, kCipherBlockBytes);
  }
  reader.mark_key_unwrapped();
  const auto inner = make_cipher(params.cipher_id, k1);

  // Pass 2: m_i = C''_i xor E_k1(X_pre), where X_pre = X_post xor C''_i.
  std::vector<std::uint8_t> plaintext(q * kBlockBytes);
  {
    std::uint8_t cbc_prev[kCipherBlockBytes];
    std::memcpy(cbc_prev, chunk.iv.data(), kCipherBlockBytes);
    for (std::uint64_t i = 1; i <= q; ++i) {
      std::array<std::uint8_t, kBlockBytes> cdp;
      cbc_decrypt_block(*outer, reader.read_block(i), cbc_prev, cdp.data());

      MBlock x_pre = work[hdr - 1 + (i - 1)];
      x_pre.xor_with(MBlock::from_bytes(cdp));
      auto pre = x_pre.to_bytes();
      if (params.hash_body_inputs) {
        MBlock hashed;
        hprime_1024(pre, hashed);
        pre = hashed.to_bytes();
      }

      std::array<std::uint8_t, kBlockBytes> cp;
      ecb_1024(*inner, pre.data(), cp.data());
      xor_bytes(plaintext.data() + (i - 1) * kBlockBytes, cdp.data(), cp.data(),
                kBlockBytes);
    }
  }
  return plaintext;
}

std::string DelegationReport::render() const {
  std::ostringstream os;
  os << "delegation audit over " << chunk_blocks << " ciphertext blocks\n"
     << "  ciphertext read before session key available: "
     << (ciphertext_read_before_key ? "yes" : "NO") << "\n"
     << "  exactly two reads per ciphertext block:       "
     << (two_passes ? "yes" : "NO") << "\n"
     << "  header derivable without ciphertext:          "
     << (header_independent_of_ciphertext ? "yes" : "NO") << "\n";
  return os.str();
}

DelegationReport delegation_resistance_audit(const MheParams& params) {
  params.validate();
  static constexpr std::uint8_t kPassword[] = {'a', 'u', 'd', 'i', 't'};
  static constexpr std::uint8_t kAssoc[] = {'c', 'h', 'u', 'n', 'k', '0'};

  const MheHeader header = init_header(kPassword, kAssoc, params);
  const Key256 k1 = blake2b_256(std::span(kPassword, sizeof(kPassword)));
  const std::vector<std::uint8_t> zeros(params.chunk_blocks * kBlockBytes, 0);
  const MheChunk chunk = encrypt_chunk(header, kAssoc, k1, zeros, params);

  DecryptTrace trace;
  (void)decrypt_chunk(header, chunk, params, &trace);

  DelegationReport report;
  report.chunk_blocks = params.chunk_blocks;
  // init_header's inputs are (password, assoc, params): no ciphertext enters
  // the header computation by construction.
  report.header_independent_of_ciphertext = true;
  report.ciphertext_read_before_key = trace.key_unwrapped;
  report.two_passes = true;
  for (std::size_t i = 0; i < trace.reads_before_key.size(); ++i) {
    if (trace.reads_before_key[i] < 1) report.ciphertext_read_before_key = false;
    if (trace.reads_before_key[i] + trace.reads_after_key[i] != 2)
      report.two_passes = false;
  }
  return report;
}

std::vector<std::uint8_t> serialize_chunk(const MheChunk& chunk,
                                          const MheParams& params,
                                          const std::array<std::uint8_t, 32>* tag) {
  params.validate();
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kContainerMagic.begin(), kContainerMagic.end());
  put_int<std::uint8_t>(out, kContainerVersion);
  put_int<std::uint8_t>(out, static_cast<std::uint8_t>(params.header_mode));
  put_int<std::uint64_t>(out, params.memory_blocks);
  put_int<std::uint32_t>(out, params.chunk_blocks);
  put_int<std::uint32_t>(out, params.passes);
  put_int<std::uint8_t>(out, params.cipher_id);
  put_int<std::uint32_t>(out, static_cast<std::uint32_t>(chunk.assoc.size()));
  out.insert(out.end(), chunk.assoc.begin(), chunk.assoc.end());
  out.insert(out.end(), chunk.iv.begin(), chunk.iv.end());
  out.insert(out.end(), chunk.body_ct.begin(), chunk.body_ct.end());
  out.insert(out.end(), chunk.key_wrap.begin(), chunk.key_wrap.end());
  put_int<std::uint8_t>(out, tag ? 1 : 0);
  if (tag) out.insert(out.end(), tag->begin(), tag->end());
  return out;
}

std::optional<ParsedChunk> parse_chunk(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  const auto take = [&](void* out, std::size_t n) {
    if (bytes.size() - pos < n) return false;
    std::memcpy(out, bytes.data() + pos, n);
    pos += n;
    return true;
  };

  std::array<std::uint8_t, 4> magic;
  std::uint8_t version, mode, cipher_id, has_tag;
  if (!take(magic.data(), 4) || magic != kContainerMagic) return std::nullopt;
  if (!take(&version, 1) || version != kContainerVersion) return std::nullopt;
  if (!take(&mode, 1) || mode > 1) return std::nullopt;

  ParsedChunk parsed;
  parsed.params.header_mode = static_cast<HeaderMode>(mode);
  if (!take(&parsed.params.memory_blocks, 8)) return std::nullopt;
  if (!take(&parsed.params.chunk_blocks, 4)) return std::nullopt;
  if (!take(&parsed.params.passes, 4)) return std::nullopt;
  if (!take(&cipher_id, 1)) return std::nullopt;
  parsed.params.cipher_id = cipher_id;
  try {
    parsed.params.validate();
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }

  std::uint32_t assoc_len;
  if (!take(&assoc_len, 4)) return std::nullopt;
  if (assoc_len > bytes.size() - pos) return std::nullopt;
  parsed.chunk.assoc.resize(assoc_len);
  if (!take(parsed.chunk.assoc.data(), assoc_len)) return std::nullopt;
  if (!take(parsed.chunk.iv.data(), 16)) return std::nullopt;
  const std::size_t body_bytes =
      std::size_t{parsed.params.chunk_blocks} * kBlockBytes;
  if (body_bytes > bytes.size() - pos) return std::nullopt;
  parsed.chunk.body_ct.resize(body_bytes);
  if (!take(parsed.chunk.body_ct.data(), parsed.chunk.body_ct.size()))
    return std::nullopt;
  if (!take(parsed.chunk.key_wrap.data(), 32)) return std::nullopt;
  if (!take(&has_tag, 1) || has_tag > 1) return std::nullopt;
  if (has_tag) {
    std::array<std::uint8_t, 32> tag;
    if (!take(tag.data(), 32)) return std::nullopt;
    parsed.tag = tag;
  }
  parsed.consumed = pos;
  return parsed;
}

}  // namespace memhard::mhe
