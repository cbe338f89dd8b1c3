// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Criteria marked [informational] report figures without asserting them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "memhard/argon2m.hpp"
#include "memhard/costmodel.hpp"
#include "memhard/merkle.hpp"
#include "memhard/mhe.hpp"
#include "memhard/mtp.hpp"
#include "support.hpp"

using namespace memhard;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("[%s] %2d %-34s %s\n", pass ? "PASS" : "FAIL", criterion,
              name.c_str(), detail.c_str());
  if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, args...);
  return buf;
}

// 1. Prove-then-verify at T=2^12, p=4, L=8, d=8: 20 runs under 60 s, mean
//    nonce count within 4x of 2^8.
void criterion_1() {
  mtp::PowParams params;
  params.mem = {1 << 12, 4, 1};
  params.search_length = 8;
  params.difficulty = 8;

  const auto start = Clock::now();
  std::uint64_t nonce_total = 0;
  bool all_accepted = true;
  for (int run = 0; run < 20; ++run) {
    std::uint8_t challenge[8] = {static_cast<std::uint8_t>(run), 0xa5, 3, 9,
                                 27, 81, 12, 7};
    mtp::ProveStats stats;
    const auto proof = mtp::prove(challenge, params, 0, UINT64_MAX, 0, &stats);
    if (!proof || !mtp::verify(*proof, params).ok) {
      all_accepted = false;
      break;
    }
    nonce_total += stats.nonces_scanned;
  }
  const double elapsed = seconds_since(start);
  const double mean = nonce_total / 20.0;
  const bool pass =
      all_accepted && elapsed < 60.0 && mean >= 256.0 / 4 && mean <= 256.0 * 4;
  report(1, "end-to-end proof roundtrip", pass,
         fmt("20 runs in %.2f s, mean nonces %.1f (window [64,1024])", elapsed,
             mean));
}

// 2. 10^3 single-bit mutations of a serialized proof: all rejected.
void criterion_2() {
  mtp::PowParams params;
  params.mem = {1 << 12, 4, 1};
  params.search_length = 8;
  params.difficulty = 8;
  const auto challenge = testutil::bytes_of("fuzz-proof");
  const auto proof = mtp::prove(challenge, params, 0, UINT64_MAX);
  if (!proof) {
    report(2, "soundness bit-flip fuzz", false, "prover failed");
    return;
  }
  const auto wire = mtp::serialize(*proof, params);

  std::mt19937_64 rng(2024);
  int rejected = 0;
  const int trials = 1000;
  for (int n = 0; n < trials; ++n) {
    auto mutated = wire;
    const std::size_t bit = rng() % (mutated.size() * 8);
    mutated[bit / 8] ^= static_cast<std::uint8_t>(1 << (bit % 8));
    const auto back = mtp::deserialize(mutated, params);
    if (!back || !mtp::verify(*back, params).ok) ++rejected;
  }
  report(2, "soundness bit-flip fuzz", rejected == trials,
         fmt("%d/%d mutations rejected", rejected, trials));
}

// 3. The four published attacks, each rejected deterministically.
void criterion_3() {
  mtp::PowParams params;
  params.mem = {256, 4, 1};
  params.search_length = 8;
  params.difficulty = 0;
  int rejected = 0;

  // (a) cross-challenge reuse of the whole state
  {
    const auto state =
        mtp::build_prover_state(testutil::bytes_of("challenge-A"), params, 0);
    auto proof = mtp::assemble_proof(state, params, 0);
    proof.challenge = testutil::bytes_of("challenge-B");
    if (!mtp::verify(proof, params).ok) ++rejected;
  }
  // (b) opening of the recomputed block omitted (replaced by the prev path)
  {
    const auto state =
        mtp::build_prover_state(testutil::bytes_of("missing-cur"), params, 0);
    auto proof = mtp::assemble_proof(state, params, 0);
    for (auto& e : proof.entries) e.cur_path = e.prev_path;
    if (!mtp::verify(proof, params).ok) ++rejected;
  }
  // (c) one opening replayed for every step
  {
    const auto state =
        mtp::build_prover_state(testutil::bytes_of("replayed"), params, 0);
    auto proof = mtp::assemble_proof(state, params, 0);
    for (unsigned j = 1; j < params.search_length; ++j)
      proof.entries[j] = proof.entries[0];
    if (!mtp::verify(proof, params).ok) ++rejected;
  }
  // (d) first-segment blocks duplicated across lanes
  {
    const auto challenge = testutil::bytes_of("lane-dup");
    mtp::ProverState state;
    state.challenge = challenge;
    state.h0 = argon2m::initial_digest(challenge);
    state.memory = testutil::replay_fill(state.h0, params.mem);
    const std::uint64_t seg = params.mem.segment_length();
    for (std::uint32_t lane = 1; lane < params.mem.lanes; ++lane)
      for (std::uint64_t col = 0; col < seg; ++col)
        state.memory.blocks[argon2m::psi_inv(lane, col, params.mem)] =
            state.memory.blocks[argon2m::psi_inv(0, col, params.mem)];
    state.tree = merkle::build_tree(state.memory.view(), 0);

    bool tested = false, caught = false;
    for (std::uint64_t nonce = 0; nonce < 4096 && !tested; ++nonce) {
      const auto proof = mtp::assemble_proof(state, params, nonce);
      for (const auto& e : proof.entries) {
        const auto lc = argon2m::psi(e.index, params.mem);
        if (lc.lane != 0 && lc.column >= 2 && lc.column < seg) {
          tested = true;
          caught = !mtp::verify(proof, params).ok;
          break;
        }
      }
    }
    if (tested && caught) ++rejected;
  }
  report(3, "published attack regressions", rejected == 4,
         fmt("%d/4 attacks rejected", rejected));
}

// 4. Detection law at T=2^10: planting ceil(eps*T) inconsistent blocks during
//    the fill escapes L openings with frequency (1-eps)^L within 0.05.
void criterion_4() {
  mtp::PowParams params;
  params.mem = {1 << 10, 4, 1};
  params.difficulty = 0;

  struct Case {
    double eps;
    unsigned length;
  };
  const Case cases[] = {{1.0 / 8, 8}, {1.0 / 8, 16}, {1.0 / 4, 8}};
  bool all = true;
  std::string detail;
  std::mt19937_64 rng(404);
  for (const auto& c : cases) {
    params.search_length = static_cast<std::uint8_t>(c.length);
    const unsigned trials = 2000;
    const unsigned per_state = 25;
    unsigned escapes = 0;
    for (unsigned t = 0; t < trials; t += per_state) {
      std::vector<std::uint8_t> challenge(8);
      for (auto& b : challenge) b = static_cast<std::uint8_t>(rng());
      std::set<std::uint64_t> bad;
      const auto wanted = static_cast<std::uint64_t>(
          std::ceil(c.eps * static_cast<double>(params.mem.blocks)));
      while (bad.size() < wanted) {
        const std::uint64_t cand = rng() % params.mem.blocks;
        if (argon2m::psi(cand, params.mem).column >= 2) bad.insert(cand);
      }
      const auto state = testutil::cheating_state(challenge, params, bad, rng());
      for (unsigned k = 0; k < per_state && t + k < trials; ++k)
        if (mtp::verify(mtp::assemble_proof(state, params, k), params).ok)
          ++escapes;
    }
    const double measured = static_cast<double>(escapes) / trials;
    const double expected = std::pow(1 - c.eps, c.length);
    if (std::abs(measured - expected) >= 0.05) all = false;
    detail += fmt("(e=%.3f,L=%u: %.3f vs %.3f) ", c.eps, c.length, measured,
                  expected);
  }
  report(4, "detection probability law", all, detail);
}

// 5. Cost formulas against an independent extended-precision evaluation,
//    10 significant digits over 100 random parameter sets; exact honest
//    reduction.
namespace oracle {

long double interp(long double alpha, bool depth) {
  static const long double xs[] = {1, 2, 3, 4, 5, 6, 7};
  static const long double cs[] = {1, 1.5L, 4, 20.2L, 344, 4660, 262144};
  static const long double ds[] = {1, 1.5L, 2.8L, 5.5L, 10.3L, 17, 27};
  const long double x = 1.0L / alpha;
  std::size_t hi = 6;
  if (x < xs[6]) {
    hi = 1;
    while (xs[hi] < x) ++hi;
  }
  const long double t = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
  if (depth) return ds[hi - 1] * (1 - t) + ds[hi] * t;
  return expl(logl(cs[hi - 1]) * (1 - t) + logl(cs[hi]) * t);
}

long double cheater(long double alpha, long double eps, long double delta,
                    long double mem, unsigned length, unsigned difficulty) {
  const long double c = interp(alpha + eps + delta, false);
  const long double skew_fill =
      delta > 0 ? eps * powl(alpha + eps, -delta / eps) : 0.0L;
  const long double skew_search = delta > 0 ? delta * delta / (2 * eps) : 0.0L;
  const long double gamma = powl(1 - eps, static_cast<long double>(length));
  const long double searches =
      powl(2.0L, static_cast<long double>(difficulty)) * length;
  return ((c + skew_fill) * mem + searches * (c + skew_search)) / gamma;
}

}  // namespace oracle

void criterion_5() {
  const auto table = cost::TradeoffTable::argon2d_ranking();
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  long double worst = 0;
  int checked = 0;
  while (checked < 100) {
    cost::CheatParams p;
    p.alpha = unit(rng) * 0.6;
    p.eps = 0.01 + unit(rng) * 0.3;
    p.delta = unit(rng) * std::min(0.9, 3 * p.eps);
    if (p.alpha + p.eps + p.delta > 1.0) continue;
    if (p.alpha + p.eps + p.delta < 0.15) continue;
    p.mem_blocks = std::exp2(10 + static_cast<int>(unit(rng) * 15));
    p.search_length = 1 + static_cast<unsigned>(unit(rng) * 100);
    p.difficulty = static_cast<unsigned>(unit(rng) * 30);

    const auto mine = cost::cheater_calls(p, table);
    const long double expect = oracle::cheater(
        p.alpha, p.eps, p.delta, p.mem_blocks, p.search_length, p.difficulty);
    worst = std::max(worst,
                     fabsl(static_cast<long double>(mine.calls_cheater) - expect) /
                         expect);
    ++checked;
  }

  // Eq. (1) route on random alphas.
  for (int n = 0; n < 100; ++n) {
    cost::CheatParams p;
    p.alpha = 1.0 / (1.0 + unit(rng) * 5.8);
    p.beta = std::exp2(-15);
    const long double expect =
        p.alpha * oracle::interp(p.alpha, true) +
        oracle::interp(p.alpha, false) * static_cast<long double>(p.beta);
    worst = std::max(
        worst, fabsl(static_cast<long double>(cost::at_ratio(p, table)) - expect) /
                   expect);
  }

  cost::CheatParams honest;
  honest.alpha = 1;
  honest.mem_blocks = std::exp2(21);
  honest.search_length = 70;
  honest.difficulty = 10;
  const auto h = cost::cheater_calls(honest, table);
  const bool honest_exact =
      h.calls_cheater == std::exp2(21) + std::exp2(10) * 70 &&
      h.calls_honest == h.calls_cheater;

  const bool pass = worst < 1e-10L && honest_exact;
  report(5, "cost formulas vs high precision", pass,
         fmt("worst rel err %.2Le, honest reduction %s", worst,
             honest_exact ? "exact" : "WRONG"));
}

// 6. Interpolation exact on every published table point.
void criterion_6() {
  const auto table = cost::TradeoffTable::argon2d_ranking();
  const double alphas[] = {1.0 / 2, 1.0 / 3, 1.0 / 4, 1.0 / 5, 1.0 / 6, 1.0 / 7};
  const double cs[] = {1.5, 4, 20.2, 344, 4660, 262144};
  const double ds[] = {1.5, 2.8, 5.5, 10.3, 17, 27};
  bool exact = true;
  for (int k = 0; k < 6; ++k) {
    const auto cd = table.interpolate(alphas[k]);
    if (cd.computation != cs[k] || cd.depth != ds[k]) exact = false;
  }
  report(6, "tradeoff table anchors", exact,
         exact ? "all six (alpha, C, D) points exact" : "mismatch");
}

// 7. Memoryless-attack minimum for the 64-byte-block variant.
void criterion_7() {
  const auto m = cost::itsuku_minimize();
  const bool pass = std::abs(m.eps - 0.43) <= 0.01 &&
                    std::abs(m.overhead - 1475) <= 15 &&
                    m.search_overhead > 10.0 && m.search_overhead < 11.5;
  report(7, "memoryless-attack minimum", pass,
         fmt("e*=%.4f overhead=%.1f search=%.1f", m.eps, m.overhead,
             m.search_overhead));
}

// 8. Split-chain inconsistency against the closed form 0.5 - ln(R)/(2R).
//    The closed form is a large-R asymptotic: the exact expectation of the
//    modeled miss probability at R=2 is 2*ln2 - 1 halved (~0.193), so the
//    R=2 case sits outside the stated 0.05 window by construction. It is
//    reported honestly rather than tuned away.
void criterion_8() {
  bool all = true;
  std::string detail;
  for (const unsigned cores : {2u, 4u, 8u, 16u}) {
    const double sim =
        cost::simulate_parallel_fill(cores, std::uint64_t{1} << 16, 48, 808);
    const double closed = cost::parallel_inconsistency(cores);
    const bool ok = std::abs(sim - closed) < 0.05;
    if (!ok) all = false;
    detail += fmt("(R=%u: %.3f vs %.3f%s) ", cores, sim, closed,
                  ok ? "" : " OUT");
  }
  report(8, "time-lock inconsistency law", all, detail);
}

// 9. Grinding: the naive composition escapes at (1-1/T)^L, the chained
//    verifier never accepts the same cheater.
void criterion_9() {
  const auto g = cost::simulate_grinding(1 << 10, 16, 8, 1000, 909);
  const bool naive_ok =
      std::abs(g.naive_escape_measured - g.naive_escape_formula) < 0.02;
  const bool pow_ok = g.pow_successes == 0 && g.pow_trials == 1000;
  report(9, "grinding demonstration", naive_ok && pow_ok,
         fmt("naive %.4f vs %.4f, chained %u/%u accepted",
             g.naive_escape_measured, g.naive_escape_formula, g.pow_successes,
             g.pow_trials));
}

// 10. Encryption: 100 random roundtrips across both header modes, ~50%
//     plaintext garbling from one flipped ciphertext bit, exactly two
//     ciphertext passes on decryption.
void criterion_10() {
  std::mt19937_64 rng(1010);
  const auto rand_bytes = [&](std::size_t n) {
    std::vector<std::uint8_t> out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng());
    return out;
  };

  bool roundtrips = true;
  for (int n = 0; n < 100; ++n) {
    mhe::MheParams params;
    params.chunk_blocks = 1 + static_cast<std::uint32_t>(rng() % 8);
    params.memory_blocks =
        params.chunk_blocks + (rng() % 2 ? 64 : 8);
    params.passes = 1 + static_cast<std::uint32_t>(rng() % 2);
    params.header_mode =
        n % 2 ? mhe::HeaderMode::shared : mhe::HeaderMode::per_chunk;
    const auto password = rand_bytes(6 + rng() % 10);
    const auto assoc = rand_bytes(4 + rng() % 12);
    const auto plain = rand_bytes(std::size_t{params.chunk_blocks} * 1024);
    mhe::Key256 k1;
    for (auto& b : k1) b = static_cast<std::uint8_t>(rng());

    const auto header = mhe::init_header(password, assoc, params);
    const auto chunk = mhe::encrypt_chunk(header, assoc, k1, plain, params);
    if (mhe::decrypt_chunk(header, chunk, params) != plain) {
      roundtrips = false;
      break;
    }
  }

  mhe::MheParams params;
  params.memory_blocks = 64 + 4;
  params.chunk_blocks = 4;
  const auto password = testutil::bytes_of("password");
  const auto assoc = testutil::bytes_of("assoc");
  const auto plain = rand_bytes(4 * 1024);
  mhe::Key256 k1;
  for (auto& b : k1) b = static_cast<std::uint8_t>(rng());
  const auto header = mhe::init_header(password, assoc, params);
  const auto chunk = mhe::encrypt_chunk(header, assoc, k1, plain, params);

  auto tampered = chunk;
  tampered.body_ct[rng() % tampered.body_ct.size()] ^= 0x20;
  const auto garbage = mhe::decrypt_chunk(header, tampered, params);
  std::size_t flips = 0;
  for (std::size_t i = 0; i < plain.size(); ++i)
    flips += static_cast<std::size_t>(__builtin_popcount(plain[i] ^ garbage[i]));
  const double garble = static_cast<double>(flips) / (8.0 * plain.size());

  mhe::DecryptTrace trace;
  (void)mhe::decrypt_chunk(header, chunk, params, &trace);
  bool two_passes = trace.key_unwrapped;
  for (std::uint32_t i = 0; i < params.chunk_blocks; ++i)
    if (trace.reads_before_key[i] != 1 || trace.reads_after_key[i] != 1)
      two_passes = false;

  const bool pass =
      roundtrips && garble >= 0.40 && garble <= 0.60 && two_passes;
  report(10, "memory-hard encryption", pass,
         fmt("roundtrips %s, bit-flip garble %.1f%%, two passes %s",
             roundtrips ? "100/100" : "FAILED", 100 * garble,
             two_passes ? "yes" : "NO"));
}

// 11. Informational figures: measured fill rate, commitment time and proof
//     size next to the reported reference numbers; nothing asserted. The
//     published opening-count table is reproduced within +/-15 with strict
//     monotonicity (its exact generation grid is unspecified).
void criterion_11() {
  argon2m::MemParams mem{1 << 15, 4, 1};
  const auto h0 = argon2m::initial_digest(testutil::bytes_of("bench"));
  const auto t0 = Clock::now();
  const auto filled = argon2m::fill_from_digest(h0, mem, 0);
  const double fill_s = seconds_since(t0);
  const auto t1 = Clock::now();
  const auto tree = merkle::build_tree(filled.view(), 0);
  const double tree_s = seconds_since(t1);
  (void)tree;
  const double bytes = static_cast<double>(mem.blocks) * 1024;
  const double cpb = fill_s * 3.0e9 / bytes;  // 3 GHz reference clock

  mtp::PowParams production;
  production.mem = {std::uint64_t{1} << 21, 4, 1};
  production.search_length = 70;
  const double proof_kib =
      static_cast<double>(mtp::serialized_size(production, 80)) / 1024.0;

  const auto table = cost::TradeoffTable::argon2d_ranking();
  const unsigned l_10_8 = cost::optimal_search_length(10, 8, table);
  const unsigned l_1_2 = cost::optimal_search_length(1, 2, table);
  const bool anchors_ok =
      l_10_8 >= 71 - 15 && l_10_8 <= 71 + 15 && l_1_2 >= 80 - 15 &&
      l_1_2 <= 80 + 15;

  report(11, "informational benchmarks", anchors_ok,
         fmt("fill %.2f cpb@3GHz (ref 0.7), commit %.3f s/32MiB, proof %.0f "
             "KiB full paths (ref ~187 shared); L(10,8)=%u~71 L(1,2)=%u~80",
             cpb, tree_s, proof_kib, l_10_8, l_1_2));
}

}  // namespace

int main() {
  const auto start = Clock::now();
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  std::printf("%d criterion(s) failed, %.1f s total\n", g_failures,
              seconds_since(start));
  return g_failures == 0 ? 0 : 1;
}
