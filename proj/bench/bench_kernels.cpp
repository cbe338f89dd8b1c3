// Timing comparison between the serial reference kernels and the OpenMP
// ones: memory fill, tree commitment, nonce search. Results must agree
// bit-for-bit; the table reports the speedups.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "memhard/argon2m.hpp"
#include "memhard/merkle.hpp"
#include "memhard/mtp.hpp"

using namespace memhard;
using Clock = std::chrono::steady_clock;

namespace {

double time_of(auto&& fn) {
  const auto t0 = Clock::now();
  fn();
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  std::uint64_t blocks = argc > 1 ? std::strtoull(argv[1], nullptr, 0)
                                  : (std::uint64_t{1} << 16);
  argon2m::MemParams mem{blocks, 4, 1};
  mem.validate();

  const std::vector<std::uint8_t> challenge = {'b', 'e', 'n', 'c', 'h'};
  const auto h0 = argon2m::initial_digest(challenge);
  const double mib = static_cast<double>(blocks) / 1024.0;
  const int max_threads = omp_get_max_threads();

  std::printf("memory: %llu blocks (%.0f MiB), 4 lanes, %d hardware threads\n\n",
              static_cast<unsigned long long>(blocks), mib, max_threads);

  argon2m::MemoryArray serial_fill;
  const double fill_ref =
      time_of([&] { serial_fill = argon2m::fill_from_digest_reference(h0, mem); });
  std::printf("%-22s %8.3f s  %7.1f MiB/s\n", "fill reference", fill_ref,
              mib / fill_ref);

  for (int threads : {1, 2, 4}) {
    if (threads > max_threads) break;
    argon2m::MemoryArray omp_fill;
    const double t =
        time_of([&] { omp_fill = argon2m::fill_from_digest(h0, mem, threads); });
    std::printf("%-19s %2d %8.3f s  %7.1f MiB/s  x%.2f  %s\n", "fill omp",
                threads, t, mib / t, fill_ref / t,
                omp_fill.blocks == serial_fill.blocks ? "match" : "MISMATCH");
  }

  merkle::MerkleTree tree_ref;
  const double tref =
      time_of([&] { tree_ref = merkle::build_tree_reference(serial_fill.view()); });
  std::printf("\n%-22s %8.3f s  %7.1f MiB/s\n", "tree reference", tref,
              mib / tref);
  for (int threads : {1, 2, 4}) {
    if (threads > max_threads) break;
    merkle::MerkleTree tree;
    const double t =
        time_of([&] { tree = merkle::build_tree(serial_fill.view(), threads); });
    std::printf("%-19s %2d %8.3f s  %7.1f MiB/s  x%.2f  %s\n", "tree omp",
                threads, t, mib / t, tref / t,
                tree.root() == tree_ref.root() ? "match" : "MISMATCH");
  }

  // Nonce throughput at a difficulty high enough to keep workers busy.
  mtp::PowParams pow;
  pow.mem = mem;
  pow.search_length = 16;
  pow.difficulty = 14;
  const auto state = mtp::build_prover_state(challenge, pow, 0);
  std::printf("\n");
  double one_thread = 0;
  for (int threads : {1, 2, 4}) {
    if (threads > max_threads) break;
    mtp::SearchResult r;
    const double t = time_of(
        [&] { r = mtp::search_nonce(state, pow, 0, std::uint64_t{1} << 14, threads); });
    const double rate = static_cast<double>(std::uint64_t{1} << 14) / t;
    if (threads == 1) one_thread = rate;
    std::printf("%-19s %2d %8.3f s  %7.0f nonce/s  x%.2f%s\n", "nonce scan",
                threads, t, rate, rate / one_thread,
                r.nonce ? "  (found early)" : "");
  }
  return 0;
}
