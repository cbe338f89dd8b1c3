#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace memhard::cost {

// Fraction of the honest memory occupied by one computing core in the
// time-area accounting (a hash core per 64 KiB against a 2 GiB array).
inline constexpr double kDefaultCoreArea = 1.0 / 32768.0;

struct TradeoffPoint {
  double alpha;       // stored-memory fraction
  double computation; // C(alpha), recomputation penalty
  double depth;       // D(alpha), latency penalty
};

// Measured C/D penalties for the data-dependent filler, keyed by alpha, with
// the honest anchor (1, 1, 1). log C is interpolated linearly in 1/alpha,
// D linearly in 1/alpha; both are exact at the table points.
class TradeoffTable {
 public:
  struct CD {
    double computation;
    double depth;
    bool extrapolated;  // alpha below the smallest table point
  };

  static TradeoffTable argon2d_ranking();  // the shipped default
  static std::optional<TradeoffTable> load_tsv(std::istream& in);
  static TradeoffTable from_points(std::vector<TradeoffPoint> points);

  CD interpolate(double alpha) const;  // throws for alpha <= 0
  const std::vector<TradeoffPoint>& points() const { return points_; }

 private:
  std::vector<TradeoffPoint> points_;  // sorted by 1/alpha ascending
};

struct CheatParams {
  double alpha = 1.0;   // stored fraction
  double eps = 0.0;     // inconsistent fraction
  double delta = 0.0;   // skewed fraction
  double beta = kDefaultCoreArea;
  double mem_blocks = 0;     // T
  unsigned search_length = 70;  // L
  unsigned difficulty = 0;      // d
  double ratio = 1.0;           // search time over initialization time

  void validate() const;  // alpha,eps,delta >= 0, sum <= 1, eps > 0 if delta > 0
};

// Relative time-area product of a prover on an alpha fraction of memory:
// alpha * D(alpha) + C(alpha) * beta.
double at_ratio(const CheatParams& params, const TradeoffTable& table);

// Lower bound the bandwidth limit imposes on the depth penalty:
// C * bw / bw_max.
double bandwidth_depth_bound(double computation_penalty, double bw, double bw_max);

// (1 - eps)^L: the chance L openings miss every inconsistent block.
double escape_probability(double eps, unsigned search_length);

struct CostReport {
  double calls_honest;    // T + 2^d L
  double calls_cheater;   // expected F calls including detection retries
  double at_ratio;        // relative time-area product of the cheater
  double gamma;           // escape probability
  double depth_fill;      // D penalty while computing the T blocks
  double depth_search;    // D penalty while recomputing opened blocks
};

// Expected cheater cost with stored fraction alpha, inconsistent fraction
// eps and skewed fraction delta. Skew terms are defined as 0 when delta = 0.
CostReport cheater_calls(const CheatParams& params, const TradeoffTable& table);

// Smallest L such that on the whole search grid of (alpha, eps, delta) the
// cheater's combined time-area advantage stays below max_advantage, fill and
// search phases weighted 1 : ratio.
unsigned optimal_search_length(double ratio, double max_advantage,
                               const TradeoffTable& table,
                               double beta = kDefaultCoreArea);

// Closed form 0.5 - ln(R)/(2R) for the inconsistent fraction of an R-way
// split fill chain. Asymptotic in R; the simulation below measures the exact
// model.
double parallel_inconsistency(unsigned cores);

// Splits the chain into R concurrent lockstep segments, draws uniform
// references, and counts hits on not-yet-computed blocks.
double simulate_parallel_fill(unsigned cores, std::uint64_t blocks,
                              unsigned trials, std::uint64_t seed);

struct GrindingResult {
  double naive_escape_measured;  // grinding cheater vs last-block spot checks
  double naive_escape_formula;   // (1 - 1/T)^L
  unsigned pow_successes;        // same cheater against the real verifier
  unsigned pow_trials;
};

// The naive composition (difficulty test on the last block plus L random
// openings, no hash chain) against the cheater who forges only that block,
// and the same cheater against the real proof-of-work verifier.
GrindingResult simulate_grinding(std::uint64_t blocks, unsigned search_length,
                                 unsigned difficulty, unsigned trials,
                                 std::uint64_t seed);

// Memoryless-attack overhead for the 64-byte-block tree PoW variant:
// e^(2 - 2/e) / (1 - e)^9.
double itsuku_overhead(double e);

struct ItsukuMinimum {
  double eps;             // minimizing inconsistent fraction
  double overhead;        // initialization overhead at the minimum
  double search_overhead; // 2 / eps^2
};

ItsukuMinimum itsuku_minimize();

}  // namespace memhard::cost
