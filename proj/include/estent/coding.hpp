#pragma once
// Executable coder/estimator schemes: random block codes with maximum-
// likelihood decoding, the pipelined spanning-set scheme for deterministic
// systems over memoryless channels, the adaptive zoom quantizer for scalar
// linear modes over erasure channels, and memoryless high-rate quantizers.

#include <cstdint>
#include <string>
#include <vector>

#include "estent/channels.hpp"
#include "estent/common.hpp"
#include "estent/entropy.hpp"
#include "estent/systems.hpp"

namespace estent {

struct BlockCode {
  enum class DecodeRule { ml, min_hamming };

  int message_count = 0;
  int block_length = 0;
  int alphabet = 0;  // channel input alphabet size
  std::vector<int> codewords;  // message_count x block_length, row-major
  DecodeRule decode_rule = DecodeRule::ml;
  double rate_bits = 0.0;  // (1/block_length) log2(message_count)
  double empirical_error_rate = 0.0;
  bool over_capacity = false;  // rate exceeds channel capacity (warning flag)

  const int* codeword(int message) const {
    return codewords.data() + static_cast<std::size_t>(message) * block_length;
  }
};

// Random codebook (i.i.d. uniform symbols, duplicates redrawn) with the
// decoder measured by Monte Carlo over `error_trials` random transmissions.
BlockCode build_block_code(const Channel& channel, int message_count,
                           int block_length, std::uint64_t seed,
                           int error_trials = 10000);

// Decodes a received block; ML log-likelihood over the transition matrix,
// which reduces to minimum Hamming distance for the BSC. Ties break to the
// lowest message index.
int block_decode(const BlockCode& code, const Channel& channel,
                 const std::vector<int>& received);

struct SpanningSchemeOptions {
  int sample_size = 2000;      // dense initial-state sample backing the covers
  int code_error_trials = 200; // Monte Carlo budget per in-scheme block code
  int uses_per_step = 1;       // channel uses per time step
  double rate_fraction = 0.8;  // budget back-off from capacity (noisy channels)
};

struct SpanningBlock {
  std::vector<std::int32_t> members;    // sample indices of the kept cover points
  std::vector<std::int32_t> member_of;  // sample index -> position in members
  std::int64_t budget = 0;              // message budget for this block's index
  BlockCode code;        // carries this block's index during the previous block
  bool coded = false;    // codes exist only from start_block+1 onward
};

// Pipelined block scheme: during block j-1 (time window [tau_{j-1}, tau_j),
// j steps) the coder transmits the identity of the cover element whose orbit
// shadows the true orbit over block j; the estimator replays the dynamics
// from the decoded element. Blocks lengthen so the per-use rate falls while
// cover sizes grow at the entropy rate.
struct SpanningScheme {
  SystemModel system;   // deterministic, compact state space
  Channel channel;      // the channel the codes were built for
  double epsilon = 0.0;
  double delta = 0.0;   // one-step expansion margin: d < delta => d(f.) < eps
  int max_block = 0;
  int start_block = 0;  // least j with every later block inside its budget
  int uses_per_step = 1;
  std::vector<std::int64_t> sampling_times;  // tau_0 .. tau_{max_block+1}
  std::vector<State> sample;                 // sampled initial states
  OrbitTable orbits;                         // their orbits out to tau_{max_block+1}
  std::vector<SpanningBlock> blocks;         // index j in [0, max_block]
  bool capacity_warning = false;  // measured cover growth rate at or above budget rate

  std::int64_t lock_on() const { return sampling_times[start_block + 1]; }
  std::int64_t min_horizon() const { return sampling_times[start_block + 2]; }
  std::int64_t max_horizon() const { return sampling_times[max_block + 1]; }
};

SpanningScheme build_spanning_scheme(const SystemModel& system, double epsilon,
                                     const Channel& channel, int max_block,
                                     std::uint64_t seed,
                                     const SpanningSchemeOptions& options = {});

// Runs one trial from a sampled initial state; estimates before the first
// decoded block are the origin. Decoding errors are recorded in the aux
// series "decode_error" (1.0 at the first step of a misdecoded block), not
// raised. Transmitted symbols appear in aux series "symbol_<k>" per use
// (-1 when idle).
TrajectoryBlock run_spanning_scheme(const SpanningScheme& scheme,
                                    const Channel& channel, int horizon,
                                    std::uint64_t seed);

struct StabilityMargin {
  double kappa_min = 0.0;
  double r_star = 0.0;
};

// Minimizes kappa(r) = p lambda^r + (1-p) lambda^r 2^{-rR} over r in (0, 8]
// by golden-section search (convex in r) to tolerance 1e-8.
StabilityMargin stability_margin(double lambda_abs, int R, double p);

struct ZoomScheme {
  std::vector<double> eigenvalues;  // one scalar mode per entry, nonzero
  std::vector<int> rates;           // bits per time step per mode
  double erasure_p = 0.0;
  std::vector<double> initial_halfwidth;
  std::vector<double> center;     // current estimate per mode (starts at 0)
  std::vector<double> halfwidth;  // current bracket halfwidth per mode
  std::vector<double> kappa_min;  // per-mode contraction margin
  std::vector<double> r_star;
  bool stable = true;  // every mode satisfies R(1-p) > log2|lambda|
};

ZoomScheme build_zoom_scheme(const std::vector<double>& eigenvalues,
                             const std::vector<int>& rates, double erasure_p,
                             const std::vector<double>& initial_halfwidth);

// Per step and mode, the coder sends the uniform cell index of the state
// within [center - Delta, center + Delta] through an erasure channel whose
// alphabet carries all R bits atomically; coder and estimator stay
// synchronized through channel feedback. Recorded states are RELATIVE to the
// shared center (the estimation error is frame-invariant; absolute
// coordinates of unstable modes overflow doubles at long horizons) and the
// recorded estimates are therefore zero. Aux series per mode i:
// "halfwidth_<i>", "erased_<i>", "symbol_<i>". Raises invariant_error if the
// state ever escapes the bracket.
TrajectoryBlock run_zoom_scheme(const ZoomScheme& scheme, const SystemModel& system,
                                const Channel& channel, int horizon,
                                std::uint64_t seed);

struct MemorylessQuantizer {
  int level_count = 0;
  std::vector<double> boundaries;  // level_count + 1 strictly increasing edges
  std::vector<double> reproduction_points;  // one per cell, inside its closure
  double measured_distortion = 0.0;  // mean squared error on the build sample
  int lloyd_iterations = 0;

  int cell_of(double x) const;
};

// Uniform quantizer over the sample's full range; optional Lloyd refinement
// alternates centroid/boundary updates until the relative distortion change
// drops below 1e-8.
MemorylessQuantizer build_memoryless_quantizer(const std::vector<double>& sample,
                                               int level_count,
                                               bool lloyd_refine = false);

}  // namespace estent
