#pragma once
// Memoryless channels (noiseless, BSC, erasure, general DMC), per-symbol
// transmission, and capacity in bits per channel use.

#include <cstdint>
#include <vector>

#include "estent/common.hpp"

namespace estent {

enum class ChannelKind { noiseless, bsc, erasure, general };

struct Channel {
  ChannelKind kind = ChannelKind::noiseless;
  int input_size = 2;
  int output_size = 2;
  double p = 0.0;                  // bsc / erasure parameter
  std::vector<double> transition;  // row-major input_size x output_size

  double prob(int in, int out) const {
    return transition[static_cast<std::size_t>(in) * output_size + out];
  }
  // erasure channels reserve the last output symbol as the erasure mark
  int erasure_symbol() const { return output_size - 1; }

  static Channel noiseless(int alphabet);
  static Channel bsc(double p);
  static Channel erasure(double p, int alphabet = 2);
  static Channel general(const std::vector<std::vector<double>>& rows);
};

struct ChannelTrace {
  std::vector<int> inputs;
  std::vector<int> outputs;
  std::uint64_t seed = 0;
};

// i.i.d. per-symbol sampling from the transition rows, reproducible from seed.
ChannelTrace transmit(const Channel& channel, const std::vector<int>& inputs,
                      std::uint64_t seed);

// Streaming variant for callers that manage their own generator state.
void transmit_into(const Channel& channel, const int* inputs, int count, Rng& rng,
                   int* outputs);

// Convenience wrapper over transmit returning outputs only.
std::vector<int> block_transmit(const Channel& channel, const std::vector<int>& codeword,
                                std::uint64_t seed);

// Closed forms for the named kinds; Blahut-Arimoto for general matrices.
double capacity_bits(const Channel& channel);

// Blahut-Arimoto fixed point from a uniform input distribution; throws
// invariant_error if not converged within max_iter.
double blahut_arimoto(const std::vector<double>& transition, int input_size,
                      int output_size, double tol = 1e-9, int max_iter = 10000);

}  // namespace estent
