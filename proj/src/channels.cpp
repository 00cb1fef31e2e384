#include "estent/channels.hpp"

#include <cmath>

namespace estent {

namespace {

void validate(const Channel& ch) {
  if (ch.input_size < 1 || ch.output_size < 1)
    throw config_error("channel: alphabet sizes must be positive");
  if (ch.transition.size() !=
      static_cast<std::size_t>(ch.input_size) * ch.output_size)
    throw config_error("channel: transition matrix has the wrong shape");
  for (int i = 0; i < ch.input_size; ++i) {
    double row = 0;
    for (int j = 0; j < ch.output_size; ++j) {
      double v = ch.prob(i, j);
      if (v < 0) throw config_error("channel: negative transition probability");
      row += v;
    }
    if (std::fabs(row - 1.0) > 1e-12)
      throw config_error("channel: transition row does not sum to 1");
  }
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

}  // namespace

Channel Channel::noiseless(int alphabet) {
  if (alphabet < 1) throw config_error("noiseless channel: alphabet must be positive");
  Channel ch;
  ch.kind = ChannelKind::noiseless;
  ch.input_size = ch.output_size = alphabet;
  ch.transition.assign(static_cast<std::size_t>(alphabet) * alphabet, 0.0);
  for (int i = 0; i < alphabet; ++i)
    ch.transition[static_cast<std::size_t>(i) * alphabet + i] = 1.0;
  return ch;
}

Channel Channel::bsc(double p) {
  if (p < 0.0 || p > 1.0) throw config_error("bsc: p must lie in [0,1]");
  Channel ch;
  ch.kind = ChannelKind::bsc;
  ch.input_size = ch.output_size = 2;
  ch.p = p;
  ch.transition = {1.0 - p, p, p, 1.0 - p};
  return ch;
}

Channel Channel::erasure(double p, int alphabet) {
  if (p < 0.0 || p > 1.0) throw config_error("erasure: p must lie in [0,1]");
  if (alphabet < 1) throw config_error("erasure: alphabet must be positive");
  Channel ch;
  ch.kind = ChannelKind::erasure;
  ch.input_size = alphabet;
  ch.output_size = alphabet + 1;  // last symbol is the erasure mark
  ch.p = p;
  ch.transition.assign(static_cast<std::size_t>(alphabet) * (alphabet + 1), 0.0);
  for (int i = 0; i < alphabet; ++i) {
    ch.transition[static_cast<std::size_t>(i) * (alphabet + 1) + i] = 1.0 - p;
    ch.transition[static_cast<std::size_t>(i) * (alphabet + 1) + alphabet] = p;
  }
  return ch;
}

Channel Channel::general(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows[0].empty())
    throw config_error("general channel: transition matrix must be nonempty");
  Channel ch;
  ch.kind = ChannelKind::general;
  ch.input_size = static_cast<int>(rows.size());
  ch.output_size = static_cast<int>(rows[0].size());
  ch.transition.reserve(static_cast<std::size_t>(ch.input_size) * ch.output_size);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != ch.output_size)
      throw config_error("general channel: ragged transition matrix");
    ch.transition.insert(ch.transition.end(), row.begin(), row.end());
  }
  validate(ch);
  return ch;
}

void transmit_into(const Channel& channel, const int* inputs, int count, Rng& rng,
                   int* outputs) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < count; ++t) {
    int q = inputs[t];
    if (q < 0 || q >= channel.input_size)
      throw config_error("transmit: symbol outside the input alphabet");
    // inverse-CDF draw over the transition row
    double r = u(rng), acc = 0.0;
    int out = channel.output_size - 1;
    for (int j = 0; j < channel.output_size; ++j) {
      acc += channel.prob(q, j);
      if (r < acc) {
        out = j;
        break;
      }
    }
    outputs[t] = out;
  }
}

ChannelTrace transmit(const Channel& channel, const std::vector<int>& inputs,
                      std::uint64_t seed) {
  validate(channel);
  ChannelTrace trace;
  trace.inputs = inputs;
  trace.seed = seed;
  trace.outputs.resize(inputs.size());
  Rng rng = make_rng(seed, 0);
  transmit_into(channel, inputs.data(), static_cast<int>(inputs.size()), rng,
                trace.outputs.data());
  return trace;
}

std::vector<int> block_transmit(const Channel& channel, const std::vector<int>& codeword,
                                std::uint64_t seed) {
  return transmit(channel, codeword, seed).outputs;
}

double blahut_arimoto(const std::vector<double>& transition, int input_size,
                      int output_size, double tol, int max_iter) {
  const auto P = [&](int i, int j) {
    return transition[static_cast<std::size_t>(i) * output_size + j];
  };
  std::vector<double> r(input_size, 1.0 / input_size);  // input distribution
  std::vector<double> qy(output_size, 0.0);             // output marginal
  std::vector<double> update(input_size, 0.0);
  double prev = -1.0;
  for (int it = 0; it < max_iter; ++it) {
    for (int j = 0; j < output_size; ++j) {
      double acc = 0;
      for (int i = 0; i < input_size; ++i) acc += r[i] * P(i, j);
      qy[j] = acc;
    }
    // D_i = sum_j P(j|i) log2( P(j|i) / qy(j) ); capacity iterate is
    // C = sum_i r_i D_i, then r'_i proportional to r_i * 2^{D_i}.
    double cap = 0, norm = 0;
    for (int i = 0; i < input_size; ++i) {
      double d = 0;
      for (int j = 0; j < output_size; ++j) {
        double pij = P(i, j);
        if (pij > 0) d += pij * std::log2(pij / qy[j]);
      }
      update[i] = d;
      cap += r[i] * d;
    }
    if (prev >= 0 && std::fabs(cap - prev) < tol) return cap;
    prev = cap;
    for (int i = 0; i < input_size; ++i) {
      r[i] *= std::exp2(update[i]);
      norm += r[i];
    }
    for (int i = 0; i < input_size; ++i) r[i] /= norm;
  }
  throw invariant_error("blahut_arimoto: did not converge within iteration budget");
}

double capacity_bits(const Channel& channel) {
  validate(channel);
  switch (channel.kind) {
    case ChannelKind::noiseless:
      return std::log2(static_cast<double>(channel.input_size));
    case ChannelKind::bsc:
      return 1.0 - binary_entropy(channel.p);
    case ChannelKind::erasure:
      return (1.0 - channel.p) * std::log2(static_cast<double>(channel.input_size));
    case ChannelKind::general:
      return blahut_arimoto(channel.transition, channel.input_size, channel.output_size);
  }
  throw config_error("capacity: unknown channel kind");
}

}  // namespace estent
