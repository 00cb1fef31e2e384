#include "estent/coding.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <unordered_set>

namespace estent {

namespace {

// Orbit step through a scratch buffer so out never aliases the input.
void advance_state(const SystemModel& system, State& x, State& scratch) {
  system.step(x.data(), nullptr, scratch.data());
  x.swap(scratch);
}

bool one_step_expansion_ok(const SystemModel& system, double delta, double epsilon,
                           Rng& rng) {
  const int dim = system.state_dim;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  State partner(dim), fx(dim), fy(dim);
  for (int trial = 0; trial < 512; ++trial) {
    State base = system.initial(rng);
    // four random offsets plus the two extreme corners of the delta-box
    for (int probe = 0; probe < 6; ++probe) {
      for (int d = 0; d < dim; ++d) {
        double offset;
        if (probe == 4)
          offset = delta * (1.0 - 1e-12);
        else if (probe == 5)
          offset = -delta * (1.0 - 1e-12);
        else
          offset = (2.0 * unit(rng) - 1.0) * delta;
        double v = base[d] + offset;
        partner[d] = system.space == Space::torus ? wrap_unit(v) : v;
      }
      system.step(base.data(), nullptr, fx.data());
      system.step(partner.data(), nullptr, fy.data());
      if (!(system.metric(fx.data(), fy.data()) < epsilon)) return false;
    }
  }
  return true;
}

std::string symbol_key(const std::vector<int>& word, std::size_t begin,
                       std::size_t length) {
  std::string key;
  key.reserve(2 * length);
  for (std::size_t t = 0; t < length; ++t) {
    int s = word[begin + t];
    key.push_back(static_cast<char>(s & 0xff));
    key.push_back(static_cast<char>((s >> 8) & 0xff));
  }
  return key;
}

std::vector<double>& aux_series(TrajectoryBlock& tb, const std::string& name) {
  for (auto& [key, series] : tb.aux)
    if (key == name) return series;
  throw invariant_error("aux series missing: " + name);
}

}  // namespace

BlockCode build_block_code(const Channel& channel, int message_count,
                           int block_length, std::uint64_t seed,
                           int error_trials) {
  if (message_count < 1) throw config_error("build_block_code: need at least one message");
  if (block_length < 1) throw config_error("build_block_code: block length must be positive");
  if (error_trials < 1) throw config_error("build_block_code: need at least one error trial");
  const int alphabet = channel.input_size;
  if (std::log2(static_cast<double>(message_count)) >
      block_length * std::log2(static_cast<double>(alphabet)) + 1e-9)
    throw config_error(
        "build_block_code: more messages than distinct codewords exist");

  BlockCode code;
  code.message_count = message_count;
  code.block_length = block_length;
  code.alphabet = alphabet;
  code.decode_rule = channel.kind == ChannelKind::bsc
                         ? BlockCode::DecodeRule::min_hamming
                         : BlockCode::DecodeRule::ml;
  code.rate_bits = std::log2(static_cast<double>(message_count)) / block_length;
  code.over_capacity = code.rate_bits >= capacity_bits(channel) - 1e-12;

  Rng rng = make_rng(seed, 0);
  std::uniform_int_distribution<int> pick(0, alphabet - 1);
  code.codewords.resize(static_cast<std::size_t>(message_count) * block_length);
  std::unordered_set<std::string> seen;
  seen.reserve(message_count);
  for (int m = 0; m < message_count; ++m) {
    std::size_t base = static_cast<std::size_t>(m) * block_length;
    while (true) {
      for (int t = 0; t < block_length; ++t) code.codewords[base + t] = pick(rng);
      if (seen.insert(symbol_key(code.codewords, base, block_length)).second) break;
    }
  }

  // Monte Carlo error measurement over random messages.
  Rng mc = make_rng(seed, 1);
  std::uniform_int_distribution<int> msg(0, message_count - 1);
  std::vector<int> received(block_length);
  long errors = 0;
  for (int trial = 0; trial < error_trials; ++trial) {
    int m = msg(mc);
    transmit_into(channel, code.codeword(m), block_length, mc, received.data());
    if (block_decode(code, channel, received) != m) ++errors;
  }
  code.empirical_error_rate = static_cast<double>(errors) / error_trials;
  return code;
}

int block_decode(const BlockCode& code, const Channel& channel,
                 const std::vector<int>& received) {
  if (static_cast<int>(received.size()) != code.block_length)
    throw config_error("block_decode: received length does not match the code");
  for (int s : received)
    if (s < 0 || s >= channel.output_size)
      throw config_error("block_decode: received symbol outside the output alphabet");

  if (code.decode_rule == BlockCode::DecodeRule::min_hamming) {
    int best = 0;
    int best_dist = code.block_length + 1;
    for (int m = 0; m < code.message_count; ++m) {
      const int* cw = code.codeword(m);
      int dist = 0;
      for (int t = 0; t < code.block_length; ++t) dist += cw[t] != received[t];
      if (dist < best_dist) {
        best_dist = dist;
        best = m;
      }
    }
    return best;
  }

  // ML with a per-call log-likelihood table (alphabets are small).
  std::vector<double> logp(static_cast<std::size_t>(channel.input_size) *
                           channel.output_size);
  for (int i = 0; i < channel.input_size; ++i)
    for (int j = 0; j < channel.output_size; ++j) {
      double p = channel.prob(i, j);
      logp[static_cast<std::size_t>(i) * channel.output_size + j] =
          p > 0.0 ? std::log(p) : -HUGE_VAL;
    }
  int best = 0;
  double best_ll = -HUGE_VAL;
  for (int m = 0; m < code.message_count; ++m) {
    const int* cw = code.codeword(m);
    double ll = 0.0;
    for (int t = 0; t < code.block_length; ++t)
      ll += logp[static_cast<std::size_t>(cw[t]) * channel.output_size + received[t]];
    if (ll > best_ll) {
      best_ll = ll;
      best = m;
    }
  }
  return best;
}

SpanningScheme build_spanning_scheme(const SystemModel& system, double epsilon,
                                     const Channel& channel, int max_block,
                                     std::uint64_t seed,
                                     const SpanningSchemeOptions& options) {
  if (!system.deterministic())
    throw config_error("build_spanning_scheme: system must be deterministic");
  if (system.space != Space::torus)
    throw config_error("build_spanning_scheme: needs a compact (torus) state space");
  if (!(epsilon > 0.0))
    throw config_error("build_spanning_scheme: epsilon must be positive");
  if (max_block < 2)
    throw config_error("build_spanning_scheme: need max_block >= 2");
  if (options.sample_size < 100)
    throw config_error("build_spanning_scheme: sample_size must be at least 100");
  if (options.uses_per_step < 1)
    throw config_error("build_spanning_scheme: uses_per_step must be positive");
  if (!(options.rate_fraction > 0.0) || options.rate_fraction > 1.0)
    throw config_error("build_spanning_scheme: rate_fraction must lie in (0,1]");

  SpanningScheme scheme;
  scheme.system = system;
  scheme.channel = channel;
  scheme.epsilon = epsilon;
  scheme.max_block = max_block;
  scheme.uses_per_step = options.uses_per_step;

  // Uniform-continuity margin: halve from epsilon until one application of
  // the map cannot push delta-close points epsilon apart.
  Rng rng = make_rng(seed, 0);
  double delta = epsilon;
  bool found = false;
  for (int halving = 0; halving < 40 && !found; ++halving) {
    delta *= 0.5;
    found = one_step_expansion_ok(system, delta, epsilon, rng);
  }
  if (!found)
    throw config_error(
        "build_spanning_scheme: no expansion-compatible margin found above the "
        "floating-point floor");
  scheme.delta = delta;

  scheme.sampling_times.resize(max_block + 2);
  scheme.sampling_times[0] = 0;
  for (int j = 0; j <= max_block; ++j)
    scheme.sampling_times[j + 1] = scheme.sampling_times[j] + j + 1;

  Rng sample_rng = make_rng(seed, 1);
  scheme.sample.reserve(options.sample_size);
  for (int i = 0; i < options.sample_size; ++i)
    scheme.sample.push_back(system.initial(sample_rng));
  const int steps = static_cast<int>(scheme.sampling_times[max_block + 1]);
  scheme.orbits = build_orbits(system, scheme.sample, steps);

  scheme.blocks.resize(max_block + 1);
  for (int j = 1; j <= max_block; ++j) {
    int t0 = static_cast<int>(scheme.sampling_times[j]);
    CoverResult cover = greedy_cover(scheme.orbits, t0, t0 + j, delta, system.space);
    scheme.blocks[j].members = std::move(cover.kept);
    scheme.blocks[j].member_of = std::move(cover.cover_of);
  }

  const double capacity = capacity_bits(channel);
  const double target_rate = channel.kind == ChannelKind::noiseless
                                 ? capacity
                                 : options.rate_fraction * capacity;
  for (int j = 1; j <= max_block; ++j) {
    double bits = target_rate * j * options.uses_per_step;
    scheme.blocks[j].budget = bits >= 62.0
                                  ? (std::int64_t{1} << 62)
                                  : static_cast<std::int64_t>(std::exp2(bits));
  }

  // start_block: least j whose entire suffix of blocks fits the budget.
  int start = -1;
  bool suffix_ok = true;
  for (int j = max_block; j >= 1; --j) {
    suffix_ok = suffix_ok && static_cast<std::int64_t>(scheme.blocks[j].members.size()) <=
                                 scheme.blocks[j].budget;
    if (suffix_ok && j <= max_block - 1) start = j;
  }
  if (start < 0)
    throw budget_error(
        "build_spanning_scheme: spanning sets exceed the message budget for "
        "every block up to max_block");
  scheme.start_block = start;

  for (int j = start + 1; j <= max_block; ++j) {
    scheme.blocks[j].code = build_block_code(
        channel, static_cast<int>(scheme.blocks[j].members.size()),
        j * options.uses_per_step, derive_seed(seed, 1000 + j),
        options.code_error_trials);
    scheme.blocks[j].coded = true;
  }

  // Warn when the measured cover growth rate reaches the budget rate.
  std::vector<int> block_axis(max_block);
  std::vector<double> log_sizes(max_block);
  for (int j = 1; j <= max_block; ++j) {
    block_axis[j - 1] = j;
    log_sizes[j - 1] = std::log2(static_cast<double>(scheme.blocks[j].members.size()));
  }
  scheme.capacity_warning = fit_top_half_slope(block_axis, log_sizes).slope >=
                            target_rate * options.uses_per_step - 1e-9;
  return scheme;
}

namespace {

void require_same_channel(const Channel& a, const Channel& b, const char* what) {
  bool same = a.kind == b.kind && a.input_size == b.input_size &&
              a.output_size == b.output_size && std::fabs(a.p - b.p) <= 1e-12 &&
              a.transition.size() == b.transition.size();
  if (same)
    for (std::size_t i = 0; i < a.transition.size(); ++i)
      if (std::fabs(a.transition[i] - b.transition[i]) > 1e-12) {
        same = false;
        break;
      }
  if (!same)
    throw config_error(std::string(what) +
                       ": channel does not match the one the scheme was built for");
}

}  // namespace

TrajectoryBlock run_spanning_scheme(const SpanningScheme& scheme,
                                    const Channel& channel, int horizon,
                                    std::uint64_t seed) {
  require_same_channel(channel, scheme.channel, "run_spanning_scheme");
  if (horizon < scheme.min_horizon() || horizon > scheme.max_horizon())
    throw config_error(
        "run_spanning_scheme: horizon must cover the first decoded block and "
        "stay within the built blocks");

  const SystemModel& system = scheme.system;
  const int dim = system.state_dim;
  const int uses = scheme.uses_per_step;
  const auto& tau = scheme.sampling_times;

  TrajectoryBlock tb;
  tb.dim = dim;
  tb.horizon = horizon;
  tb.seed = seed;
  const std::size_t point =
      derive_seed(seed, 0) % static_cast<std::uint64_t>(scheme.sample.size());
  tb.states.resize(static_cast<std::size_t>(horizon) * dim);
  for (int t = 0; t < horizon; ++t) {
    const double* row = scheme.orbits.at(static_cast<int>(point), t);
    std::copy(row, row + dim, &tb.states[static_cast<std::size_t>(t) * dim]);
  }
  tb.estimates.assign(static_cast<std::size_t>(horizon) * dim, 0.0);
  tb.aux.emplace_back("decode_error", std::vector<double>(horizon, 0.0));
  for (int k = 0; k < uses; ++k)
    tb.aux.emplace_back("symbol_" + std::to_string(k),
                        std::vector<double>(horizon, -1.0));

  State est(dim), scratch(dim);
  for (int j = scheme.start_block; j + 1 <= scheme.max_block && tau[j + 1] < horizon;
       ++j) {
    const SpanningBlock& block = scheme.blocks[j + 1];
    const int sent = block.member_of[point];
    const int n = block.code.block_length;
    std::vector<int> word(block.code.codeword(sent), block.code.codeword(sent) + n);

    // one block of symbols, uses-per-step of them each time step
    for (int s = 0; s < j + 1; ++s)
      for (int k = 0; k < uses; ++k)
        aux_series(tb, "symbol_" + std::to_string(k))[tau[j] + s] =
            word[static_cast<std::size_t>(s) * uses + k];
    std::vector<int> received =
        block_transmit(channel, word, derive_seed(seed, 2 + j));
    const int decoded = block_decode(block.code, channel, received);
    if (decoded != sent) aux_series(tb, "decode_error")[tau[j + 1]] = 1.0;

    const double* anchor =
        scheme.orbits.at(block.members[decoded], static_cast<int>(tau[j + 1]));
    est.assign(anchor, anchor + dim);
    const std::int64_t stop = std::min<std::int64_t>(tau[j + 2], horizon);
    for (std::int64_t t = tau[j + 1]; t < stop; ++t) {
      std::copy(est.begin(), est.end(), &tb.estimates[static_cast<std::size_t>(t) * dim]);
      advance_state(system, est, scratch);
    }
  }
  return tb;
}

StabilityMargin stability_margin(double lambda_abs, int R, double p) {
  if (!(lambda_abs > 0.0))
    throw config_error("stability_margin: lambda magnitude must be positive");
  if (R <= 0) throw config_error("stability_margin: rate must be positive");
  if (!(p >= 0.0) || p >= 1.0)
    throw config_error("stability_margin: erasure probability must lie in [0,1)");

  auto kappa = [lambda_abs, R, p](double r) {
    return std::pow(lambda_abs, r) * (p + (1.0 - p) * std::exp2(-r * R));
  };
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 1e-12, hi = 8.0;
  double c = hi - phi * (hi - lo);
  double d = lo + phi * (hi - lo);
  double fc = kappa(c), fd = kappa(d);
  while (hi - lo > 1e-8) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - phi * (hi - lo);
      fc = kappa(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + phi * (hi - lo);
      fd = kappa(d);
    }
  }
  double r = 0.5 * (lo + hi);
  return {kappa(r), r};
}

ZoomScheme build_zoom_scheme(const std::vector<double>& eigenvalues,
                             const std::vector<int>& rates, double erasure_p,
                             const std::vector<double>& initial_halfwidth) {
  const std::size_t n = eigenvalues.size();
  if (n == 0) throw config_error("build_zoom_scheme: need at least one mode");
  if (rates.size() != n || initial_halfwidth.size() != n)
    throw config_error("build_zoom_scheme: per-mode argument lengths differ");
  if (!(erasure_p >= 0.0) || erasure_p >= 1.0)
    throw config_error("build_zoom_scheme: erasure probability must lie in [0,1)");

  ZoomScheme scheme;
  scheme.eigenvalues = eigenvalues;
  scheme.rates = rates;
  scheme.erasure_p = erasure_p;
  scheme.initial_halfwidth = initial_halfwidth;
  scheme.center.assign(n, 0.0);
  scheme.halfwidth = initial_halfwidth;
  for (std::size_t i = 0; i < n; ++i) {
    if (eigenvalues[i] == 0.0)
      throw config_error("build_zoom_scheme: eigenvalues must be nonzero");
    if (rates[i] <= 0 || rates[i] > 30)
      throw config_error("build_zoom_scheme: rates must lie in [1, 30]");
    if (!(initial_halfwidth[i] > 0.0))
      throw config_error("build_zoom_scheme: initial halfwidths must be positive");
    StabilityMargin margin =
        stability_margin(std::fabs(eigenvalues[i]), rates[i], erasure_p);
    scheme.kappa_min.push_back(margin.kappa_min);
    scheme.r_star.push_back(margin.r_star);
    if (!(rates[i] * (1.0 - erasure_p) > std::log2(std::fabs(eigenvalues[i]))))
      scheme.stable = false;
  }
  return scheme;
}

TrajectoryBlock run_zoom_scheme(const ZoomScheme& scheme, const SystemModel& system,
                                const Channel& channel, int horizon,
                                std::uint64_t seed) {
  const int n = static_cast<int>(scheme.eigenvalues.size());
  if (channel.kind != ChannelKind::erasure)
    throw config_error("run_zoom_scheme: needs an erasure channel");
  if (std::fabs(channel.p - scheme.erasure_p) > 1e-12)
    throw config_error(
        "run_zoom_scheme: channel erasure probability does not match the scheme");
  if (!system.deterministic() || system.space != Space::euclidean ||
      system.state_dim != n ||
      system.linear_matrix.size() != static_cast<std::size_t>(n) * n)
    throw config_error(
        "run_zoom_scheme: system must be a noise-free linear map over the "
        "scheme's modes");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double a = system.linear_matrix[static_cast<std::size_t>(i) * n + j];
      if (i == j ? std::fabs(a - scheme.eigenvalues[i]) > 1e-12 : a != 0.0)
        throw config_error(
            "run_zoom_scheme: system matrix must be diagonal with the scheme's "
            "eigenvalues");
    }
  if (horizon < 1) throw config_error("run_zoom_scheme: horizon must be positive");

  Rng init_rng = make_rng(seed, 0);
  State x0 = system.initial(init_rng);
  // The state is tracked as the fraction rho = u/width of the current bracket.
  // Reception maps rho to (rho - mid)*2^R with an exactly-representable dyadic
  // mid, so |rho| <= 1 holds exactly in IEEE arithmetic and the bracketing
  // invariant can be asserted without tolerance.  width keeps the pure
  // per-step product recursion.
  std::vector<double> rho(n), width(n);
  for (int i = 0; i < n; ++i) {
    const double offset = x0[i] - scheme.center[i];
    width[i] = scheme.halfwidth[i];
    if (std::fabs(offset) > scheme.initial_halfwidth[i])
      throw config_error(
          "run_zoom_scheme: initial state violates the declared halfwidth bound");
    rho[i] = offset / width[i];
  }

  TrajectoryBlock tb;
  tb.dim = n;
  tb.horizon = horizon;
  tb.seed = seed;
  tb.states.resize(static_cast<std::size_t>(horizon) * n);
  tb.estimates.assign(static_cast<std::size_t>(horizon) * n, 0.0);
  std::vector<std::vector<double>> aux_width(n, std::vector<double>(horizon, 0.0));
  std::vector<std::vector<double>> aux_erased(n, std::vector<double>(horizon, 0.0));
  std::vector<std::vector<double>> aux_symbol(n, std::vector<double>(horizon, -1.0));

  Rng channel_rng = make_rng(seed, 1);
  std::bernoulli_distribution erase(channel.p);
  for (int t = 0; t < horizon; ++t) {
    for (int i = 0; i < n; ++i) {
      tb.states[static_cast<std::size_t>(t) * n + i] = rho[i] * width[i];
      aux_width[i][t] = width[i];
    }
    if (t == horizon - 1) break;
    for (int i = 0; i < n; ++i) {
      const double lam = scheme.eigenvalues[i];
      const int R = scheme.rates[i];
      const double half_cell = std::exp2(-R);  // in rho units
      std::int64_t idx =
          static_cast<std::int64_t>(std::floor((rho[i] + 1.0) * std::exp2(R - 1)));
      const std::int64_t last = (std::int64_t{1} << R) - 1;
      idx = std::max<std::int64_t>(0, std::min(idx, last));
      // nudge so that rho provably lies inside [mid - half_cell, mid + half_cell]
      while (idx > 0 && rho[i] < static_cast<double>(idx) * (2.0 * half_cell) - 1.0)
        --idx;
      while (idx < last &&
             rho[i] > static_cast<double>(idx + 1) * (2.0 * half_cell) - 1.0)
        ++idx;
      aux_symbol[i][t] = static_cast<double>(idx);
      // one atomic erasure draw covers all R bits of this mode's symbol
      const bool erased = erase(channel_rng);
      aux_erased[i][t] = erased ? 1.0 : 0.0;
      const double flip = lam < 0.0 ? -1.0 : 1.0;
      if (erased) {
        rho[i] = flip * rho[i];
        width[i] = std::fabs(lam) * width[i];
      } else {
        const double mid = (static_cast<double>(idx) + 0.5) * (2.0 * half_cell) - 1.0;
        rho[i] = flip * ((rho[i] - mid) * std::exp2(R));
        width[i] = std::fabs(lam) * half_cell * width[i];
      }
      if (!std::isfinite(width[i]))
        throw overflow_error("run_zoom_scheme: bracket width overflowed");
      if (!(std::fabs(rho[i]) <= 1.0))
        throw invariant_error("run_zoom_scheme: state escaped the quantizer bracket");
    }
  }
  for (int i = 0; i < n; ++i) {
    tb.aux.emplace_back("halfwidth_" + std::to_string(i), std::move(aux_width[i]));
    tb.aux.emplace_back("erased_" + std::to_string(i), std::move(aux_erased[i]));
    tb.aux.emplace_back("symbol_" + std::to_string(i), std::move(aux_symbol[i]));
  }
  return tb;
}

int MemorylessQuantizer::cell_of(double x) const {
  if (x <= boundaries.front()) return 0;
  if (x >= boundaries.back()) return level_count - 1;
  int idx = static_cast<int>(std::upper_bound(boundaries.begin(), boundaries.end(), x) -
                             boundaries.begin()) -
            1;
  return std::max(0, std::min(idx, level_count - 1));
}

MemorylessQuantizer build_memoryless_quantizer(const std::vector<double>& sample,
                                               int level_count, bool lloyd_refine) {
  if (level_count < 1)
    throw config_error("build_memoryless_quantizer: need at least one level");
  if (sample.size() < static_cast<std::size_t>(10) * level_count)
    throw config_error(
        "build_memoryless_quantizer: need at least 10 sample points per level");
  const auto [lo_it, hi_it] = std::minmax_element(sample.begin(), sample.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo))
    throw config_error("build_memoryless_quantizer: degenerate (zero-range) sample");

  MemorylessQuantizer q;
  q.level_count = level_count;
  q.boundaries.resize(level_count + 1);
  for (int k = 0; k <= level_count; ++k)
    q.boundaries[k] = lo + (hi - lo) * k / level_count;
  for (int k = 1; k <= level_count; ++k)
    if (!(q.boundaries[k] > q.boundaries[k - 1]))
      throw config_error(
          "build_memoryless_quantizer: sample range too narrow for this many levels");
  q.reproduction_points.resize(level_count);
  for (int k = 0; k < level_count; ++k)
    q.reproduction_points[k] = 0.5 * (q.boundaries[k] + q.boundaries[k + 1]);

  const double cell_width = (hi - lo) / level_count;
  auto uniform_cell = [&](double x) {
    int k = static_cast<int>((x - lo) / cell_width);
    return std::max(0, std::min(k, level_count - 1));
  };
  double total = 0.0;
  for (double x : sample) {
    double r = x - q.reproduction_points[uniform_cell(x)];
    total += r * r;
  }
  q.measured_distortion = total / sample.size();
  if (!lloyd_refine) return q;

  // Lloyd refinement via the splitting (LBG) cascade on the sorted sample.
  // A single Lloyd descent from the uniform cells stalls: edge corrections
  // diffuse roughly one cell per sweep, so the relative-change stop fires
  // while the cell allocation is still far from optimal.  Doubling the level
  // count by splitting each cell at its reproduction point keeps every stage
  // near its own optimum, leaving the stop rule only local work.
  std::vector<double> sorted = sample;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t P = sorted.size();
  std::vector<double> pre1(P + 1, 0.0), pre2(P + 1, 0.0);
  for (std::size_t i = 0; i < P; ++i) {
    pre1[i + 1] = pre1[i] + sorted[i];
    pre2[i + 1] = pre2[i] + sorted[i] * sorted[i];
  }

  std::vector<double> edges = {lo, hi};
  std::vector<double> repro = {0.5 * (lo + hi)};
  int total_sweeps = 0;

  // cell partition of the sorted sample for the current interior edges
  auto cell_bounds = [&](std::vector<std::size_t>& b) {
    const std::size_t m = repro.size();
    b.assign(m + 1, 0);
    b[m] = P;
    for (std::size_t k = 1; k < m; ++k)
      b[k] = std::lower_bound(sorted.begin() + b[k - 1], sorted.end(), edges[k]) -
             sorted.begin();
  };

  std::vector<std::size_t> bounds;
  // alternate boundary/centroid updates until the distortion settles
  auto sweep_stage = [&]() {
    const std::size_t m = repro.size();
    double prev = -1.0;
    for (int it = 0; it < 100000; ++it) {
      for (std::size_t k = 1; k < m; ++k) edges[k] = 0.5 * (repro[k - 1] + repro[k]);
      cell_bounds(bounds);
      double dist = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double cnt = static_cast<double>(bounds[k + 1] - bounds[k]);
        const double s1 = pre1[bounds[k + 1]] - pre1[bounds[k]];
        const double s2 = pre2[bounds[k + 1]] - pre2[bounds[k]];
        if (cnt > 0.0) repro[k] = s1 / cnt;
        dist += s2 - 2.0 * repro[k] * s1 + cnt * repro[k] * repro[k];
      }
      dist /= static_cast<double>(P);
      ++total_sweeps;
      if (prev >= 0.0 && std::fabs(prev - dist) <= 1e-8 * std::max(prev, 1e-300))
        return dist;
      prev = dist;
    }
    return prev;
  };

  double dist = sweep_stage();
  while (static_cast<int>(repro.size()) < level_count) {
    const int m = static_cast<int>(repro.size());
    const int grow = std::min(2 * m, level_count);
    std::vector<double> cuts;
    if (grow == 2 * m) {
      cuts = repro;
    } else {
      // partial doubling: split only the cells with the largest error mass
      cell_bounds(bounds);
      std::vector<std::pair<double, int>> sse(m);
      for (int k = 0; k < m; ++k) {
        const double cnt = static_cast<double>(bounds[k + 1] - bounds[k]);
        const double s1 = pre1[bounds[k + 1]] - pre1[bounds[k]];
        const double s2 = pre2[bounds[k + 1]] - pre2[bounds[k]];
        sse[k] = {cnt > 0.0 ? s2 - s1 * s1 / cnt : 0.0, k};
      }
      std::sort(sse.begin(), sse.end());
      for (int j = 0; j < grow - m; ++j) cuts.push_back(repro[sse[m - 1 - j].second]);
    }
    edges.insert(edges.end(), cuts.begin(), cuts.end());
    std::sort(edges.begin(), edges.end());
    repro.resize(grow);
    for (int k = 0; k < grow; ++k) repro[k] = 0.5 * (edges[k] + edges[k + 1]);
    dist = sweep_stage();
  }

  q.measured_distortion = dist;
  q.boundaries = edges;
  q.reproduction_points = repro;
  q.lloyd_iterations = total_sweeps;
  return q;
}

}  // namespace estent
