// Release gate: end-to-end checks of the shipped behavior, one line per
// criterion. Every expected value here comes from a closed form or an
// independently coded oracle, never from the implementation under test.
//
// Usage: estent_acceptance [path-to-cli-binary] [path-to-configs-dir]
// (both default to ./estent and ./configs for manual runs from the repo root).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "estent/bounds.hpp"
#include "estent/channels.hpp"
#include "estent/coding.hpp"
#include "estent/common.hpp"
#include "estent/entropy.hpp"
#include "estent/harness.hpp"
#include "estent/systems.hpp"

namespace {

using namespace estent;
using nlohmann::json;

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

double now_s() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

struct Checks {
  std::vector<std::string> failures;
  std::string note;  // shown on the PASS line

  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

// ---------------------------------------------------------------------------
// 1. Entropy ground truth: doubling ~1 bit/step, cat map in a band around
//    log2((3+sqrt5)/2), rotation ~0; the optimized separated-set counter must
//    match a naive quadratic scan exactly on dense grids.
// ---------------------------------------------------------------------------

// Independent oracle: orbits advanced by the closed-form maps, wrap-around
// sup metric, greedy scan in input order keeping points strictly more than
// eps from everything kept so far. No code shared with the library counter.
long naive_separated_count(const std::vector<std::vector<double>>& orbits, int dim,
                           int n, double eps) {
  auto circ = [](double a, double b) {
    double d = std::fabs(a - b);
    d -= std::floor(d);
    return std::min(d, 1.0 - d);
  };
  std::vector<std::size_t> kept;
  for (std::size_t p = 0; p < orbits.size(); ++p) {
    bool separated = true;
    for (std::size_t q : kept) {
      double d = 0.0;
      for (int t = 0; t < n * dim; ++t)
        d = std::max(d, circ(orbits[p][t], orbits[q][t]));
      if (!(d > eps)) {
        separated = false;
        break;
      }
    }
    if (separated) kept.push_back(p);
  }
  return static_cast<long>(kept.size());
}

void criterion_entropy_ground_truth(Checks& c) {
  const std::uint64_t seed = 2024;
  const double limit_s = 120.0;

  double t0 = now_s();
  SystemModel doubling = make_system("doubling", json::object());
  EntropyGridSpec grid;
  grid.epsilons = {0.25, 0.125, 0.0625, 0.03125};
  grid.horizons = {1, 2, 3, 4, 5, 6, 7, 8};
  grid.sample_size = 20000;
  double doubling_rate =
      estimate_topological_entropy(doubling, grid, seed).extrapolated_rate;
  double doubling_s = now_s() - t0;
  c.require(doubling_rate >= 0.9 && doubling_rate <= 1.1,
            fmt("doubling rate %.4f outside [0.9, 1.1]", doubling_rate));
  c.require(doubling_s <= limit_s, fmt("doubling run took %.0fs", doubling_s));

  t0 = now_s();
  SystemModel cat = make_system("cat_map", json::object());
  EntropyGridSpec cat_grid;
  cat_grid.epsilons = {0.25, 0.125};
  cat_grid.horizons = {1, 2, 3, 4, 5};
  cat_grid.sample_size = 20000;
  double cat_rate =
      estimate_topological_entropy(cat, cat_grid, seed).extrapolated_rate;
  double cat_s = now_s() - t0;
  c.require(cat_rate >= 1.24 && cat_rate <= 1.54,
            fmt("cat map rate %.4f outside [1.24, 1.54]", cat_rate));
  c.require(cat_s <= limit_s, fmt("cat map run took %.0fs", cat_s));

  t0 = now_s();
  SystemModel rotation = make_system(
      "rotation_noise",
      json{{"alpha", 0.3819660112501051}, {"noise", {{"kind", "none"}}}});
  EntropyGridSpec rot_grid;
  rot_grid.epsilons = {0.2, 0.1, 0.05};
  rot_grid.horizons = {1, 2, 4, 8, 16};
  rot_grid.sample_size = 20000;
  double rot_rate =
      estimate_topological_entropy(rotation, rot_grid, seed).extrapolated_rate;
  double rot_s = now_s() - t0;
  c.require(rot_rate <= 0.05, fmt("rotation rate %.4f above 0.05", rot_rate));
  c.require(rot_s <= limit_s, fmt("rotation run took %.0fs", rot_s));

  // Exact agreement between the library counter and the naive scan on
  // 1024-point grids (1-D for the doubling map, 32x32 for the cat map).
  long mismatches = 0;
  {
    std::vector<State> points;
    std::vector<std::vector<double>> orbits;
    for (int i = 0; i < 1024; ++i) {
      double x = i / 1024.0;
      points.push_back({x});
      std::vector<double> orbit;
      for (int t = 0; t < 6; ++t) {
        orbit.push_back(x);
        x = 2.0 * x;
        x -= std::floor(x);
      }
      orbits.push_back(std::move(orbit));
    }
    for (int n = 1; n <= 6; ++n)
      for (double eps : {0.25, 0.1}) {
        long lib = count_separated(doubling, points, n, eps);
        long ref = naive_separated_count(orbits, 1, n, eps);
        if (lib != ref) ++mismatches;
        c.require(lib == ref, fmt("doubling counts differ at n=%d eps=%.2f: "
                                  "library %ld vs naive %ld",
                                  n, eps, lib, ref));
      }
  }
  {
    std::vector<State> points;
    std::vector<std::vector<double>> orbits;
    for (int i = 0; i < 32; ++i)
      for (int j = 0; j < 32; ++j) {
        double x = i / 32.0, y = j / 32.0;
        points.push_back({x, y});
        std::vector<double> orbit;
        for (int t = 0; t < 6; ++t) {
          orbit.push_back(x);
          orbit.push_back(y);
          double nx = 2.0 * x + y, ny = x + y;
          x = nx - std::floor(nx);
          y = ny - std::floor(ny);
        }
        orbits.push_back(std::move(orbit));
      }
    for (int n = 1; n <= 6; ++n)
      for (double eps : {0.25, 0.1}) {
        long lib = count_separated(cat, points, n, eps);
        long ref = naive_separated_count(orbits, 2, n, eps);
        if (lib != ref) ++mismatches;
        c.require(lib == ref, fmt("cat map counts differ at n=%d eps=%.2f: "
                                  "library %ld vs naive %ld",
                                  n, eps, lib, ref));
      }
  }

  c.note = fmt("doubling %.3f, cat %.3f, rotation %.3f bits/step; "
               "24 naive-count checks, %ld mismatches",
               doubling_rate, cat_rate, rot_rate, mismatches);
}

// ---------------------------------------------------------------------------
// 2. Trajectory-space growth: continuous noise keeps gaining bits as eps
//    halves (no finite rate exists); 4-atom noise plateaus at log2(4) = 2.
// ---------------------------------------------------------------------------

void criterion_growth_curves(Checks& c) {
  const std::uint64_t seed = 2024;
  double t0 = now_s();

  SystemModel continuous = make_system(
      "rotation_noise",
      json{{"alpha", 0.0}, {"noise", {{"kind", "uniform"}, {"width", 1.0}}}});
  EntropyGridSpec grid;
  grid.epsilons = {0.5, 0.25, 0.125, 0.0625, 0.03125};
  grid.horizons = {1, 2};
  grid.sample_size = 20000;
  GrowthCurve curve = entropy_growth_curve(continuous, grid, seed);
  double min_gain = HUGE_VAL;
  for (std::size_t i = 1; i < curve.per_epsilon_rate.size(); ++i)
    min_gain = std::min(
        min_gain, curve.per_epsilon_rate[i] - curve.per_epsilon_rate[i - 1]);
  c.require(curve.per_epsilon_rate.size() == 5, "expected 5 rate entries");
  c.require(min_gain >= 0.5,
            fmt("uniform-noise gain %.3f bits per halving below 0.5", min_gain));

  SystemModel atoms = make_system(
      "rotation_noise",
      json{{"alpha", 0.0},
           {"noise", {{"kind", "finite"}, {"support", {0.0, 0.25, 0.5, 0.75}}}}});
  EntropyGridSpec atom_grid;
  atom_grid.epsilons = {0.1, 0.05, 0.025, 0.0125};
  atom_grid.horizons = {1, 2, 3, 4};
  atom_grid.sample_size = 20000;
  GrowthCurve plateau = entropy_growth_curve(atoms, atom_grid, seed);
  const std::vector<double>& r = plateau.per_epsilon_rate;
  double last = r[r.size() - 1], prev = r[r.size() - 2];
  c.require(last <= 2.0 + 1e-9, fmt("4-atom rate %.4f above 2 bits/step", last));
  c.require(prev <= 2.0 + 1e-9, fmt("4-atom rate %.4f above 2 bits/step", prev));
  c.require(last - prev <= 0.25,
            fmt("4-atom curve still gaining %.3f bits at the smallest eps",
                last - prev));

  double elapsed = now_s() - t0;
  c.require(elapsed <= 180.0, fmt("growth curves took %.0fs", elapsed));
  c.note = fmt("uniform noise gains >= %.2f bits per halving over 4 halvings; "
               "4-atom curve flattens at %.3f bits/step",
               min_gain, last);
}

// ---------------------------------------------------------------------------
// 3. Shannon lower bound: for a scalar additive-Gaussian system (sigma2=1)
//    the bound collapses to (1/2) log2(1/eps) in closed form.
// ---------------------------------------------------------------------------

void criterion_shannon_lower_bound(Checks& c) {
  SystemModel system = make_system("additive_nonlinear", json::object());
  double hbar = conditional_entropy_rate(system);
  double worst = 0.0;
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    double bound = shannon_lower_bound(hbar, 1, eps);
    double closed = 0.5 * std::log2(1.0 / eps);
    worst = std::max(worst, std::fabs(bound - closed));
    c.require(std::fabs(bound - closed) <= 1e-9,
              fmt("bound %.12f vs closed form %.12f at eps=%g", bound, closed,
                  eps));
  }
  double witness = shannon_lower_bound(hbar, 1, 1e-7);
  c.require(witness > 10.0,
            fmt("bound %.3f bits at eps=1e-7 does not exceed 10", witness));
  c.note = fmt("matches (1/2)log2(1/eps) within %.1e; %.2f bits at eps=1e-7",
               worst, witness);
}

// ---------------------------------------------------------------------------
// 4. AR rate-distortion: unstable-root correction is exactly log2|root|,
//    and the memoryless case reproduces (1/2) log2(sigma2/theta).
// ---------------------------------------------------------------------------

void criterion_ar_rate_distortion(Checks& c) {
  ArRdResult unstable = ar_rate_distortion({-2.0}, 1.0, 0.25);
  c.require(unstable.correction_bits == 1.0,
            fmt("correction %.17g for root 2, expected exactly 1",
                unstable.correction_bits));
  ArRdResult stable = ar_rate_distortion({-0.5}, 1.0, 0.25);
  c.require(stable.correction_bits == 0.0,
            fmt("correction %.17g for root 0.5, expected exactly 0",
                stable.correction_bits));

  double worst = 0.0;
  for (double theta : {1.0, 0.5, 0.1, 0.01, 1e-4}) {
    ArRdResult white = ar_rate_distortion({}, 1.0, theta, 8192);
    double closed = 0.5 * std::log2(1.0 / theta);
    worst = std::max(worst, std::fabs(white.rate_bits - closed));
    c.require(std::fabs(white.rate_bits - closed) <= 1e-6,
              fmt("white-noise rate %.9f vs %.9f at theta=%g", white.rate_bits,
                  closed, theta));
    c.require(std::fabs(white.distortion - theta) <= 1e-9,
              fmt("white-noise distortion %.9f vs theta %.9f", white.distortion,
                  theta));
  }
  c.note = fmt("corrections exact (1 bit / 0); white-noise rate within %.1e "
               "of closed form over 5 water levels",
               worst);
}

// ---------------------------------------------------------------------------
// 5. Scalar quantizer constant: n^2 x distortion approaches 1/12 for the
//    uniform source and (1/12)||p||_{1/3} (quadrature) for the Gaussian.
// ---------------------------------------------------------------------------

void criterion_quantizer_constant(Checks& c) {
  double t0 = now_s();
  const int sample_size = 1000000;

  {
    const int levels = 1024;
    Rng rng = make_rng(11, 0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> sample(sample_size);
    for (double& v : sample) v = uni(rng);
    MemorylessQuantizer q = build_memoryless_quantizer(sample, levels, false);
    double scaled = double(levels) * levels * q.measured_distortion;
    c.require(scaled >= 0.99 / 12.0 && scaled <= 1.01 / 12.0,
              fmt("uniform n^2 V = %.6f outside 1/12 x [0.99, 1.01]", scaled));
    c.note = fmt("uniform n^2 V = %.5f (1/12 = %.5f)", scaled, 1.0 / 12.0);
  }

  {
    const int levels = 256;
    double norm = density_norm(
        [](const double* x) {
          return std::exp(-0.5 * x[0] * x[0]) / std::sqrt(2.0 * M_PI);
        },
        1, {{-12.0, 12.0}}, 8192);
    Rng rng = make_rng(202, 0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> sample(sample_size);
    for (double& v : sample) v = gauss(rng);
    MemorylessQuantizer q = build_memoryless_quantizer(sample, levels, true);
    double scaled = double(levels) * levels * q.measured_distortion;
    double target = norm / 12.0;
    c.require(std::fabs(scaled / target - 1.0) <= 0.05,
              fmt("Gaussian n^2 V = %.4f vs quadrature target %.4f (off %.1f%%)",
                  scaled, target, 100.0 * std::fabs(scaled / target - 1.0)));
    c.note += fmt("; Gaussian n^2 V = %.4f vs %.4f target", scaled, target);
  }

  double elapsed = now_s() - t0;
  c.require(elapsed <= 120.0, fmt("quantizer runs took %.0fs", elapsed));
}

// ---------------------------------------------------------------------------
// 6. Erasure zoom scheme: rate 6 at erasure 0.2 tracks the doubling mode to
//    any accuracy; rate 1 diverges; the contraction margin agrees in sign
//    with the drift R(1-p) - log2(lambda) against a grid-search oracle.
// ---------------------------------------------------------------------------

void criterion_zoom_scheme(Checks& c) {
  double t0 = now_s();
  SystemModel mode2 = make_system("linear", json{{"A", {{2.0}}}});

  {
    Channel channel = Channel::erasure(0.2, 64);
    ZoomRunner runner(build_zoom_scheme({2.0}, {6}, 0.2, {1.0}));
    ObjectiveReport rep = evaluate(mode2, channel, runner, 1e-3, 100, 2000, 7781);
    c.require(rep.e2_pass_fraction == 1.0,
              fmt("stable zoom e2 = %.3f, expected 1", rep.e2_pass_fraction));

    // replay the same 100 trials and check the online bracket |x - center|
    // <= halfwidth at every step
    long violations = 0;
    const ZoomScheme scheme = build_zoom_scheme({2.0}, {6}, 0.2, {1.0});
    for (int i = 0; i < 100; ++i) {
      TrajectoryBlock tb =
          run_zoom_scheme(scheme, mode2, channel, 2000, derive_seed(7781, i));
      const std::vector<double>* halfwidth = nullptr;
      for (const auto& [key, series] : tb.aux)
        if (key == "halfwidth_0") halfwidth = &series;
      if (halfwidth == nullptr) {
        c.require(false, "halfwidth series missing from zoom trace");
        break;
      }
      for (int t = 0; t < tb.horizon; ++t)
        if (!(std::fabs(tb.state(t)[0]) <= (*halfwidth)[t])) ++violations;
    }
    c.require(violations == 0,
              fmt("%ld bracket violations across 100 trials", violations));
  }

  double median_final = 0.0;
  {
    Channel channel = Channel::erasure(0.2, 2);
    ZoomRunner runner(build_zoom_scheme({2.0}, {1}, 0.2, {1.0}));
    ObjectiveReport rep = evaluate(mode2, channel, runner, 1e-3, 100, 2000, 7782);
    c.require(rep.e2_pass_fraction <= 0.05,
              fmt("under-provisioned zoom e2 = %.3f, expected <= 0.05",
                  rep.e2_pass_fraction));
    const ZoomScheme scheme = build_zoom_scheme({2.0}, {1}, 0.2, {1.0});
    std::vector<double> finals;
    for (int i = 0; i < 100; ++i) {
      TrajectoryBlock tb =
          run_zoom_scheme(scheme, mode2, channel, 2000, derive_seed(7782, i));
      for (const auto& [key, series] : tb.aux)
        if (key == "halfwidth_0") finals.push_back(series.back());
    }
    std::sort(finals.begin(), finals.end());
    median_final = 0.5 * (finals[49] + finals[50]);
    c.require(median_final > 1e3,
              fmt("median final bracket %.3e not above 1e3", median_final));
  }

  double elapsed = now_s() - t0;
  c.require(elapsed <= 60.0, fmt("zoom trials took %.0fs", elapsed));

  // sign agreement on 200 random draws, skipping a 0.05-bit boundary band
  std::mt19937_64 gen(515151);
  std::uniform_real_distribution<double> lam_draw(0.5, 4.0);
  std::uniform_int_distribution<int> rate_draw(1, 8);
  std::uniform_real_distribution<double> p_draw(0.0, 0.95);
  int accepted = 0, attempts = 0, disagreements = 0;
  while (accepted < 200 && attempts < 10000) {
    ++attempts;
    double lam = lam_draw(gen);
    int R = rate_draw(gen);
    double p = p_draw(gen);
    double drift = R * (1.0 - p) - std::log2(lam);
    if (std::fabs(drift) < 0.05) continue;
    StabilityMargin margin = stability_margin(lam, R, p);
    if ((margin.kappa_min < 1.0) != (drift > 0.0)) ++disagreements;

    double grid_best = HUGE_VAL;
    for (int i = 1; i <= 40000; ++i) {
      double r = 8.0 * i / 40000.0;
      double kappa = std::pow(lam, r) * (p + (1.0 - p) * std::exp2(-r * R));
      grid_best = std::min(grid_best, kappa);
    }
    c.require((grid_best < 1.0) == (drift > 0.0),
              fmt("grid oracle minimum %.9f contradicts drift %.3f at "
                  "lambda=%.3f R=%d p=%.3f",
                  grid_best, drift, lam, R, p));
    // the minimizer is interior only when contraction is achievable; at
    // negative drift the infimum sits at r -> 0 and only the sign is defined
    if (drift > 0.0)
      c.require(std::fabs(margin.kappa_min - grid_best) <=
                    1e-6 * std::max(1.0, grid_best),
                fmt("contraction minimum %.9f vs grid oracle %.9f at "
                    "lambda=%.3f R=%d p=%.3f",
                    margin.kappa_min, grid_best, lam, R, p));
    ++accepted;
  }
  c.require(accepted == 200, fmt("only %d usable draws", accepted));
  c.require(disagreements == 0,
            fmt("%d sign disagreements out of %d draws", disagreements, accepted));

  c.note = fmt("rate 6: e2 = 1 with 0 bracket violations; rate 1: e2 <= 0.05, "
               "median final bracket %.1e; 200/200 margin signs agree",
               median_final);
}

// ---------------------------------------------------------------------------
// 7. Spanning-set scheme: exact tracking over a clean binary channel, >= 95%
//    trial passes over bsc(0.05), and a clean refusal (budget error) when the
//    source entropy exceeds the channel capacity.
// ---------------------------------------------------------------------------

void criterion_spanning_scheme(Checks& c) {
  double t0 = now_s();
  SystemModel rotation = make_system(
      "rotation_noise",
      json{{"alpha", 0.3819660112501051}, {"noise", {{"kind", "none"}}}});

  double clean_e1 = 0.0;
  {
    Channel binary = Channel::noiseless(2);
    SpanningRunner runner{build_spanning_scheme(rotation, 0.05, binary,
                                                spanning_blocks_for_horizon(300),
                                                4242, {})};
    ObjectiveReport rep = evaluate(rotation, binary, runner, 0.05, 50, 300, 4243);
    clean_e1 = rep.e1_pass_fraction;
    c.require(rep.tail_start == static_cast<int>(runner.lock_on()),
              fmt("tail starts at %d, lock-on at %lld", rep.tail_start,
                  static_cast<long long>(runner.lock_on())));
    c.require(rep.e1_pass_fraction == 1.0,
              fmt("noiseless e1 = %.3f, expected every trial under eps from "
                  "lock-on",
                  rep.e1_pass_fraction));
    for (double err : rep.per_trial_max_tail_error)
      c.require(err <= 0.05, fmt("post-lock error %.4f above eps", err));
  }

  double bsc_e2 = 0.0;
  {
    Channel bsc = Channel::bsc(0.05);
    SpanningRunner runner{build_spanning_scheme(
        rotation, 0.05, bsc, spanning_blocks_for_horizon(3000), 4242, {})};
    ObjectiveReport rep = evaluate(rotation, bsc, runner, 0.05, 200, 3000, 4244);
    bsc_e2 = rep.e2_pass_fraction;
    c.require(rep.e2_pass_fraction >= 0.95,
              fmt("bsc(0.05) e2 = %.3f below 0.95", rep.e2_pass_fraction));
  }

  {
    SystemModel doubling = make_system("doubling", json::object());
    bool refused = false;
    try {
      build_spanning_scheme(doubling, 0.05, Channel::erasure(0.5, 2), 10, 4242,
                            {});
    } catch (const budget_error&) {
      refused = true;
    }
    c.require(refused, "1 bit/step source over a half-bit channel was not "
                       "refused with a budget error");
  }

  double elapsed = now_s() - t0;
  c.require(elapsed <= 300.0, fmt("spanning runs took %.0fs", elapsed));
  c.note = fmt("noiseless e1 = %.2f over 50 trials; bsc(0.05) e2 = %.3f over "
               "200 trials at horizon 3000; over-budget build refused",
               clean_e1, bsc_e2);
}

// ---------------------------------------------------------------------------
// 8. Bound cross-checks: independent formulas that must coincide.
// ---------------------------------------------------------------------------

void criterion_bound_cross_checks(Checks& c) {
  // On power-of-two spectra ceil(|lambda|) = |lambda|, so the log-sum entropy
  // and the per-mode alphabet bound are the same number.
  std::mt19937_64 gen(4096);
  std::uniform_int_distribution<int> pow_draw(-3, 6);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> count_draw(1, 6);
  double worst_spec = 0.0;
  for (int draw = 0; draw < 50; ++draw) {
    std::vector<std::complex<double>> spectrum;
    int modes = count_draw(gen);
    for (int i = 0; i < modes; ++i) {
      double mag = std::exp2(pow_draw(gen));
      double value = coin(gen) ? mag : -mag;
      spectrum.push_back(coin(gen) ? std::complex<double>(value, 0.0)
                                   : std::complex<double>(0.0, value));
    }
    std::vector<int> ones(spectrum.size(), 1);
    double a = linear_entropy(spectrum, ones);
    double b = zoom_capacity_upper(spectrum);
    worst_spec = std::max(worst_spec, std::fabs(a - b));
    c.require(std::fabs(a - b) <= 1e-12,
              fmt("log-sum %.12f vs alphabet bound %.12f on a power-of-two "
                  "spectrum",
                  a, b));
  }

  // The rate-distortion correction is the log-sum entropy of the
  // characteristic roots, whatever the (stable or unstable) coefficients.
  std::uniform_real_distribution<double> coeff_draw(-2.0, 2.0);
  std::uniform_int_distribution<int> order_draw(1, 4);
  double worst_corr = 0.0;
  for (int draw = 0; draw < 50; ++draw) {
    std::vector<double> a(order_draw(gen));
    for (double& v : a) v = coeff_draw(gen);
    ArRdResult r = ar_rate_distortion(a, 1.0, 0.1);
    std::vector<int> ones(r.roots.size(), 1);
    double root_entropy = linear_entropy(r.roots, ones);
    worst_corr = std::max(worst_corr,
                          std::fabs(r.correction_bits - root_entropy));
    c.require(std::fabs(r.correction_bits - root_entropy) <= 1e-9,
              fmt("correction %.12f vs root log-sum %.12f", r.correction_bits,
                  root_entropy));
  }

  // Closed-form capacities against the iterative fixed point.
  double worst_cap = 0.0;
  auto check_channel = [&](const Channel& channel, const std::string& label) {
    double closed = capacity_bits(channel);
    double iterated = blahut_arimoto(channel.transition, channel.input_size,
                                     channel.output_size);
    worst_cap = std::max(worst_cap, std::fabs(closed - iterated));
    c.require(std::fabs(closed - iterated) <= 1e-6,
              fmt("%s: closed form %.9f vs iterated %.9f", label.c_str(),
                  closed, iterated));
  };
  for (double p : {0.05, 0.11, 0.25, 0.4})
    check_channel(Channel::bsc(p), fmt("bsc(%.2f)", p));
  for (double p : {0.1, 0.3, 0.5})
    for (int alphabet : {2, 4})
      check_channel(Channel::erasure(p, alphabet),
                    fmt("erasure(%.1f, %d)", p, alphabet));

  c.note = fmt("50 spectra within %.1e; 50 root corrections within %.1e; "
               "10 capacities within %.1e of the fixed point",
               worst_spec, worst_corr, worst_cap);
}

// ---------------------------------------------------------------------------
// 9. Determinism: every subcommand rerun with the same config and seed must
//    reproduce every output file byte for byte.
// ---------------------------------------------------------------------------

std::map<std::string, std::string> snapshot_dir(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    files[entry.path().filename().string()] = body.str();
  }
  return files;
}

void criterion_rerun_determinism(Checks& c, const std::string& binary,
                                 const std::string& configs_dir) {
  namespace fs = std::filesystem;
  c.require(fs::exists(binary), "cli binary not found: " + binary);
  c.require(fs::exists(configs_dir), "configs dir not found: " + configs_dir);
  if (!c.failures.empty()) return;

  struct Job {
    const char* subcommand;
    const char* config;
    const char* slot;
  };
  const Job jobs[] = {
      {"entropy", "entropy_doubling.json", "entropy"},
      {"bounds", "bounds_catalog.json", "bounds"},
      {"simulate", "simulate_zoom.json", "simulate-zoom"},
      {"simulate", "simulate_spanning.json", "simulate-spanning"},
      {"sweep", "sweep_zoom.json", "sweep"},
  };
  fs::path root = fs::temp_directory_path() / "estent_acceptance_rerun";
  std::error_code ec;
  fs::remove_all(root, ec);

  int compared_files = 0;
  for (const Job& job : jobs) {
    fs::path dir = root / job.slot;
    std::string cmd = "\"" + binary + "\" " + job.subcommand + " \"" +
                      configs_dir + "/" + job.config + "\" --output-dir \"" +
                      dir.string() + "\"";
    int rc = std::system(cmd.c_str());
    c.require(rc == 0, fmt("%s run 1 exited with %d", job.slot, rc));
    if (rc != 0) continue;
    auto first = snapshot_dir(dir);
    rc = std::system(cmd.c_str());
    c.require(rc == 0, fmt("%s run 2 exited with %d", job.slot, rc));
    if (rc != 0) continue;
    auto second = snapshot_dir(dir);
    c.require(!first.empty(), fmt("%s produced no output files", job.slot));
    c.require(first == second,
              fmt("%s artifacts differ between identical runs", job.slot));
    compared_files += static_cast<int>(first.size());
  }
  c.note = fmt("5 runs x 2, %d artifacts byte-identical", compared_files);
}

}  // namespace

int main(int argc, char** argv) {
  std::string binary = argc > 1 ? argv[1] : "./estent";
  std::string configs_dir = argc > 2 ? argv[2] : "configs";

  struct Entry {
    int id;
    const char* title;
    std::function<void(Checks&)> run;
  };
  const std::vector<Entry> entries = {
      {1, "entropy ground truth", criterion_entropy_ground_truth},
      {2, "noise-driven growth curves", criterion_growth_curves},
      {3, "Shannon lower bound closed form", criterion_shannon_lower_bound},
      {4, "AR rate-distortion corrections", criterion_ar_rate_distortion},
      {5, "scalar quantizer constant", criterion_quantizer_constant},
      {6, "erasure zoom stabilization", criterion_zoom_scheme},
      {7, "spanning-set tracking", criterion_spanning_scheme},
      {8, "bound cross-checks", criterion_bound_cross_checks},
      {9, "rerun determinism",
       [&](Checks& c) { criterion_rerun_determinism(c, binary, configs_dir); }},
  };

  int failed = 0;
  for (const Entry& entry : entries) {
    Checks c;
    double t0 = now_s();
    try {
      entry.run(c);
    } catch (const std::exception& e) {
      c.require(false, fmt("unexpected exception: %s", e.what()));
    }
    double elapsed = now_s() - t0;
    if (c.failures.empty()) {
      std::printf("criterion %d (%s): PASS - %s [%.1fs]\n", entry.id,
                  entry.title, c.note.c_str(), elapsed);
    } else {
      ++failed;
      std::string detail = c.failures.front();
      if (c.failures.size() > 1)
        detail += fmt(" (+%zu more)", c.failures.size() - 1);
      std::printf("criterion %d (%s): FAIL - %s [%.1fs]\n", entry.id,
                  entry.title, detail.c_str(), elapsed);
    }
    std::fflush(stdout);
  }

  std::printf("acceptance: %d/%zu criteria passed\n",
              static_cast<int>(entries.size()) - failed, entries.size());
  return failed == 0 ? 0 : 1;
}
