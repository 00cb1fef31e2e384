#pragma once
// Dynamical system abstraction x_{t+1} = f(x_t, w_t), the catalog of concrete
// systems used by the experiments, and trajectory generation.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "estent/common.hpp"

namespace estent {

enum class Space { euclidean, torus };
enum class NoiseKind { none, gaussian, uniform, finite };

using State = std::vector<double>;

struct NoiseSpec {
  NoiseKind kind = NoiseKind::none;
  double sigma2 = 1.0;            // gaussian: per-coordinate variance
  double width = 1.0;             // uniform: draws on [0, width)
  std::vector<double> support;    // finite: scalar support values (per coordinate, iid)
  std::vector<double> pmf;        // finite: probabilities; empty means uniform
};

struct SystemModel {
  std::string name;
  int state_dim = 1;
  int noise_dim = 0;              // 0 for deterministic systems
  Space space = Space::torus;
  NoiseSpec noise;
  bool additive = false;          // x_{t+1} = f(x_t) + w_t with w entering every noise coord
  std::vector<double> linear_matrix;  // row-major A when the map is linear, else empty

  // (state, noise, out); noise pointer may be null when noise_dim == 0.
  std::function<void(const double*, const double*, double*)> step_map;
  std::function<void(Rng&, double*)> initial_sampler;

  bool deterministic() const { return noise.kind == NoiseKind::none; }

  // Applies step_map and, on the torus, wraps every coordinate into [0,1).
  void step(const double* x, const double* w, double* out) const;
  void draw_noise(Rng& rng, double* w) const;
  State initial(Rng& rng) const;

  // Sup metric: max over coordinates of |a-b| (euclidean) or the circle
  // distance min(|a-b|, 1-|a-b|) (torus).
  double metric(const double* a, const double* b) const;
  double metric(const State& a, const State& b) const;
};

struct TrajectoryBlock {
  int dim = 1;
  int horizon = 0;
  std::uint64_t seed = 0;
  std::vector<double> states;     // horizon * dim, row-major
  std::vector<double> estimates;  // empty, or horizon * dim
  std::vector<double> noise;      // (horizon-1) * noise_dim, empty if deterministic
  int noise_dim = 0;
  // Named per-step series for trace output (e.g. zoom interval widths).
  std::vector<std::pair<std::string, std::vector<double>>> aux;

  const double* state(int t) const { return &states[static_cast<std::size_t>(t) * dim]; }
  const double* estimate(int t) const { return &estimates[static_cast<std::size_t>(t) * dim]; }
  bool has_estimates() const { return !estimates.empty(); }
};

// Simulates `horizon` states from a fresh seed-derived draw of x0 and noise.
TrajectoryBlock simulate(const SystemModel& system, int horizon, std::uint64_t seed);

// Instantiates a catalog system by name; see README for parameter shapes.
SystemModel make_system(const std::string& name, const nlohmann::json& params);

// Fibered Bowen distance over n steps: max_{0<=i<n} d(f^i x, f^i y), both
// orbits driven by the SAME noise path (ordinary Bowen metric when
// deterministic).
double orbit_distance(const SystemModel& system, const State& x, const State& y, int n,
                      const std::vector<double>& noise_path = {});

// [0,1) wrap used by torus systems; exact on negatives and the 1.0 edge.
inline double wrap_unit(double v) {
  double w = v - std::floor(v);
  return w >= 1.0 ? 0.0 : w;
}

}  // namespace estent
