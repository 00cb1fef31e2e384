#pragma once
// Separated/spanning set counting under (fibered, time-offset) Bowen metrics
// and the entropy-rate estimators built on those counts.

#include <cstdint>
#include <vector>

#include "estent/systems.hpp"

namespace estent {

enum class EntropyKind { topological, katok_metric, fibered };

struct EntropyGridSpec {
  std::vector<double> epsilons;  // strictly decreasing, positive
  std::vector<int> horizons;     // strictly increasing, >= 1
  int offset = 0;                // n_0 for time-offset counting
  int sample_size = 20000;
  double discard_fraction = 0.0;  // delta for Katok-style discard
};

// Precomputed time slices: orbit of point p at time t is dim doubles.
struct OrbitTable {
  int dim = 1;
  int steps = 0;
  int npoints = 0;
  std::vector<double> data;  // ((p * steps) + t) * dim

  const double* at(int p, int t) const {
    return &data[(static_cast<std::size_t>(p) * steps + t) * dim];
  }
};

// Greedy scan in input order: a point is kept iff its orbit restricted to
// time window [t_begin, t_end) is > eps away (sup over time and coordinates)
// from every kept point; otherwise it is assigned to the first kept point
// (in keep order) within eps. Ties (distance == eps) are NOT separated.
struct CoverResult {
  std::vector<std::int32_t> kept;      // indices into the input order
  std::vector<std::int32_t> cover_of;  // per point: position in `kept` covering it
};

CoverResult greedy_cover(const OrbitTable& orbits, int t_begin, int t_end, double eps,
                         Space space);

// Builds the orbit table for `steps` time slices; noise_path (shared by all
// points) must hold (steps-1)*noise_dim draws for noisy systems.
OrbitTable build_orbits(const SystemModel& system, const std::vector<State>& points,
                        int steps, const std::vector<double>& noise_path = {});

long count_separated(const SystemModel& system, const std::vector<State>& points, int n,
                     double epsilon, int offset = 0,
                     const std::vector<double>& noise_path = {});
long count_spanning(const SystemModel& system, const std::vector<State>& points, int n,
                    double epsilon, const std::vector<double>& noise_path = {});

struct EntropyEstimate {
  EntropyKind kind = EntropyKind::topological;
  EntropyGridSpec grid;
  std::vector<std::vector<double>> counts;  // [epsilon][horizon]
  std::vector<std::vector<double>> rates;   // log2(count)/n entrywise
  std::vector<double> per_epsilon_rate;     // LS slope of log2 count vs n, top half of horizons
  std::vector<double> per_epsilon_stderr;   // standard error of that slope
  double extrapolated_rate = 0.0;           // per-epsilon rate at the smallest epsilon
  std::vector<double> path_rates;           // fibered: per-path extrapolated rates
  double rate_spread = 0.0;                 // fibered: sample stddev across paths
};

EntropyEstimate estimate_topological_entropy(const SystemModel& system,
                                             const EntropyGridSpec& grid,
                                             std::uint64_t seed, int threads = 1);
EntropyEstimate estimate_katok_metric_entropy(const SystemModel& system,
                                              const EntropyGridSpec& grid,
                                              std::uint64_t seed, int threads = 1);
EntropyEstimate estimate_fibered_entropy(const SystemModel& system,
                                         const EntropyGridSpec& grid, int n_noise_paths,
                                         std::uint64_t seed, int threads = 1);

// Trajectory-space growth curve: points are length-n trajectory prefixes with
// independent noise; separation is sup-over-prefix distance.
struct GrowthCurve {
  EntropyGridSpec grid;
  std::vector<std::vector<double>> counts;  // [epsilon][horizon]
  std::vector<double> per_epsilon_rate;
};

GrowthCurve entropy_growth_curve(const SystemModel& system, const EntropyGridSpec& grid,
                                 std::uint64_t seed, int threads = 1);

// Least-squares slope of y against n over the last max(2, ceil(H/2)) grid
// entries; stderr is 0 when only two points are fitted.
struct SlopeFit {
  double slope = 0.0;
  double stderr_ = 0.0;
};
SlopeFit fit_top_half_slope(const std::vector<int>& horizons, const std::vector<double>& y);

}  // namespace estent
