#include "estent/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace estent {

namespace {

// Cell hash for the time-t_begin slice. Any pair at slice distance <= eps is
// guaranteed to land in neighboring cells, so the greedy scan only has to
// Bowen-check those; everything else is already separated at t_begin. Hash
// collisions merely add candidates (the Bowen check decides), never drop any.
struct SliceHash {
  double cell_width;
  long torus_cells;  // 0 for euclidean
  int dim;
  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> buckets;

  SliceHash(double eps, Space space, int dim_, std::size_t expected) : dim(dim_) {
    if (space == Space::torus) {
      torus_cells = std::max(1L, static_cast<long>(std::floor(1.0 / eps)));
      cell_width = 1.0 / static_cast<double>(torus_cells);
    } else {
      torus_cells = 0;
      cell_width = eps;
    }
    buckets.reserve(expected);
  }

  long cell_of(double v) const {
    long c = static_cast<long>(std::floor(v / cell_width));
    if (torus_cells > 0) {
      c %= torus_cells;
      if (c < 0) c += torus_cells;
    }
    return c;
  }

  static std::uint64_t mix(std::uint64_t h, long c) {
    h ^= static_cast<std::uint64_t>(c) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    return h;
  }

  std::uint64_t key_of_cells(const long* cells) const {
    std::uint64_t h = 0x243F6A8885A308D3ULL;
    for (int i = 0; i < dim; ++i) h = mix(h, cells[i]);
    return h;
  }

  void insert(const double* x, std::int32_t id) {
    long cells[8];
    for (int i = 0; i < dim; ++i) cells[i] = cell_of(x[i]);
    buckets[key_of_cells(cells)].push_back(id);
  }

  // Collects kept-point ids from all cells within one step of x's cell in
  // every coordinate (wrapping on the torus), sorted ascending and deduped.
  void neighbors(const double* x, std::vector<std::int32_t>& out) const {
    out.clear();
    long base[8];
    for (int i = 0; i < dim; ++i) base[i] = cell_of(x[i]);
    long cells[8];
    int combos = 1;
    for (int i = 0; i < dim; ++i) combos *= 3;
    for (int c = 0; c < combos; ++c) {
      int rem = c;
      for (int i = 0; i < dim; ++i) {
        long off = rem % 3 - 1;
        rem /= 3;
        long v = base[i] + off;
        if (torus_cells > 0) {
          v %= torus_cells;
          if (v < 0) v += torus_cells;
        }
        cells[i] = v;
      }
      auto it = buckets.find(key_of_cells(cells));
      if (it == buckets.end()) continue;
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
};

inline double slice_distance(const double* a, const double* b, int dim, Space space) {
  double best = 0.0;
  for (int i = 0; i < dim; ++i) {
    double d = std::fabs(a[i] - b[i]);
    if (space == Space::torus) {
      d = wrap_unit(d);
      d = std::min(d, 1.0 - d);
    }
    if (d > best) best = d;
  }
  return best;
}

// Bowen distance over the window, with early exit once > eps is witnessed.
inline bool within_eps(const OrbitTable& o, int p, int q, int t0, int t1, double eps,
                       Space space) {
  for (int t = t0; t < t1; ++t) {
    if (slice_distance(o.at(p, t), o.at(q, t), o.dim, space) > eps) return false;
  }
  return true;
}

void validate_grid(const EntropyGridSpec& grid) {
  if (grid.epsilons.empty()) throw config_error("entropy grid: epsilons must be nonempty");
  if (grid.horizons.empty()) throw config_error("entropy grid: horizons must be nonempty");
  for (std::size_t i = 0; i < grid.epsilons.size(); ++i) {
    if (!(grid.epsilons[i] > 0)) throw config_error("entropy grid: epsilons must be positive");
    if (i > 0 && !(grid.epsilons[i] < grid.epsilons[i - 1]))
      throw config_error("entropy grid: epsilons must be strictly decreasing");
  }
  for (std::size_t i = 0; i < grid.horizons.size(); ++i) {
    if (grid.horizons[i] < 1) throw config_error("entropy grid: horizons must be >= 1");
    if (i > 0 && grid.horizons[i] <= grid.horizons[i - 1])
      throw config_error("entropy grid: horizons must be strictly increasing");
  }
  if (grid.sample_size < 1) throw config_error("entropy grid: sample_size must be >= 1");
  if (grid.offset < 0) throw config_error("entropy grid: offset must be nonnegative");
  if (grid.offset >= grid.horizons.front())
    throw config_error("entropy grid: offset must be smaller than every horizon");
  if (grid.discard_fraction < 0 || grid.discard_fraction >= 1)
    throw config_error("entropy grid: discard_fraction must lie in [0,1)");
}

std::vector<State> sample_points(const SystemModel& system, int count, Rng& rng) {
  std::vector<State> pts;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) pts.push_back(system.initial(rng));
  return pts;
}

std::vector<State> sample_uniform_torus(int dim, int count, Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<State> pts(count, State(dim));
  for (auto& p : pts)
    for (double& v : p) v = dist(rng);
  return pts;
}

// Katok-style discard: drop whole cover cells, cheapest (fewest covered
// points) first, while the cumulative number of discarded points stays within
// the budget. Returns the reduced cover size.
long reduced_cover_size(const CoverResult& cover, long discard_budget) {
  if (discard_budget <= 0) return static_cast<long>(cover.kept.size());
  std::vector<long> load(cover.kept.size(), 0);
  for (std::int32_t c : cover.cover_of) ++load[c];
  std::vector<std::size_t> order(load.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (load[a] != load[b]) return load[a] < load[b];
    return a < b;
  });
  long removed = 0, budget = discard_budget;
  for (std::size_t idx : order) {
    if (load[idx] > budget) break;
    budget -= load[idx];
    ++removed;
  }
  // keep at least one cover element
  if (removed >= static_cast<long>(cover.kept.size()))
    removed = static_cast<long>(cover.kept.size()) - 1;
  return static_cast<long>(cover.kept.size()) - removed;
}

struct CellOutputs {
  std::vector<std::vector<double>> counts, rates;
};

// Runs greedy covers for every (epsilon, horizon) cell of the grid over one
// orbit table, with optional Katok discard.
CellOutputs count_grid(const OrbitTable& orbits, const EntropyGridSpec& grid, int offset,
                       Space space, long discard_budget, int threads) {
  const std::size_t ne = grid.epsilons.size(), nh = grid.horizons.size();
  CellOutputs out;
  out.counts.assign(ne, std::vector<double>(nh, 0.0));
  out.rates.assign(ne, std::vector<double>(nh, 0.0));
  parallel_for(ne * nh, threads, [&](std::size_t cell) {
    std::size_t ei = cell / nh, ni = cell % nh;
    int n = grid.horizons[ni];
    double eps = grid.epsilons[ei];
    CoverResult c = greedy_cover(orbits, offset, n, eps, space);
    long cnt = discard_budget > 0 ? reduced_cover_size(c, discard_budget)
                                  : static_cast<long>(c.kept.size());
    out.counts[ei][ni] = static_cast<double>(cnt);
    out.rates[ei][ni] = std::log2(static_cast<double>(cnt)) / n;
  });
  return out;
}

void fit_rates(EntropyEstimate& est) {
  const auto& grid = est.grid;
  est.per_epsilon_rate.resize(grid.epsilons.size());
  est.per_epsilon_stderr.resize(grid.epsilons.size());
  for (std::size_t ei = 0; ei < grid.epsilons.size(); ++ei) {
    std::vector<double> y(grid.horizons.size());
    for (std::size_t ni = 0; ni < y.size(); ++ni) y[ni] = std::log2(est.counts[ei][ni]);
    SlopeFit fit = fit_top_half_slope(grid.horizons, y);
    est.per_epsilon_rate[ei] = fit.slope;
    est.per_epsilon_stderr[ei] = fit.stderr_;
  }
  est.extrapolated_rate = est.per_epsilon_rate.back();
}

}  // namespace

SlopeFit fit_top_half_slope(const std::vector<int>& horizons, const std::vector<double>& y) {
  const std::size_t H = horizons.size();
  if (H == 1) return {y[0] / horizons[0], 0.0};
  std::size_t w = std::max<std::size_t>(2, (H + 1) / 2);
  std::size_t start = H - w;
  double nbar = 0, ybar = 0;
  for (std::size_t i = start; i < H; ++i) {
    nbar += horizons[i];
    ybar += y[i];
  }
  nbar /= w;
  ybar /= w;
  double sxx = 0, sxy = 0;
  for (std::size_t i = start; i < H; ++i) {
    sxx += (horizons[i] - nbar) * (horizons[i] - nbar);
    sxy += (horizons[i] - nbar) * (y[i] - ybar);
  }
  double slope = sxy / sxx;
  double rss = 0;
  for (std::size_t i = start; i < H; ++i) {
    double r = y[i] - ybar - slope * (horizons[i] - nbar);
    rss += r * r;
  }
  double se = w > 2 ? std::sqrt(rss / (w - 2) / sxx) : 0.0;
  return {slope, se};
}

OrbitTable build_orbits(const SystemModel& system, const std::vector<State>& points,
                        int steps, const std::vector<double>& noise_path) {
  if (steps < 1) throw config_error("build_orbits: steps must be >= 1");
  if (!system.deterministic() &&
      static_cast<int>(noise_path.size()) < (steps - 1) * system.noise_dim)
    throw config_error("build_orbits: noise_path too short");
  OrbitTable table;
  table.dim = system.state_dim;
  table.steps = steps;
  table.npoints = static_cast<int>(points.size());
  table.data.resize(static_cast<std::size_t>(table.npoints) * steps * table.dim);
  State cur(table.dim), nxt(table.dim);
  for (int p = 0; p < table.npoints; ++p) {
    if (static_cast<int>(points[p].size()) != table.dim)
      throw config_error("build_orbits: point dimension mismatch");
    cur = points[p];
    if (system.space == Space::torus)
      for (double& v : cur) v = wrap_unit(v);
    double* dst = &table.data[static_cast<std::size_t>(p) * steps * table.dim];
    std::copy(cur.begin(), cur.end(), dst);
    for (int t = 1; t < steps; ++t) {
      const double* w = system.noise_dim > 0
                            ? &noise_path[static_cast<std::size_t>(t - 1) * system.noise_dim]
                            : nullptr;
      system.step(cur.data(), w, nxt.data());
      cur.swap(nxt);
      std::copy(cur.begin(), cur.end(), dst + static_cast<std::size_t>(t) * table.dim);
    }
  }
  return table;
}

CoverResult greedy_cover(const OrbitTable& orbits, int t_begin, int t_end, double eps,
                         Space space) {
  if (!(eps > 0)) throw config_error("greedy_cover: epsilon must be positive");
  if (t_begin < 0 || t_begin >= t_end || t_end > orbits.steps)
    throw config_error("greedy_cover: bad time window");
  if (orbits.dim > 8) throw config_error("greedy_cover: dimension > 8 unsupported");

  CoverResult result;
  result.cover_of.resize(orbits.npoints);
  SliceHash hash(eps, space, orbits.dim, static_cast<std::size_t>(orbits.npoints) / 2 + 8);
  std::vector<std::int32_t> candidates;
  for (int p = 0; p < orbits.npoints; ++p) {
    const double* x0 = orbits.at(p, t_begin);
    hash.neighbors(x0, candidates);
    std::int32_t covered_by = -1;
    for (std::int32_t kpos : candidates) {
      int q = result.kept[kpos];
      if (within_eps(orbits, p, q, t_begin, t_end, eps, space)) {
        covered_by = kpos;
        break;
      }
    }
    if (covered_by >= 0) {
      result.cover_of[p] = covered_by;
    } else {
      result.cover_of[p] = static_cast<std::int32_t>(result.kept.size());
      hash.insert(x0, static_cast<std::int32_t>(result.kept.size()));
      result.kept.push_back(p);
    }
  }
  return result;
}

long count_separated(const SystemModel& system, const std::vector<State>& points, int n,
                     double epsilon, int offset, const std::vector<double>& noise_path) {
  if (points.empty()) throw config_error("count_separated: points must be nonempty");
  if (n < 1) throw config_error("count_separated: n must be >= 1");
  if (offset < 0 || offset >= n) throw config_error("count_separated: requires 0 <= offset < n");
  if (!(epsilon > 0)) throw config_error("count_separated: epsilon must be positive");
  if (system.deterministic() && !noise_path.empty())
    throw config_error("count_separated: noise_path given for a deterministic system");
  if (!system.deterministic() && noise_path.empty())
    throw config_error("count_separated: noisy system requires a noise_path");
  OrbitTable orbits = build_orbits(system, points, n, noise_path);
  return static_cast<long>(greedy_cover(orbits, offset, n, epsilon, system.space).kept.size());
}

long count_spanning(const SystemModel& system, const std::vector<State>& points, int n,
                    double epsilon, const std::vector<double>& noise_path) {
  // The greedy maximal separated set is the spanning witness: every rejected
  // point sits within eps of the kept point that rejected it.
  return count_separated(system, points, n, epsilon, 0, noise_path);
}

EntropyEstimate estimate_topological_entropy(const SystemModel& system,
                                             const EntropyGridSpec& grid,
                                             std::uint64_t seed, int threads) {
  validate_grid(grid);
  if (!system.deterministic())
    throw config_error(
        "estimate_topological_entropy: system is noisy; use the fibered estimator");
  Rng rng = make_rng(seed, 0);
  std::vector<State> pts = system.space == Space::torus
                               ? sample_uniform_torus(system.state_dim, grid.sample_size, rng)
                               : sample_points(system, grid.sample_size, rng);
  OrbitTable orbits = build_orbits(system, pts, grid.horizons.back());
  EntropyEstimate est;
  est.kind = EntropyKind::topological;
  est.grid = grid;
  CellOutputs cells = count_grid(orbits, grid, grid.offset, system.space, 0, threads);
  est.counts = std::move(cells.counts);
  est.rates = std::move(cells.rates);
  fit_rates(est);
  return est;
}

EntropyEstimate estimate_katok_metric_entropy(const SystemModel& system,
                                              const EntropyGridSpec& grid,
                                              std::uint64_t seed, int threads) {
  validate_grid(grid);
  if (!system.deterministic())
    throw config_error(
        "estimate_katok_metric_entropy: system is noisy; use the fibered estimator");
  if (grid.offset != 0)
    throw config_error("estimate_katok_metric_entropy: offset must be 0");
  Rng rng = make_rng(seed, 0);
  std::vector<State> pts = sample_points(system, grid.sample_size, rng);
  OrbitTable orbits = build_orbits(system, pts, grid.horizons.back());
  long budget = static_cast<long>(std::floor(grid.discard_fraction * grid.sample_size));
  EntropyEstimate est;
  est.kind = EntropyKind::katok_metric;
  est.grid = grid;
  CellOutputs cells = count_grid(orbits, grid, 0, system.space, budget, threads);
  est.counts = std::move(cells.counts);
  est.rates = std::move(cells.rates);
  fit_rates(est);
  return est;
}

EntropyEstimate estimate_fibered_entropy(const SystemModel& system,
                                         const EntropyGridSpec& grid, int n_noise_paths,
                                         std::uint64_t seed, int threads) {
  validate_grid(grid);
  if (system.deterministic())
    throw config_error(
        "estimate_fibered_entropy: system is deterministic; use the non-fibered estimators");
  if (grid.offset != 0)
    throw config_error("estimate_fibered_entropy: offset must be 0");
  if (n_noise_paths < 1)
    throw config_error("estimate_fibered_entropy: n_noise_paths must be >= 1");

  Rng rng = make_rng(seed, 0);
  std::vector<State> pts = sample_points(system, grid.sample_size, rng);
  long budget = static_cast<long>(std::floor(grid.discard_fraction * grid.sample_size));
  const int max_h = grid.horizons.back();
  const std::size_t ne = grid.epsilons.size(), nh = grid.horizons.size();

  EntropyEstimate est;
  est.kind = EntropyKind::fibered;
  est.grid = grid;
  est.counts.assign(ne, std::vector<double>(nh, 0.0));
  est.rates.assign(ne, std::vector<double>(nh, 0.0));
  est.per_epsilon_rate.assign(ne, 0.0);
  est.per_epsilon_stderr.assign(ne, 0.0);
  est.path_rates.resize(n_noise_paths);

  std::vector<CellOutputs> per_path(n_noise_paths);
  parallel_for(n_noise_paths, threads, [&](std::size_t j) {
    Rng prng = make_rng(seed, 1 + j);
    std::vector<double> path(static_cast<std::size_t>(max_h - 1) * system.noise_dim);
    for (int t = 0; t + 1 < max_h; ++t)
      system.draw_noise(prng, &path[static_cast<std::size_t>(t) * system.noise_dim]);
    OrbitTable orbits = build_orbits(system, pts, max_h, path);
    per_path[j] = count_grid(orbits, grid, 0, system.space, budget, 1);
  });

  for (int j = 0; j < n_noise_paths; ++j) {
    EntropyEstimate tmp;
    tmp.grid = grid;
    tmp.counts = per_path[j].counts;
    fit_rates(tmp);
    est.path_rates[j] = tmp.extrapolated_rate;
    for (std::size_t ei = 0; ei < ne; ++ei) {
      est.per_epsilon_rate[ei] += tmp.per_epsilon_rate[ei] / n_noise_paths;
      est.per_epsilon_stderr[ei] += tmp.per_epsilon_stderr[ei] / n_noise_paths;
      for (std::size_t ni = 0; ni < nh; ++ni) {
        est.counts[ei][ni] += per_path[j].counts[ei][ni] / n_noise_paths;
        est.rates[ei][ni] += per_path[j].rates[ei][ni] / n_noise_paths;
      }
    }
  }
  double mean = std::accumulate(est.path_rates.begin(), est.path_rates.end(), 0.0) /
                n_noise_paths;
  est.extrapolated_rate = mean;
  if (n_noise_paths > 1) {
    double ss = 0;
    for (double r : est.path_rates) ss += (r - mean) * (r - mean);
    est.rate_spread = std::sqrt(ss / (n_noise_paths - 1));
  }
  return est;
}

GrowthCurve entropy_growth_curve(const SystemModel& system, const EntropyGridSpec& grid,
                                 std::uint64_t seed, int threads) {
  validate_grid(grid);
  if (system.deterministic())
    throw config_error("entropy_growth_curve: system is deterministic");
  if (grid.offset != 0) throw config_error("entropy_growth_curve: offset must be 0");

  const int max_h = grid.horizons.back();
  // Each point is a full trajectory with its own independent noise stream.
  OrbitTable table;
  table.dim = system.state_dim;
  table.steps = max_h;
  table.npoints = grid.sample_size;
  table.data.resize(static_cast<std::size_t>(table.npoints) * max_h * table.dim);
  parallel_for(grid.sample_size, threads, [&](std::size_t p) {
    Rng rng = make_rng(seed, p);
    State cur = system.initial(rng), nxt(table.dim);
    std::vector<double> w(std::max(1, system.noise_dim));
    double* dst = &table.data[p * static_cast<std::size_t>(max_h) * table.dim];
    std::copy(cur.begin(), cur.end(), dst);
    for (int t = 1; t < max_h; ++t) {
      system.draw_noise(rng, w.data());
      system.step(cur.data(), w.data(), nxt.data());
      cur.swap(nxt);
      std::copy(cur.begin(), cur.end(), dst + static_cast<std::size_t>(t) * table.dim);
    }
  });

  GrowthCurve curve;
  curve.grid = grid;
  CellOutputs cells = count_grid(table, grid, 0, system.space, 0, threads);
  curve.counts = std::move(cells.counts);
  curve.per_epsilon_rate.resize(grid.epsilons.size());
  for (std::size_t ei = 0; ei < grid.epsilons.size(); ++ei) {
    std::vector<double> y(grid.horizons.size());
    for (std::size_t ni = 0; ni < y.size(); ++ni) y[ni] = std::log2(curve.counts[ei][ni]);
    curve.per_epsilon_rate[ei] = fit_top_half_slope(grid.horizons, y).slope;
  }
  return curve;
}

}  // namespace estent
