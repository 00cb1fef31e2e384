#include "estent/systems.hpp"

#include <cmath>
#include <cstdio>

using nlohmann::json;

namespace estent {

void SystemModel::step(const double* x, const double* w, double* out) const {
  step_map(x, w, out);
  if (space == Space::torus) {
    for (int i = 0; i < state_dim; ++i) out[i] = wrap_unit(out[i]);
  }
}

void SystemModel::draw_noise(Rng& rng, double* w) const {
  switch (noise.kind) {
    case NoiseKind::none:
      return;
    case NoiseKind::gaussian: {
      std::normal_distribution<double> dist(0.0, std::sqrt(noise.sigma2));
      for (int i = 0; i < noise_dim; ++i) w[i] = dist(rng);
      return;
    }
    case NoiseKind::uniform: {
      std::uniform_real_distribution<double> dist(0.0, noise.width);
      for (int i = 0; i < noise_dim; ++i) w[i] = dist(rng);
      return;
    }
    case NoiseKind::finite: {
      if (noise.pmf.empty()) {
        std::uniform_int_distribution<std::size_t> dist(0, noise.support.size() - 1);
        for (int i = 0; i < noise_dim; ++i) w[i] = noise.support[dist(rng)];
      } else {
        std::discrete_distribution<std::size_t> dist(noise.pmf.begin(), noise.pmf.end());
        for (int i = 0; i < noise_dim; ++i) w[i] = noise.support[dist(rng)];
      }
      return;
    }
  }
}

State SystemModel::initial(Rng& rng) const {
  State x(state_dim);
  initial_sampler(rng, x.data());
  if (space == Space::torus) {
    for (double& v : x) v = wrap_unit(v);
  }
  return x;
}

double SystemModel::metric(const double* a, const double* b) const {
  double best = 0.0;
  for (int i = 0; i < state_dim; ++i) {
    double d = std::fabs(a[i] - b[i]);
    if (space == Space::torus) {
      d = wrap_unit(d);
      d = std::min(d, 1.0 - d);
    }
    if (d > best) best = d;
  }
  return best;
}

double SystemModel::metric(const State& a, const State& b) const {
  if (static_cast<int>(a.size()) != state_dim || static_cast<int>(b.size()) != state_dim)
    throw config_error("metric: state dimension mismatch");
  return metric(a.data(), b.data());
}

TrajectoryBlock simulate(const SystemModel& system, int horizon, std::uint64_t seed) {
  if (horizon < 1) throw config_error("simulate: horizon must be >= 1");
  TrajectoryBlock block;
  block.dim = system.state_dim;
  block.horizon = horizon;
  block.seed = seed;
  block.noise_dim = system.noise_dim;
  block.states.resize(static_cast<std::size_t>(horizon) * system.state_dim);
  if (system.noise_dim > 0 && horizon > 1)
    block.noise.resize(static_cast<std::size_t>(horizon - 1) * system.noise_dim);

  Rng rng = make_rng(seed, 0);
  State x0 = system.initial(rng);
  std::copy(x0.begin(), x0.end(), block.states.begin());
  for (int t = 0; t + 1 < horizon; ++t) {
    double* w = system.noise_dim > 0
                    ? &block.noise[static_cast<std::size_t>(t) * system.noise_dim]
                    : nullptr;
    if (w) system.draw_noise(rng, w);
    const double* xt = block.state(t);
    double* xn = &block.states[static_cast<std::size_t>(t + 1) * system.state_dim];
    system.step(xt, w, xn);
    for (int i = 0; i < system.state_dim; ++i) {
      if (!std::isfinite(xn[i])) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "simulate: state coordinate %d non-finite at step %d", i, t + 1);
        throw overflow_error(buf);
      }
    }
  }
  return block;
}

double orbit_distance(const SystemModel& system, const State& x, const State& y, int n,
                      const std::vector<double>& noise_path) {
  if (n < 1) throw config_error("orbit_distance: n must be >= 1");
  if (static_cast<int>(x.size()) != system.state_dim ||
      static_cast<int>(y.size()) != system.state_dim)
    throw config_error("orbit_distance: state dimension mismatch");
  if (!system.deterministic() &&
      static_cast<int>(noise_path.size()) < (n - 1) * system.noise_dim)
    throw config_error("orbit_distance: noise_path too short for n");

  State a = x, b = y, na(system.state_dim), nb(system.state_dim);
  double best = system.metric(a, b);
  for (int i = 1; i < n; ++i) {
    const double* w = system.noise_dim > 0
                          ? &noise_path[static_cast<std::size_t>(i - 1) * system.noise_dim]
                          : nullptr;
    system.step(a.data(), w, na.data());
    system.step(b.data(), w, nb.data());
    a.swap(na);
    b.swap(nb);
    best = std::max(best, system.metric(a, b));
  }
  return best;
}

namespace {

NoiseSpec parse_noise(const json& spec, const std::string& where) {
  NoiseSpec out;
  if (spec.is_null()) return out;
  if (!spec.is_object()) throw config_error(where + ": noise spec must be an object");
  std::string kind = spec.value("kind", "none");
  if (kind == "none") {
    out.kind = NoiseKind::none;
  } else if (kind == "gaussian") {
    out.kind = NoiseKind::gaussian;
    out.sigma2 = spec.value("sigma2", 1.0);
    if (!(out.sigma2 > 0)) throw config_error(where + ": gaussian sigma2 must be positive");
  } else if (kind == "uniform") {
    out.kind = NoiseKind::uniform;
    out.width = spec.value("width", 1.0);
    if (!(out.width > 0)) throw config_error(where + ": uniform width must be positive");
  } else if (kind == "finite") {
    out.kind = NoiseKind::finite;
    if (!spec.contains("support") || !spec["support"].is_array() || spec["support"].empty())
      throw config_error(where + ": finite noise requires a nonempty support array");
    out.support = spec["support"].get<std::vector<double>>();
    if (spec.contains("pmf")) {
      out.pmf = spec["pmf"].get<std::vector<double>>();
      if (out.pmf.size() != out.support.size())
        throw config_error(where + ": pmf length must match support length");
      double total = 0;
      for (double p : out.pmf) {
        if (p < 0) throw config_error(where + ": pmf entries must be nonnegative");
        total += p;
      }
      if (std::fabs(total - 1.0) > 1e-9)
        throw config_error(where + ": pmf must sum to 1");
    }
  } else {
    throw config_error(where + ": unknown noise kind '" + kind + "'");
  }
  return out;
}

std::function<void(Rng&, double*)> fixed_initial(State x0) {
  return [x0 = std::move(x0)](Rng&, double* out) {
    std::copy(x0.begin(), x0.end(), out);
  };
}

std::function<void(Rng&, double*)> uniform_initial(int dim, double lo, double hi) {
  return [dim, lo, hi](Rng& rng, double* out) {
    std::uniform_real_distribution<double> dist(lo, hi);
    for (int i = 0; i < dim; ++i) out[i] = dist(rng);
  };
}

State read_state(const json& v, int dim, const std::string& where) {
  State x;
  if (v.is_number()) {
    x.assign(1, v.get<double>());
  } else if (v.is_array()) {
    x = v.get<std::vector<double>>();
  } else {
    throw config_error(where + ": x0 must be a number or an array");
  }
  if (static_cast<int>(x.size()) != dim)
    throw config_error(where + ": x0 has wrong dimension");
  return x;
}

void apply_x0(SystemModel& sys, const json& params, const std::string& where) {
  if (params.contains("x0"))
    sys.initial_sampler = fixed_initial(read_state(params["x0"], sys.state_dim, where));
}

}  // namespace

SystemModel make_system(const std::string& name, const json& raw_params) {
  if (!raw_params.is_object() && !raw_params.is_null())
    throw config_error("catalog: params must be a JSON object");
  const json params = raw_params.is_null() ? json::object() : raw_params;
  SystemModel sys;
  sys.name = name;

  if (name == "doubling") {
    sys.state_dim = 1;
    sys.space = Space::torus;
    sys.step_map = [](const double* x, const double*, double* out) { out[0] = 2.0 * x[0]; };
    sys.initial_sampler = uniform_initial(1, 0.0, 1.0);
    apply_x0(sys, params, "doubling");
    return sys;
  }

  if (name == "cat_map") {
    sys.state_dim = 2;
    sys.space = Space::torus;
    sys.step_map = [](const double* x, const double*, double* out) {
      out[0] = 2.0 * x[0] + x[1];
      out[1] = x[0] + x[1];
    };
    sys.initial_sampler = uniform_initial(2, 0.0, 1.0);
    apply_x0(sys, params, "cat_map");
    return sys;
  }

  if (name == "rotation_noise") {
    sys.state_dim = 1;
    sys.space = Space::torus;
    double alpha = params.value("alpha", 0.0);
    // The default is the additive-noise circle rotation with Lebesgue noise.
    sys.noise = params.contains("noise")
                    ? parse_noise(params["noise"], "rotation_noise")
                    : NoiseSpec{NoiseKind::uniform, 1.0, 1.0, {}, {}};
    sys.noise_dim = sys.noise.kind == NoiseKind::none ? 0 : 1;
    sys.additive = sys.noise_dim > 0;
    sys.step_map = [alpha](const double* x, const double* w, double* out) {
      out[0] = x[0] + alpha + (w ? w[0] : 0.0);
    };
    sys.initial_sampler = uniform_initial(1, 0.0, 1.0);
    apply_x0(sys, params, "rotation_noise");
    return sys;
  }

  if (name == "linear") {
    if (!params.contains("A") || !params["A"].is_array() || params["A"].empty())
      throw config_error("linear: requires matrix A as an array of rows");
    const json& A = params["A"];
    int n = static_cast<int>(A.size());
    sys.state_dim = n;
    sys.space = Space::euclidean;
    sys.linear_matrix.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
      if (!A[i].is_array() || static_cast<int>(A[i].size()) != n)
        throw config_error("linear: A must be square");
      for (int j = 0; j < n; ++j) sys.linear_matrix[static_cast<std::size_t>(i) * n + j] = A[i][j].get<double>();
    }
    sys.noise = params.contains("noise") ? parse_noise(params["noise"], "linear") : NoiseSpec{};
    sys.noise_dim = sys.noise.kind == NoiseKind::none ? 0 : n;
    sys.additive = sys.noise_dim > 0;
    std::vector<double> mat = sys.linear_matrix;
    sys.step_map = [mat, n](const double* x, const double* w, double* out) {
      for (int i = 0; i < n; ++i) {
        double acc = 0;
        for (int j = 0; j < n; ++j) acc += mat[static_cast<std::size_t>(i) * n + j] * x[j];
        out[i] = acc + (w ? w[i] : 0.0);
      }
    };
    double hw = params.value("x0_halfwidth", 1.0);
    if (!(hw >= 0)) throw config_error("linear: x0_halfwidth must be nonnegative");
    sys.initial_sampler = uniform_initial(n, -hw, hw);
    apply_x0(sys, params, "linear");
    return sys;
  }

  if (name == "ar_gaussian") {
    if (!params.contains("a") || !params["a"].is_array() || params["a"].empty())
      throw config_error("ar_gaussian: requires coefficient array a");
    std::vector<double> a = params["a"].get<std::vector<double>>();
    int m = static_cast<int>(a.size());
    double sigma2 = params.value("sigma2", 1.0);
    if (!(sigma2 > 0)) throw config_error("ar_gaussian: sigma2 must be positive");
    sys.state_dim = m;
    sys.space = Space::euclidean;
    sys.noise = NoiseSpec{NoiseKind::gaussian, sigma2, 1.0, {}, {}};
    sys.noise_dim = 1;  // the innovation enters the first companion coordinate only
    sys.additive = true;
    // Companion form: state (x_t, ..., x_{t-m+1}); x_{t+1} = -sum a_k x_{t+1-k} + w.
    sys.linear_matrix.assign(static_cast<std::size_t>(m) * m, 0.0);
    for (int k = 0; k < m; ++k) sys.linear_matrix[static_cast<std::size_t>(k)] = -a[k];
    for (int i = 1; i < m; ++i) sys.linear_matrix[static_cast<std::size_t>(i) * m + (i - 1)] = 1.0;
    sys.step_map = [a, m](const double* x, const double* w, double* out) {
      double acc = w ? w[0] : 0.0;
      for (int k = 0; k < m; ++k) acc -= a[k] * x[k];
      // shift history before overwriting out[0] (out may alias nothing; still
      // compute from x only)
      for (int i = m - 1; i >= 1; --i) out[i] = x[i - 1];
      out[0] = acc;
    };
    sys.initial_sampler = fixed_initial(State(m, 0.0));
    apply_x0(sys, params, "ar_gaussian");
    return sys;
  }

  if (name == "additive_nonlinear") {
    sys.state_dim = 1;
    sys.space = Space::euclidean;
    double a = params.value("a", 1.0);
    double b = params.value("b", 1.0);
    sys.noise = params.contains("noise")
                    ? parse_noise(params["noise"], "additive_nonlinear")
                    : NoiseSpec{NoiseKind::gaussian, 1.0, 1.0, {}, {}};
    sys.noise_dim = sys.noise.kind == NoiseKind::none ? 0 : 1;
    sys.additive = sys.noise_dim > 0;
    sys.step_map = [a, b](const double* x, const double* w, double* out) {
      out[0] = a * std::tanh(b * x[0]) + (w ? w[0] : 0.0);
    };
    sys.initial_sampler = uniform_initial(1, -1.0, 1.0);
    apply_x0(sys, params, "additive_nonlinear");
    return sys;
  }

  throw config_error("catalog: unknown system name '" + name + "'");
}

}  // namespace estent
