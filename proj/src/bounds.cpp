#include "estent/bounds.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace estent {

namespace {

constexpr double kPi = 3.14159265358979323846;

double two_pi_e() { return 2.0 * kPi * std::exp(1.0); }

double gl_formula(const char* what, double norm_value, int N, double epsilon,
                  double K2) {
  if (N <= 0) throw config_error(std::string(what) + ": N must be positive");
  if (!(norm_value > 0.0) || !(epsilon > 0.0) || !(K2 > 0.0))
    throw config_error(std::string(what) +
                       ": norm, epsilon, and K2 must be positive");
  return 0.5 * N * std::log2(K2 * norm_value / epsilon);
}

}  // namespace

std::string bound_kind_name(BoundKind kind) {
  switch (kind) {
    case BoundKind::ha: return "ha";
    case BoundKind::ar_rd: return "ar_rd";
    case BoundKind::shannon_lb: return "shannon_lb";
    case BoundKind::gl_upper: return "gl_upper";
    case BoundKind::gl_lower: return "gl_lower";
    case BoundKind::zoom_upper: return "zoom_upper";
  }
  throw config_error("bound_kind_name: unknown kind");
}

nlohmann::json report_json(const BoundReport& report) {
  if (!std::isfinite(report.value_bits))
    throw invariant_error("report_json: bound value is not finite");
  nlohmann::json j;
  j["kind"] = bound_kind_name(report.kind);
  j["value_bits"] = report.value_bits;
  j["params"] = report.params.is_null() ? nlohmann::json::object() : report.params;
  if (!report.details.is_null()) j["details"] = report.details;
  return j;
}

double linear_entropy(const std::vector<std::complex<double>>& eigenvalues,
                      const std::vector<int>& multiplicities) {
  if (eigenvalues.size() != multiplicities.size())
    throw config_error("linear_entropy: eigenvalue and multiplicity counts differ");
  double total = 0.0;
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    if (multiplicities[i] <= 0)
      throw config_error("linear_entropy: multiplicities must be positive");
    double mag = std::abs(eigenvalues[i]);
    if (mag > 1.0) total += multiplicities[i] * std::log2(mag);
  }
  return total;
}

double zoom_capacity_upper(const std::vector<std::complex<double>>& eigenvalues) {
  double total = 0.0;
  for (const auto& lam : eigenvalues) {
    double mag = std::abs(lam);
    if (mag > 1.0) total += std::log2(std::ceil(mag));
  }
  return total;
}

ArRdResult ar_rate_distortion(const std::vector<double>& a_coeffs, double sigma2,
                              double theta, int quadrature_points) {
  if (!(sigma2 > 0.0))
    throw config_error("ar_rate_distortion: sigma2 must be positive");
  if (!(theta > 0.0))
    throw config_error("ar_rate_distortion: theta must be positive");
  if (quadrature_points < 512)
    throw config_error("ar_rate_distortion: need at least 512 quadrature points");

  const int m = static_cast<int>(a_coeffs.size());
  ArRdResult out;

  if (m > 0) {
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) comp(0, k) = -a_coeffs[k];
    for (int k = 1; k < m; ++k) comp(k, k - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(comp, false);
    if (solver.info() != Eigen::Success)
      throw invariant_error("ar_rate_distortion: root computation did not converge");
    for (int k = 0; k < m; ++k) {
      std::complex<double> rho(solver.eigenvalues()[k].real(),
                               solver.eigenvalues()[k].imag());
      out.roots.push_back(rho);
      double mag = std::abs(rho);
      if (std::fabs(mag - 1.0) < 1e-8) out.boundary_roots = true;
      if (mag > 1.0) out.correction_bits += std::log2(mag);
    }
  }

  // Composite trapezoid over [-pi, pi]. The spectral density of the process
  // is 1/g with g(w) = |1 + sum a_k e^{-ikw}|^2 / sigma2; the min/max branch
  // switch at theta*g = 1 is the waterfilling level.
  const int nodes = quadrature_points;
  const double h = 2.0 * kPi / (nodes - 1);
  double d_acc = 0.0;
  double r_acc = 0.0;
  for (int j = 0; j < nodes; ++j) {
    double w = -kPi + j * h;
    std::complex<double> hz(1.0, 0.0);
    for (int k = 1; k <= m; ++k)
      hz += a_coeffs[k - 1] * std::exp(std::complex<double>(0.0, -k * w));
    double g = std::norm(hz) / sigma2;
    double weight = (j == 0 || j == nodes - 1) ? 0.5 : 1.0;
    d_acc += weight * std::min(theta, 1.0 / g);
    r_acc += weight * std::max(0.0, 0.5 * std::log2(1.0 / (theta * g)));
  }
  out.distortion = d_acc * h / (2.0 * kPi);
  out.rate_bits = r_acc * h / (2.0 * kPi) + out.correction_bits;
  return out;
}

std::vector<ArRdCurvePoint> ar_rd_curve(const std::vector<double>& a_coeffs,
                                        double sigma2, double theta_min,
                                        double theta_max, int num_points,
                                        int quadrature_points) {
  if (num_points < 2) throw config_error("ar_rd_curve: need at least 2 grid points");
  if (!(theta_min > 0.0) || !(theta_max > theta_min))
    throw config_error("ar_rd_curve: need 0 < theta_min < theta_max");
  std::vector<ArRdCurvePoint> curve;
  curve.reserve(num_points);
  const double lmin = std::log(theta_min);
  const double lmax = std::log(theta_max);
  for (int i = 0; i < num_points; ++i) {
    double theta = std::exp(lmin + (lmax - lmin) * i / (num_points - 1));
    ArRdResult r = ar_rate_distortion(a_coeffs, sigma2, theta, quadrature_points);
    curve.push_back({theta, r.distortion, r.rate_bits, r.correction_bits});
  }
  return curve;
}

double shannon_lower_bound(double entropy_rate_bits, int N, double epsilon) {
  if (N <= 0) throw config_error("shannon_lower_bound: N must be positive");
  if (!(epsilon > 0.0))
    throw config_error("shannon_lower_bound: epsilon must be positive");
  return entropy_rate_bits - 0.5 * N * std::log2(two_pi_e() * epsilon);
}

double conditional_entropy_rate(const SystemModel& system) {
  if (!system.additive || system.noise_dim <= 0)
    throw config_error(
        "conditional_entropy_rate: closed form needs an additive disturbance; "
        "supply the entropy rate directly otherwise");
  switch (system.noise.kind) {
    case NoiseKind::gaussian:
      return 0.5 * system.noise_dim * std::log2(two_pi_e() * system.noise.sigma2);
    case NoiseKind::uniform:
      return system.noise_dim * std::log2(system.noise.width);
    default:
      throw config_error(
          "conditional_entropy_rate: noise kind has no differential entropy in "
          "closed form; supply the entropy rate directly");
  }
}

double density_norm(const std::function<double(const double*)>& density, int k,
                    const std::vector<std::pair<double, double>>& integration_box,
                    int quadrature_points) {
  if (k <= 0 || static_cast<int>(integration_box.size()) != k)
    throw config_error(
        "density_norm: integration box must list one interval per coordinate");
  if (quadrature_points < 2)
    throw config_error("density_norm: need at least 2 quadrature points");
  for (const auto& [lo, hi] : integration_box)
    if (!(hi > lo)) throw config_error("density_norm: empty integration interval");

  const double exponent = static_cast<double>(k) / (k + 2);
  std::vector<double> step(k);
  for (int d = 0; d < k; ++d)
    step[d] = (integration_box[d].second - integration_box[d].first) /
              (quadrature_points - 1);

  std::vector<int> idx(k, 0);
  std::vector<double> x(k);
  double mass = 0.0;
  double frac = 0.0;
  while (true) {
    double weight = 1.0;
    for (int d = 0; d < k; ++d) {
      x[d] = integration_box[d].first + idx[d] * step[d];
      weight *=
          ((idx[d] == 0 || idx[d] == quadrature_points - 1) ? 0.5 : 1.0) * step[d];
    }
    double p = density(x.data());
    if (!(p >= 0.0))
      throw config_error("density_norm: density returned a negative value");
    mass += weight * p;
    frac += weight * std::pow(p, exponent);
    int d = 0;  // odometer over the grid
    while (d < k && ++idx[d] == quadrature_points) {
      idx[d] = 0;
      ++d;
    }
    if (d == k) break;
  }
  if (std::fabs(mass - 1.0) > 1e-3)
    throw config_error("density_norm: density does not integrate to 1 over the box");
  return std::pow(frac, 1.0 / exponent);
}

double gl_capacity_upper(double density_norm_value, int N, double epsilon,
                         double K2) {
  return gl_formula("gl_capacity_upper", density_norm_value, N, epsilon, K2);
}

double gl_capacity_lower(double noise_density_norm, int N, double epsilon,
                         double K2) {
  return gl_formula("gl_capacity_lower", noise_density_norm, N, epsilon, K2);
}

}  // namespace estent
