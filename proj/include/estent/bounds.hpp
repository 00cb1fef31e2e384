#pragma once
// Capacity and rate bounds for linear and autoregressive models: spectral
// log-sum entropy, reverse-waterfilling rate-distortion with the unstable-root
// correction, the Shannon lower bound, and quantization-theoretic bounds.
// Every value is in bits (all logs base 2).

#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "estent/common.hpp"
#include "estent/systems.hpp"

namespace estent {

enum class BoundKind { ha, ar_rd, shannon_lb, gl_upper, gl_lower, zoom_upper };

std::string bound_kind_name(BoundKind kind);

struct BoundReport {
  BoundKind kind = BoundKind::ha;
  double value_bits = 0.0;
  nlohmann::json params;   // echoes every input the bound used
  nlohmann::json details;  // optional curve or per-root data
};

nlohmann::json report_json(const BoundReport& report);

// Sum over the spectrum of max(0, multiplicity * log2|lambda|).
double linear_entropy(const std::vector<std::complex<double>>& eigenvalues,
                      const std::vector<int>& multiplicities);

// Sum of log2(ceil(|lambda|)) over eigenvalues outside the closed unit disk.
double zoom_capacity_upper(const std::vector<std::complex<double>>& eigenvalues);

struct ArRdResult {
  double distortion = 0.0;       // D at the water level theta
  double rate_bits = 0.0;        // R(D) per step, correction included
  double correction_bits = 0.0;  // unstable-root term alone
  std::vector<std::complex<double>> roots;  // characteristic roots rho_k
  bool boundary_roots = false;  // some |rho_k| within 1e-8 of the unit circle
};

// Reverse waterfilling for the AR(m) process x_t + sum_k a_k x_{t-k} = w_t
// driven by white noise of variance sigma2. Integrals use the composite
// trapezoid rule over [-pi, pi]; roots come from the companion matrix of
// z^m + a_1 z^{m-1} + ... + a_m.
ArRdResult ar_rate_distortion(const std::vector<double>& a_coeffs, double sigma2,
                              double theta, int quadrature_points = 8192);

struct ArRdCurvePoint {
  double theta = 0.0;
  double distortion = 0.0;
  double rate_bits = 0.0;
  double correction_bits = 0.0;
};

// Sweeps theta over a log-spaced grid, endpoints included.
std::vector<ArRdCurvePoint> ar_rd_curve(const std::vector<double>& a_coeffs,
                                        double sigma2, double theta_min,
                                        double theta_max, int num_points,
                                        int quadrature_points = 8192);

// entropy_rate_bits - (N/2) log2(2 pi e epsilon); may be negative.
double shannon_lower_bound(double entropy_rate_bits, int N, double epsilon);

// Closed-form differential entropy rate of the additive disturbance.
double conditional_entropy_rate(const SystemModel& system);

// (integral of p^{k/(k+2)})^{(k+2)/k} by tensor-product trapezoid quadrature
// with quadrature_points nodes per coordinate. The density must integrate to
// 1 over the box within 1e-3.
double density_norm(const std::function<double(const double*)>& density, int k,
                    const std::vector<std::pair<double, double>>& integration_box,
                    int quadrature_points = 8192);

// (N/2) log2(K2 * norm / epsilon). The upper form takes the state density
// norm; the lower form takes the noise density norm and is read as an
// impossibility threshold. Scalar K2 = 1/12; no closed form is known for
// higher dimensions, so K2 stays an input.
double gl_capacity_upper(double density_norm_value, int N, double epsilon,
                         double K2 = 1.0 / 12.0);
double gl_capacity_lower(double noise_density_norm, int N, double epsilon,
                         double K2 = 1.0 / 12.0);

}  // namespace estent
