#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "flbo/operators.hpp"

namespace flbo {

/// k smallest eigenpairs of -W phi = lambda S phi, S-orthonormal, ascending.
struct SpectralBasis {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // n x k, column j is phi_j
  Eigen::VectorXd mass;
  double lambda_max_estimate = 0.0;  // upper bound on the whole spectrum

  int size() const { return static_cast<int>(eigenvalues.size()); }
  int num_vertices() const { return static_cast<int>(mass.size()); }
  /// S-weighted coefficients Phi^T S f.
  Eigen::VectorXd project(const Eigen::VectorXd& f) const;
};

struct EigensolveOptions {
  std::uint64_t seed = 0;
  /// Dense solve when n is at most this, or when k > n / 2.
  int dense_threshold = 500;
  /// Residual tolerance relative to lambda_max.
  double tolerance = 1e-9;
  /// Cap on total Krylov steps is max(iteration_factor * k, 400).
  int iteration_factor = 30;
};

struct EigensolveStats {
  bool dense = false;
  int lanczos_steps = 0;
  int restarts = 0;
  double max_residual = 0.0;  // max |A v - lambda v| / lambda_max over returned pairs
};

SpectralBasis eigensolve(const OperatorPair& pair, int k, const EigensolveOptions& options = {},
                         EigensolveStats* stats = nullptr);

/// Largest eigenvalue of S^{-1/2}(-W)S^{-1/2} from a short Krylov (power-type)
/// iteration, inflated by 1%.
double estimate_lambda_max(const OperatorPair& pair, std::uint64_t seed = 0);

/// h_t(x, .) truncated to the basis.
Eigen::VectorXd heat_kernel(const SpectralBasis& basis, double t, int x);

/// Time-averaged kernel int_0^t h_{t-s}(x, .) ds with weights (1 - e^{-t lambda}) / lambda,
/// or t for eigenvalues below 1e-12 * lambda_max.
Eigen::VectorXd time_averaged_heat_kernel(const SpectralBasis& basis, double t, int x);
/// The per-eigenvalue weights used above.
Eigen::VectorXd time_averaged_weights(const SpectralBasis& basis, double t);

/// Phi e^{-t Lambda} Phi^T S f0.
Eigen::VectorXd heat_propagate(const SpectralBasis& basis, const Eigen::VectorXd& f0, double t);

struct FilterSpec {
  std::vector<double> coeffs;  // c_0 .. c_{S-1}

  int order() const { return static_cast<int>(coeffs.size()); }
  void validate() const;
};

/// sum_s c_s T_s(x) by the three-term recurrence.
template <typename Scalar>
Scalar chebyshev_eval(std::span<const double> coeffs, Scalar x) {
  if (coeffs.empty()) return Scalar(0);
  Scalar t_prev = Scalar(1);
  Scalar t_curr = x;
  Scalar sum = Scalar(coeffs[0]) * t_prev;
  if (coeffs.size() > 1) sum += Scalar(coeffs[1]) * t_curr;
  for (size_t s = 2; s < coeffs.size(); ++s) {
    const Scalar t_next = Scalar(2) * x * t_curr - t_prev;
    sum += Scalar(coeffs[s]) * t_next;
    t_prev = t_curr;
    t_curr = t_next;
  }
  return sum;
}

/// Maps lambda to 2 lambda / lambda_max - 1.
inline double chebyshev_argument(double lambda, double lambda_max) { return 2.0 * lambda / lambda_max - 1.0; }

/// g(lambda_k) for every eigenvalue of the basis.
Eigen::VectorXd chebyshev_filter(const SpectralBasis& basis, const FilterSpec& spec);

/// Coefficients of the degree order-1 Chebyshev interpolant of g on [0, lambda_max]
/// at Chebyshev-Gauss nodes (the discrete least-squares projection).
FilterSpec chebyshev_fit(const std::function<double(double)>& g, int order, double lambda_max);

/// Phi (g(Lambda) .* Phi^T S f).
Eigen::VectorXd anisotropic_convolve(const SpectralBasis& basis, const Eigen::VectorXd& f, const FilterSpec& spec);

/// (pi / n) sum_theta anisotropic_convolve(basis_theta, f, spec_theta).
Eigen::VectorXd directional_sum_convolve(std::span<const SpectralBasis> bases, const Eigen::VectorXd& f,
                                         std::span<const FilterSpec> specs);

/// n x |times| matrix of sum_k e^{-t lambda_k} phi_k(x)^2.
Eigen::MatrixXd finsler_hks(const SpectralBasis& basis, std::span<const double> times);

/// `count` times log-spaced between lo and hi inclusive.
std::vector<double> log_spaced_times(double lo, double hi, int count);

}  // namespace flbo
