#include "flbo/spectral.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "flbo/error.hpp"

namespace flbo {

namespace {

void require_vertex(const SpectralBasis& basis, int x) {
  if (x < 0 || x >= basis.num_vertices())
    throw InputError("vertex index " + std::to_string(x) + " out of range [0, " + std::to_string(basis.num_vertices()) + ")");
}

void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("time must be finite and >= 0");
}

}  // namespace

Eigen::VectorXd heat_kernel(const SpectralBasis& basis, double t, int x) {
  require_time(t);
  require_vertex(basis, x);
  const Eigen::VectorXd decay = (-t * basis.eigenvalues.array()).exp();
  return basis.eigenvectors * decay.cwiseProduct(basis.eigenvectors.row(x).transpose());
}

Eigen::VectorXd time_averaged_weights(const SpectralBasis& basis, double t) {
  require_time(t);
  const double eps = 1e-12 * basis.lambda_max_estimate;
  Eigen::VectorXd g(basis.size());
  for (int k = 0; k < basis.size(); ++k) {
    const double lambda = basis.eigenvalues(k);
    g(k) = lambda > eps ? -std::expm1(-t * lambda) / lambda : t;
  }
  return g;
}

Eigen::VectorXd time_averaged_heat_kernel(const SpectralBasis& basis, double t, int x) {
  require_vertex(basis, x);
  const Eigen::VectorXd g = time_averaged_weights(basis, t);
  return basis.eigenvectors * g.cwiseProduct(basis.eigenvectors.row(x).transpose());
}

Eigen::VectorXd heat_propagate(const SpectralBasis& basis, const Eigen::VectorXd& f0, double t) {
  require_time(t);
  const Eigen::VectorXd decay = (-t * basis.eigenvalues.array()).exp();
  return basis.eigenvectors * decay.cwiseProduct(basis.project(f0));
}

void FilterSpec::validate() const {
  if (coeffs.empty()) throw ConfigError("filter needs at least one Chebyshev coefficient");
  for (double c : coeffs)
    if (!std::isfinite(c)) throw ConfigError("non-finite Chebyshev coefficient");
}

Eigen::VectorXd chebyshev_filter(const SpectralBasis& basis, const FilterSpec& spec) {
  spec.validate();
  if (basis.size() == 0) throw PreconditionError("chebyshev_filter: empty basis");
  Eigen::VectorXd g(basis.size());
  for (int k = 0; k < basis.size(); ++k)
    g(k) = chebyshev_eval<double>(spec.coeffs, chebyshev_argument(basis.eigenvalues(k), basis.lambda_max_estimate));
  return g;
}

FilterSpec chebyshev_fit(const std::function<double(double)>& g, int order, double lambda_max) {
  if (order < 1) throw ConfigError("chebyshev_fit: order must be >= 1");
  const int nodes = std::max(4 * order, 64);
  FilterSpec spec;
  spec.coeffs.assign(order, 0.0);
  for (int j = 0; j < nodes; ++j) {
    const double gamma = std::numbers::pi * (j + 0.5) / nodes;
    const double lambda = 0.5 * (std::cos(gamma) + 1.0) * lambda_max;
    const double value = g(lambda);
    for (int s = 0; s < order; ++s) spec.coeffs[s] += value * std::cos(s * gamma);
  }
  for (int s = 0; s < order; ++s) spec.coeffs[s] *= (s == 0 ? 1.0 : 2.0) / nodes;
  return spec;
}

Eigen::VectorXd anisotropic_convolve(const SpectralBasis& basis, const Eigen::VectorXd& f, const FilterSpec& spec) {
  const Eigen::VectorXd g = chebyshev_filter(basis, spec);
  return basis.eigenvectors * g.cwiseProduct(basis.project(f));
}

Eigen::VectorXd directional_sum_convolve(std::span<const SpectralBasis> bases, const Eigen::VectorXd& f,
                                         std::span<const FilterSpec> specs) {
  if (bases.empty()) throw InputError("directional_sum_convolve: no bases");
  if (bases.size() != specs.size())
    throw InputError("directional_sum_convolve: " + std::to_string(bases.size()) + " bases but " +
                     std::to_string(specs.size()) + " filters");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(f.size());
  for (size_t t = 0; t < bases.size(); ++t) {
    if (bases[t].num_vertices() != f.size()) throw InputError("directional_sum_convolve: basis size mismatch");
    sum += anisotropic_convolve(bases[t], f, specs[t]);
  }
  return (std::numbers::pi / static_cast<double>(bases.size())) * sum;
}

Eigen::MatrixXd finsler_hks(const SpectralBasis& basis, std::span<const double> times) {
  if (times.empty()) throw InputError("finsler_hks: no times given");
  for (double t : times)
    if (!(t > 0.0)) throw InputError("finsler_hks: times must be positive");
  const Eigen::MatrixXd squared = basis.eigenvectors.array().square();
  Eigen::MatrixXd decay(basis.size(), times.size());
  for (size_t c = 0; c < times.size(); ++c) decay.col(c) = (-times[c] * basis.eigenvalues.array()).exp();
  return squared * decay;
}

std::vector<double> log_spaced_times(double lo, double hi, int count) {
  if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw ConfigError("log_spaced_times: need count >= 1 and 0 < lo <= hi");
  std::vector<double> times(count);
  for (int i = 0; i < count; ++i)
    times[i] = count == 1 ? lo : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (count - 1));
  return times;
}

}  // namespace flbo
