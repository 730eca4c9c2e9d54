#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flbo/mesh.hpp"
#include "flbo/operators.hpp"
#include "flbo/randers.hpp"

namespace flbo {

struct CheckResult {
  std::string name;
  int criterion = 0;  // acceptance criterion this check belongs to
  std::string mesh;
  std::vector<std::pair<std::string, double>> params;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::optional<double> error_l2_relative;
  std::optional<double> slope;
  std::vector<int> flagged_faces;
  std::string detail;
  double seconds = 0.0;
};

struct ValidationOptions {
  std::uint64_t seed = 0;
  int n_metrics = 1000;
  int dual_samples = 10000;
  /// Test hook: negate every assembled stiffness matrix before it is used.
  bool flip_stiffness_sign = false;
};

/// SPD part with eigenvalues log-uniform in [0.1, 10] in a random orientation;
/// omega = rho L u with M = L L^T, |u| = 1 and rho uniform in [0, 0.95].
RandersMetric<double> random_randers_metric(std::mt19937_64& rng);

/// Haar-distributed rotation.
Eigen::Matrix3d random_rotation(std::mt19937_64& rng);

/// Classical cotangent stiffness from per-corner cot = <a, b> / |a x b|.
SparseMatrix reference_cotan_stiffness(const TriangleMesh& mesh);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// |a - b|_S / |b|_S; the plain Euclidean norm when mass is empty.
double relative_l2(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& mass = {});

std::vector<CheckResult> check_randers_duality(const ValidationOptions& options);
std::vector<CheckResult> check_drift_bound(const ValidationOptions& options);
std::vector<CheckResult> check_reduction_chain(const ValidationOptions& options);
std::vector<CheckResult> check_operator_invariants(const ValidationOptions& options);
std::vector<CheckResult> check_spectrum(const ValidationOptions& options);
std::vector<CheckResult> check_heat_paths(const ValidationOptions& options);
std::vector<CheckResult> check_time_averaged_kernel(const ValidationOptions& options);
std::vector<CheckResult> check_source_term(const ValidationOptions& options);
std::vector<CheckResult> check_simplification_order(const ValidationOptions& options);
std::vector<CheckResult> check_filters(const ValidationOptions& options);
std::vector<CheckResult> check_descriptors(const ValidationOptions& options);

struct ValidationCheck {
  int criterion;
  std::string name;
  std::function<std::vector<CheckResult>(const ValidationOptions&)> run;
};

/// Every check above, in criterion order.
const std::vector<ValidationCheck>& validation_checks();

/// Runs one group; an exception becomes a single failed result naming it.
std::vector<CheckResult> run_check(const ValidationCheck& check, const ValidationOptions& options);

std::vector<CheckResult> run_validation(const ValidationOptions& options,
                                        const std::function<void(const CheckResult&)>& on_result = {});

std::string validation_report_json(std::span<const CheckResult> results, const ValidationOptions& options,
                                   double total_seconds);

}  // namespace flbo
