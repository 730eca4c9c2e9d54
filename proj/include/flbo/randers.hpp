#pragma once

// Randers metrics F(v) = |v|_M + <omega, v>, their closed-form duals and the
// Finsler diffusivity D = M* - omega* omega*^T. Everything here is a 3x3
// value computation, templated on the scalar type.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "flbo/error.hpp"

namespace flbo {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

template <typename Scalar>
struct RandersMetric {
  Mat3<Scalar> m = Mat3<Scalar>::Identity();
  Vec3<Scalar> omega = Vec3<Scalar>::Zero();
};

template <typename Scalar>
struct DualRandersMetric {
  Mat3<Scalar> m_star = Mat3<Scalar>::Identity();
  Vec3<Scalar> omega_star = Vec3<Scalar>::Zero();
  // 1 - omega^T M^{-1} omega of the primal metric.
  Scalar randers_alpha = Scalar(1);
};

template <typename Scalar>
struct ValidityReport {
  Scalar symmetry_defect = 0;  // max |M - M^T| relative to max |M|
  Scalar min_eigenvalue = 0;
  Scalar drift_norm_sq = 0;  // omega^T M^{-1} omega
  bool spd = false;
  bool valid = false;
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& x, const char* what) {
  if (!x.allFinite()) throw InputError(std::string("non-finite entries in ") + what);
}

}  // namespace detail

/// Symmetry, positive definiteness and the strict drift bound omega^T M^{-1} omega < 1.
/// Tolerances are scale-free: 1e-12 relative symmetry and 1e-12 * trace for eigenvalues.
template <typename Scalar>
ValidityReport<Scalar> validate_randers(const Mat3<Scalar>& m, const Vec3<Scalar>& omega) {
  detail::require_finite(m, "M");
  detail::require_finite(omega, "omega");

  ValidityReport<Scalar> report;
  const Scalar scale = std::max(m.cwiseAbs().maxCoeff(), std::numeric_limits<Scalar>::min());
  report.symmetry_defect = (m - m.transpose()).cwiseAbs().maxCoeff() / scale;

  const Mat3<Scalar> sym = Scalar(0.5) * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3<Scalar>> eig(sym, Eigen::EigenvaluesOnly);
  report.min_eigenvalue = eig.eigenvalues()(0);
  const Scalar trace = sym.trace();
  report.spd = report.symmetry_defect <= Scalar(1e-12) && trace > 0 &&
               report.min_eigenvalue > Scalar(1e-12) * trace;
  if (!report.spd) {
    report.drift_norm_sq = std::numeric_limits<Scalar>::quiet_NaN();
    return report;
  }
  report.drift_norm_sq = omega.dot(sym.ldlt().solve(omega));
  report.valid = report.drift_norm_sq < Scalar(1);
  return report;
}

template <typename Scalar>
ValidityReport<Scalar> validate_randers(const RandersMetric<Scalar>& metric) {
  return validate_randers(metric.m, metric.omega);
}

/// |omega|_{M^{-1}}, the quantity that must stay below one.
template <typename Scalar>
Scalar drift_norm(const RandersMetric<Scalar>& metric) {
  return std::sqrt(metric.omega.dot(metric.m.ldlt().solve(metric.omega)));
}

/// F(v) = sqrt(v^T M v) + <omega, v>.
template <typename Scalar>
Scalar eval_primal(const RandersMetric<Scalar>& metric, const Vec3<Scalar>& v) {
  return std::sqrt(std::max(Scalar(0), v.dot(metric.m * v))) + metric.omega.dot(v);
}

/// F*(v) = sqrt(v^T M* v) + <omega*, v>.
template <typename Scalar>
Scalar eval_dual(const DualRandersMetric<Scalar>& dual, const Vec3<Scalar>& v) {
  return std::sqrt(std::max(Scalar(0), v.dot(dual.m_star * v))) + dual.omega_star.dot(v);
}

/// Closed-form dual:
///   M* = (alpha M^{-1} + (M^{-1} omega)(M^{-1} omega)^T) / alpha^2,
///   omega* = -M^{-1} omega / alpha,  alpha = 1 - omega^T M^{-1} omega.
template <typename Scalar>
DualRandersMetric<Scalar> dual_randers(const RandersMetric<Scalar>& metric) {
  const auto report = validate_randers(metric);
  if (!report.valid) throw PreconditionError("dual_randers: metric is not a valid Randers metric");

  const Mat3<Scalar> m_inv = metric.m.inverse();
  const Vec3<Scalar> m_inv_omega = m_inv * metric.omega;
  const Scalar alpha = Scalar(1) - metric.omega.dot(m_inv_omega);

  DualRandersMetric<Scalar> dual;
  dual.randers_alpha = alpha;
  dual.m_star = (alpha * m_inv + m_inv_omega * m_inv_omega.transpose()) / (alpha * alpha);
  dual.m_star = Scalar(0.5) * (dual.m_star + dual.m_star.transpose()).eval();
  dual.omega_star = -m_inv_omega / alpha;
  return dual;
}

/// The dual read off the 4x4 inverse of [[M, omega], [omega^T, 1]], whose blocks are
/// [[alpha M*, omega*], [omega*^T, 1/alpha]]. Independent of dual_randers.
template <typename Scalar>
DualRandersMetric<Scalar> dual_via_block_inverse(const RandersMetric<Scalar>& metric) {
  detail::require_finite(metric.m, "M");
  detail::require_finite(metric.omega, "omega");

  Eigen::Matrix<Scalar, 4, 4> block;
  block.template topLeftCorner<3, 3>() = metric.m;
  block.template topRightCorner<3, 1>() = metric.omega;
  block.template bottomLeftCorner<1, 3>() = metric.omega.transpose();
  block(3, 3) = Scalar(1);

  Eigen::FullPivLU<Eigen::Matrix<Scalar, 4, 4>> lu(block);
  if (!lu.isInvertible()) throw NumericalError("dual_via_block_inverse: singular block matrix");
  const Eigen::Matrix<Scalar, 4, 4> inv = lu.inverse();

  DualRandersMetric<Scalar> dual;
  dual.randers_alpha = Scalar(1) / inv(3, 3);
  dual.m_star = inv.template topLeftCorner<3, 3>() / dual.randers_alpha;
  dual.omega_star = inv.template topRightCorner<3, 1>();
  return dual;
}

/// Brute-force dual max{<v, b> : F(b) <= 1}: scan a Fibonacci sphere of directions,
/// rescale each to F(b) = 1, then polish the best one with 50 steps of projected
/// gradient ascent on the unit sphere.
template <typename Scalar>
Scalar eval_dual_definition(const RandersMetric<Scalar>& metric, const Vec3<Scalar>& v,
                            int n_samples) {
  if (n_samples < 16) throw ConfigError("eval_dual_definition: n_samples must be >= 16");
  detail::require_finite(v, "v");
  if (v.isZero(0)) return Scalar(0);

  auto ratio = [&](const Vec3<Scalar>& d) { return v.dot(d) / eval_primal(metric, d); };

  const Scalar golden = std::numbers::pi_v<Scalar> * (Scalar(3) - std::sqrt(Scalar(5)));
  Vec3<Scalar> best_dir = Vec3<Scalar>::UnitX();
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  for (int i = 0; i < n_samples; ++i) {
    const Scalar z = Scalar(1) - Scalar(2) * (Scalar(i) + Scalar(0.5)) / Scalar(n_samples);
    const Scalar r = std::sqrt(std::max(Scalar(0), Scalar(1) - z * z));
    const Scalar phi = golden * Scalar(i);
    const Vec3<Scalar> d(r * std::cos(phi), r * std::sin(phi), z);
    const Scalar value = ratio(d);
    if (value > best) {
      best = value;
      best_dir = d;
    }
  }

  Scalar step = std::sqrt(Scalar(4) * std::numbers::pi_v<Scalar> / Scalar(n_samples));
  for (int iter = 0; iter < 50; ++iter) {
    const Scalar f = eval_primal(metric, best_dir);
    const Scalar m_norm = std::sqrt(best_dir.dot(metric.m * best_dir));
    const Vec3<Scalar> grad_f = metric.m * best_dir / m_norm + metric.omega;
    Vec3<Scalar> grad = (v * f - v.dot(best_dir) * grad_f) / (f * f);
    grad -= grad.dot(best_dir) * best_dir;
    const Scalar gnorm = grad.norm();
    if (gnorm == Scalar(0)) break;
    const Vec3<Scalar> trial = (best_dir + step * grad / gnorm).normalized();
    const Scalar value = ratio(trial);
    if (value > best) {
      best = value;
      best_dir = trial;
      step *= Scalar(1.5);
    } else {
      step *= Scalar(0.5);
    }
  }
  return best;
}

/// D = M* - omega* omega*^T. Algebraically this equals M^{-1} / alpha.
template <typename Scalar>
Mat3<Scalar> finsler_diffusivity(const DualRandersMetric<Scalar>& dual) {
  Mat3<Scalar> d = dual.m_star - dual.omega_star * dual.omega_star.transpose();
  return Scalar(0.5) * (d + d.transpose());
}

/// |omega*|^2_{M*^{-1}}; always q / (1 + q) with q = omega^T M^{-1} omega / alpha.
template <typename Scalar>
Scalar dual_drift_norm_sq(const DualRandersMetric<Scalar>& dual) {
  return dual.omega_star.dot(dual.m_star.ldlt().solve(dual.omega_star));
}

}  // namespace flbo
