#include "flbo/validation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "flbo/diffusion.hpp"
#include "flbo/error.hpp"
#include "flbo/fixtures.hpp"
#include "flbo/spectral.hpp"
#include "json.hpp"

namespace flbo {

namespace {

using Params = std::vector<std::pair<std::string, double>>;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Passes when value <= threshold (or value >= threshold for lower bounds).
CheckResult result(std::string name, int criterion, std::string mesh, Params params, double value, double threshold,
                   bool lower_bound = false) {
  CheckResult r;
  r.name = std::move(name);
  r.criterion = criterion;
  r.mesh = std::move(mesh);
  r.params = std::move(params);
  r.value = value;
  r.threshold = threshold;
  r.passed = std::isfinite(value) && (lower_bound ? value >= threshold : value <= threshold);
  return r;
}

void stamp(std::vector<CheckResult>& results, double seconds) {
  for (auto& r : results) r.seconds = seconds;
}

Params params_of(const AnisotropyParams& p) {
  return {{"anisotropy_level", p.anisotropy_level}, {"tau", p.tau}, {"n_angles", static_cast<double>(p.n_angles)}};
}

OperatorPair prepared(OperatorPair pair, const ValidationOptions& options) {
  if (options.flip_stiffness_sign) pair.stiffness = -pair.stiffness;
  return pair;
}

double stacked_relative(const DualRandersMetric<double>& a, const DualRandersMetric<double>& b) {
  const double num = std::sqrt((a.m_star - b.m_star).squaredNorm() + (a.omega_star - b.omega_star).squaredNorm() +
                               std::pow(a.randers_alpha - b.randers_alpha, 2));
  const double den = std::sqrt(b.m_star.squaredNorm() + b.omega_star.squaredNorm() + std::pow(b.randers_alpha, 2));
  return num / den;
}

double max_abs(const SparseMatrix& m) {
  double out = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) out = std::max(out, std::abs(it.value()));
  return out;
}

double relative_matrix_difference(const SparseMatrix& a, const SparseMatrix& b) {
  return max_abs(SparseMatrix(a - b)) / max_abs(b);
}

Eigen::VectorXd random_field(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i) f(i) = unif(rng);
  return f;
}

SpectralBasis full_basis(const OperatorPair& pair) { return eigensolve(pair, pair.size()); }

std::string join_values(std::span<const double> values) {
  std::ostringstream out;
  for (size_t i = 0; i < values.size(); ++i) out << (i ? ", " : "") << values[i];
  return out.str();
}

}  // namespace

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::Matrix3d g;
  for (int i = 0; i < 9; ++i) g(i / 3, i % 3) = normal(rng);
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(g);
  Eigen::Matrix3d q = qr.householderQ();
  const Eigen::Matrix3d r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < 3; ++c)
    if (r(c, c) < 0.0) q.col(c) *= -1.0;
  if (q.determinant() < 0.0) q.col(2) *= -1.0;
  return q;
}

RandersMetric<double> random_randers_metric(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> log_eig(std::log(0.1), std::log(10.0));
  std::uniform_real_distribution<double> rho_dist(0.0, 0.95);
  std::normal_distribution<double> normal;
  const Eigen::Matrix3d q = random_rotation(rng);
  Eigen::Vector3d eig;
  for (int i = 0; i < 3; ++i) eig(i) = std::exp(log_eig(rng));
  RandersMetric<double> metric;
  metric.m = q * eig.asDiagonal() * q.transpose();
  metric.m = 0.5 * (metric.m + metric.m.transpose()).eval();
  const Eigen::Matrix3d l = q * eig.cwiseSqrt().asDiagonal();
  Eigen::Vector3d u(normal(rng), normal(rng), normal(rng));
  u.normalize();
  metric.omega = rho_dist(rng) * (l * u);
  return metric;
}

SparseMatrix reference_cotan_stiffness(const TriangleMesh& mesh) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    for (int c = 0; c < 3; ++c) {
      const int k = mesh.faces()(f, c);
      const int i = mesh.faces()(f, (c + 1) % 3);
      const int j = mesh.faces()(f, (c + 2) % 3);
      const Eigen::Vector3d a = mesh.position(i) - mesh.position(k);
      const Eigen::Vector3d b = mesh.position(j) - mesh.position(k);
      const double w = 0.5 * a.dot(b) / a.cross(b).norm();
      triplets.emplace_back(i, j, w);
      triplets.emplace_back(j, i, w);
      triplets.emplace_back(i, i, -w);
      triplets.emplace_back(j, j, -w);
    }
  }
  SparseMatrix w(mesh.num_vertices(), mesh.num_vertices());
  w.setFromTriplets(triplets.begin(), triplets.end());
  return w;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("loglog_slope: need two or more matching samples");
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += std::pow(std::log(x[i]) - mx, 2);
  }
  return sxy / sxx;
}

double relative_l2(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& mass) {
  if (a.size() != b.size()) throw InputError("relative_l2: size mismatch");
  const Eigen::VectorXd d = a - b;
  if (mass.size() == 0) return d.norm() / b.norm();
  return std::sqrt(d.dot(mass.cwiseProduct(d)) / b.dot(mass.cwiseProduct(b)));
}

std::vector<CheckResult> check_randers_duality(const ValidationOptions& options) {
  Stopwatch clock;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  double block = 0.0, brute = 0.0, involution = 0.0;
  for (int s = 0; s < options.n_metrics; ++s) {
    const RandersMetric<double> metric = random_randers_metric(rng);
    const auto dual = dual_randers(metric);
    block = std::max(block, stacked_relative(dual, dual_via_block_inverse(metric)));

    const Eigen::Vector3d v(normal(rng), normal(rng), normal(rng));
    const double closed = eval_dual(dual, v);
    brute = std::max(brute, std::abs(closed - eval_dual_definition(metric, v, options.dual_samples)) / closed);

    const auto back = dual_randers(RandersMetric<double>{dual.m_star, dual.omega_star});
    const double num = std::sqrt((back.m_star - metric.m).squaredNorm() + (back.omega_star - metric.omega).squaredNorm());
    const double den = std::sqrt(metric.m.squaredNorm() + metric.omega.squaredNorm());
    involution = std::max(involution, num / den);
  }
  const double seconds = clock.seconds();
  const Params p{{"n_metrics", static_cast<double>(options.n_metrics)},
                 {"n_samples", static_cast<double>(options.dual_samples)}};
  std::vector<CheckResult> out{result("duality.block_inverse", 1, "", p, block, 1e-10),
                               result("duality.brute_force", 1, "", p, brute, 2e-3),
                               result("duality.involution", 1, "", p, involution, 1e-10),
                               result("duality.runtime", 1, "", p, seconds, 10.0)};
  stamp(out, seconds);
  return out;
}

std::vector<CheckResult> check_drift_bound(const ValidationOptions& options) {
  Stopwatch clock;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  double worst = 0.0, largest = 0.0;
  for (int s = 0; s < options.n_metrics; ++s) {
    const RandersMetric<double> metric = random_randers_metric(rng);
    // Same draw sequence as the duality check.
    for (int i = 0; i < 3; ++i) normal(rng);
    const auto dual = dual_randers(metric);
    const double q = metric.omega.dot(metric.m.ldlt().solve(metric.omega)) / dual.randers_alpha;
    const double norm_sq = dual_drift_norm_sq(dual);
    worst = std::max(worst, std::abs(norm_sq - q / (1.0 + q)));
    largest = std::max(largest, norm_sq);
  }
  const Params p{{"n_metrics", static_cast<double>(options.n_metrics)}};
  std::vector<CheckResult> out{result("drift_bound.identity", 2, "", p, worst, 1e-10)};
  CheckResult strict = result("drift_bound.strict", 2, "", p, largest, 1.0);
  strict.passed = largest < 1.0;
  out.push_back(strict);
  stamp(out, clock.seconds());
  return out;
}

std::vector<CheckResult> check_reduction_chain(const ValidationOptions& options) {
  Stopwatch clock;
  std::vector<CheckResult> out;
  const AnisotropyParams iso{0.0, 0.0, 1};
  for (const std::string name : {"square", "rhombus", "icosphere3"}) {
    const TriangleMesh mesh = make_fixture(name);
    const OperatorPair pair = prepared(assemble_flbo(mesh, iso, 0.0).pair, options);
    out.push_back(result("reduction.cotan", 3, name, params_of(iso),
                         relative_matrix_difference(pair.stiffness, reference_cotan_stiffness(mesh)), 1e-12));
    if (name == "rhombus") {
      // Shared edge of the two unit equilateral triangles.
      const auto& edges = mesh.edges();
      const auto shared = std::find_if(edges.begin(), edges.end(), [](const Edge& e) { return !e.boundary(); });
      const double w = pair.stiffness.coeff(shared->v0, shared->v1);
      CheckResult r = result("reduction.equilateral_weight", 3, name, params_of(iso),
                             std::abs(w - 1.0 / std::sqrt(3.0)), 1e-12);
      r.detail = "w = " + std::to_string(w);
      out.push_back(r);
    }
  }

  const TriangleMesh sphere = make_fixture("icosphere3");
  const AnisotropyParams albo{10.0, 0.0, 8};
  const OperatorFamily family = assemble_family(sphere, albo);
  double worst = 0.0;
  for (size_t t = 0; t < family.pairs.size(); ++t) {
    const auto shears = family.fields[t].shears();
    const SparseMatrix w_h = assemble_stiffness(sphere, std::span<const Eigen::Matrix3d>(shears)).stiffness;
    const OperatorPair pair = prepared(family.pairs[t], options);
    worst = std::max(worst, relative_matrix_difference(pair.stiffness, w_h));
  }
  out.push_back(result("reduction.albo", 3, "icosphere3", params_of(albo), worst, 1e-10));
  stamp(out, clock.seconds());
  return out;
}

std::vector<CheckResult> check_operator_invariants(const ValidationOptions& options) {
  Stopwatch clock;
  const TriangleMesh mesh = make_fixture("icosphere3");
  double symmetry = 0.0, row_sum = 0.0, psd = -std::numeric_limits<double>::infinity();
  int count = 0;
  for (double level : {0.0, 1.0, 10.0}) {
    for (double tau : {0.0, 0.1, 0.5}) {
      const OperatorFamily family = assemble_family(mesh, AnisotropyParams{level, tau, 8});
      for (const OperatorPair& raw : family.pairs) {
        const OperatorPair pair = prepared(raw, options);
        const SparseMatrix& w = pair.stiffness;
        const double scale = max_abs(w);
        symmetry = std::max(symmetry, max_abs(SparseMatrix(w - SparseMatrix(w.transpose()))) / scale);
        const Eigen::VectorXd sums = w * Eigen::VectorXd::Ones(w.cols());
        row_sum = std::max(row_sum, sums.cwiseAbs().maxCoeff() / scale);

        const Eigen::VectorXd inv_sqrt = pair.mass.cwiseSqrt().cwiseInverse();
        const Eigen::MatrixXd a = -(inv_sqrt.asDiagonal() * Eigen::MatrixXd(w) * inv_sqrt.asDiagonal());
        const Eigen::VectorXd eig =
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly).eigenvalues();
        const double lambda_max = std::max(std::abs(eig(0)), std::abs(eig(eig.size() - 1)));
        // Ratio min / lambda_max; PSD to tolerance means >= -1e-9.
        psd = count == 0 ? eig(0) / lambda_max : std::min(psd, eig(0) / lambda_max);
        ++count;
      }
    }
  }
  const double seconds = clock.seconds();
  const Params p{{"combinations", static_cast<double>(count)}};
  std::vector<CheckResult> out{result("operator.symmetry", 4, "icosphere3", p, symmetry, 1e-10),
                               result("operator.row_sums", 4, "icosphere3", p, row_sum, 1e-10),
                               result("operator.psd", 4, "icosphere3", p, psd, -1e-9, true),
                               result("operator.runtime", 4, "icosphere3", p, seconds, 120.0)};
  out[2].detail = "min eigenvalue / lambda_max";
  stamp(out, seconds);
  return out;
}

std::vector<CheckResult> check_spectrum(const ValidationOptions& options) {
  Stopwatch clock;
  const TriangleMesh mesh = make_fixture("icosphere4");
  const AnisotropyParams iso{0.0, 0.0, 1};
  const OperatorPair pair = prepared(assemble_flbo(mesh, iso, 0.0).pair, options);
  EigensolveOptions eo;
  eo.seed = options.seed;
  EigensolveStats stats;
  const SpectralBasis basis = eigensolve(pair, 9, eo, &stats);

  const std::vector<double> expected{0, 2, 2, 2, 6, 6, 6, 6, 6};
  double worst = 0.0;
  for (int j = 1; j < 9; ++j) worst = std::max(worst, std::abs(basis.eigenvalues(j) - expected[j]) / expected[j]);
  const Eigen::MatrixXd gram = basis.eigenvectors.transpose() * basis.mass.asDiagonal() * basis.eigenvectors;
  const double ortho = (gram - Eigen::MatrixXd::Identity(9, 9)).cwiseAbs().maxCoeff();
  const Eigen::MatrixXd resid =
      pair.stiffness * basis.eigenvectors + basis.mass.asDiagonal() * basis.eigenvectors * basis.eigenvalues.asDiagonal();
  const double w_norm = max_abs(pair.stiffness);

  const Params p{{"k", 9.0}, {"anisotropy_level", 0.0}, {"tau", 0.0}};
  std::vector<CheckResult> out{
      result("spectrum.pattern", 5, "icosphere4", p, worst, 0.05),
      result("spectrum.zero_mode", 5, "icosphere4", p, std::abs(basis.eigenvalues(0)) / basis.lambda_max_estimate, 1e-9),
      result("spectrum.orthonormality", 5, "icosphere4", p, ortho, 1e-8),
      result("spectrum.residual", 5, "icosphere4", p, resid.colwise().norm().maxCoeff() / w_norm, 1e-8)};
  std::vector<double> values(basis.eigenvalues.data(), basis.eigenvalues.data() + basis.size());
  out[0].detail = "eigenvalues " + join_values(values) + (stats.dense ? " (dense)" : " (lanczos)");
  stamp(out, clock.seconds());
  return out;
}

std::vector<CheckResult> check_heat_paths(const ValidationOptions& options) {
  Stopwatch clock;
  const TriangleMesh mesh = make_fixture("icosphere3");
  const AnisotropyParams params;
  const OperatorPair pair = prepared(assemble_flbo(mesh, params, 0.0).pair, options);
  const SpectralBasis basis = full_basis(pair);
  std::mt19937_64 rng(options.seed);
  const Eigen::VectorXd f0 = random_field(rng, pair.size());
  const double t = 0.1;

  const Eigen::VectorXd spectral = heat_propagate(basis, f0, t);
  const double heat0 = pair.mass.dot(f0);
  double drift = 0.0;
  const Eigen::VectorXd stepped = implicit_euler_diffuse(pair, f0, DiffusionConfig{t, 1000, false}, std::nullopt,
                                                         [&](int, const Eigen::VectorXd& f) {
                                                           drift = std::max(drift, std::abs(pair.mass.dot(f) - heat0) / std::abs(heat0));
                                                         });
  const Eigen::VectorXd twice = heat_propagate(basis, heat_propagate(basis, f0, 0.04), 0.06);
  const double seconds = clock.seconds();

  Params p = params_of(params);
  p.emplace_back("t", t);
  p.emplace_back("n_steps", 1000.0);
  std::vector<CheckResult> out{result("heat.euler_vs_spectral", 6, "icosphere3", p, relative_l2(stepped, spectral, pair.mass), 1e-3),
                               result("heat.conservation", 6, "icosphere3", p, drift, 1e-10),
                               result("heat.semigroup", 6, "icosphere3", p, relative_l2(twice, spectral, pair.mass), 1e-10),
                               result("heat.runtime", 6, "icosphere3", p, seconds, 60.0)};
  out[0].error_l2_relative = out[0].value;
  out[2].error_l2_relative = out[2].value;
  stamp(out, seconds);
  return out;
}

std::vector<CheckResult> check_time_averaged_kernel(const ValidationOptions& options) {
  Stopwatch clock;
  const TriangleMesh mesh = make_fixture("icosphere1");
  const AnisotropyParams params;
  const OperatorPair pair = prepared(assemble_flbo(mesh, params, 0.0).pair, options);
  const SpectralBasis basis = full_basis(pair);
  const double t = 0.1;
  const int x = 0, steps = 1000;

  const Eigen::VectorXd closed = time_averaged_heat_kernel(basis, t, x);
  Eigen::VectorXd quad = Eigen::VectorXd::Zero(pair.size());
  const double h = t / steps;
  for (int s = 0; s <= steps; ++s) {
    const double weight = (s == 0 || s == steps) ? 0.5 * h : h;
    quad += weight * heat_kernel(basis, s * h, x);
  }
  Params p = params_of(params);
  p.emplace_back("t", t);
  p.emplace_back("quadrature_steps", steps);
  std::vector<CheckResult> out{result("time_averaged.quadrature", 7, "icosphere1", p, relative_l2(closed, quad), 1e-6)};
  out[0].error_l2_relative = out[0].value;
  stamp(out, clock.seconds());
  return out;
}

std::vector<CheckResult> check_source_term(const ValidationOptions& options) {
  Stopwatch clock;
  const TriangleMesh mesh = make_fixture("icosphere3");
  const AnisotropyParams params;
  const FlboAssembly assembly = assemble_flbo(mesh, params, 0.0);
  const OperatorPair pair = prepared(assembly.pair, options);
  const SpectralBasis basis = full_basis(pair);
  std::mt19937_64 rng(options.seed + 1);
  const Eigen::VectorXd f0 = random_field(rng, pair.size());
  const double t = 0.1;

  const Eigen::VectorXd spectral = simplified_randers_solve(mesh, basis, assembly.field, f0, t);
  const Eigen::VectorXd stepped =
      implicit_euler_diffuse(pair, f0, DiffusionConfig{t, 1000, true}, drift_source(mesh, assembly.field));
  Params p = params_of(params);
  p.emplace_back("t", t);
  p.emplace_back("n_steps", 1000.0);
  std::vector<CheckResult> out{result("source.euler_vs_spectral", 8, "icosphere3", p, relative_l2(stepped, spectral, pair.mass), 1e-3)};
  out[0].error_l2_relative = out[0].value;
  stamp(out, clock.seconds());
  return out;
}

std::vector<CheckResult> check_simplification_order(const ValidationOptions&) {
  Stopwatch clock;
  const TriangleMesh mesh = make_fixture("strip");
  const Eigen::VectorXd mass = assemble_mass(mesh);
  const std::vector<double> eps{0.1, 0.05, 0.025};
  std::vector<double> gaps;
  std::vector<int> flagged;
  for (double e : eps) {
    RandersMetric<double> metric;
    metric.omega = Eigen::Vector3d(e, 0.0, 0.0);
    const FaceMetricField field = constant_metric_field(mesh.num_faces(), metric);
    const Eigen::VectorXd u = mesh.vertices().col(0);
    const FinslerRhs nonlinear = nonlinear_finsler_rhs(mesh, field, u);
    const Eigen::VectorXd simplified = simplified_finsler_rhs(mesh, field, u);
    const Eigen::VectorXd d = nonlinear.rhs - simplified;
    gaps.push_back(std::sqrt(d.dot(mass.cwiseProduct(d))));
    flagged.insert(flagged.end(), nonlinear.flagged_faces.begin(), nonlinear.flagged_faces.end());
  }
  const double slope = loglog_slope(eps, gaps);
  CheckResult r = result("simplification.order", 9, "strip", {{"omega_max", eps.front()}, {"omega_min", eps.back()}},
                         slope, 1.8, true);
  r.slope = slope;
  r.flagged_faces = flagged;
  r.detail = "gaps " + join_values(gaps);
  std::vector<CheckResult> out{r};
  stamp(out, clock.seconds());
  return out;
}

std::vector<CheckResult> check_filters(const ValidationOptions& options) {
  Stopwatch clock;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  std::vector<double> coeffs(16);
  for (double& c : coeffs) c = unif(rng);
  double trig = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = unif(rng);
    double direct = 0.0;
    for (size_t s = 0; s < coeffs.size(); ++s) direct += coeffs[s] * std::cos(s * std::acos(x));
    trig = std::max(trig, std::abs(chebyshev_eval<double>(coeffs, x) - direct));
  }

  const TriangleMesh mesh = make_fixture("icosphere1");
  const AnisotropyParams params;
  const OperatorFamily family = assemble_family(mesh, params);
  std::vector<SpectralBasis> bases;
  std::vector<FilterSpec> specs;
  for (const OperatorPair& pair : family.pairs) {
    bases.push_back(full_basis(prepared(pair, options)));
    FilterSpec spec;
    spec.coeffs.resize(16);
    for (double& c : spec.coeffs) c = unif(rng);
    specs.push_back(std::move(spec));
  }
  const int n = mesh.num_vertices();
  const Eigen::VectorXd f1 = random_field(rng, n);
  const Eigen::VectorXd f2 = random_field(rng, n);
  const double a = 2.5;

  const Eigen::VectorXd identity = anisotropic_convolve(bases.front(), f1, FilterSpec{{1.0}});
  const Eigen::VectorXd lhs = directional_sum_convolve(bases, a * f1 + f2, specs);
  const Eigen::VectorXd rhs = a * directional_sum_convolve(bases, f1, specs) + directional_sum_convolve(bases, f2, specs);

  std::vector<CheckResult> out{result("filter.chebyshev_trig", 10, "", {{"order", 16.0}, {"points", 1000.0}}, trig, 1e-12),
                               result("filter.identity", 10, "icosphere1", params_of(params), relative_l2(identity, f1), 1e-10),
                               result("filter.linearity", 10, "icosphere1", params_of(params), relative_l2(lhs, rhs), 1e-12)};
  out[1].error_l2_relative = out[1].value;
  out[2].error_l2_relative = out[2].value;
  stamp(out, clock.seconds());
  return out;
}

std::vector<CheckResult> check_descriptors(const ValidationOptions& options) {
  Stopwatch clock;
  std::mt19937_64 rng(options.seed);
  const std::vector<double> times = log_spaced_times(0.01, 1.0, 8);

  const TriangleMesh torus = make_torus(2.0, 0.7, 24, 12);
  std::normal_distribution<double> normal;
  const Eigen::Matrix3d rot = random_rotation(rng);
  const Eigen::Vector3d shift(normal(rng), normal(rng), normal(rng));
  const TriangleMesh moved = torus.transformed(rot, shift);
  const AnisotropyParams params;
  const Eigen::MatrixXd hks = finsler_hks(full_basis(prepared(assemble_flbo(torus, params, 0.0).pair, options)), times);
  const Eigen::MatrixXd hks_moved =
      finsler_hks(full_basis(prepared(assemble_flbo(moved, params, 0.0).pair, options)), times);
  const double invariance = (hks - hks_moved).cwiseAbs().maxCoeff() / hks.cwiseAbs().maxCoeff();

  const TriangleMesh tet = make_tetrahedron();
  const AnisotropyParams iso{0.0, 0.0, 1};
  const Eigen::MatrixXd tet_hks = finsler_hks(full_basis(prepared(assemble_flbo(tet, iso, 0.0).pair, options)), times);
  const double spread =
      ((tet_hks.colwise().maxCoeff() - tet_hks.colwise().minCoeff()).array() / tet_hks.colwise().maxCoeff().array()).maxCoeff();

  std::vector<CheckResult> out{result("descriptor.rigid_motion", 11, "torus", params_of(params), invariance, 1e-6),
                               result("descriptor.tetrahedron", 11, "tetrahedron", params_of(iso), spread, 1e-8)};
  stamp(out, clock.seconds());
  return out;
}

const std::vector<ValidationCheck>& validation_checks() {
  static const std::vector<ValidationCheck> checks{
      {1, "duality", check_randers_duality},
      {2, "drift_bound", check_drift_bound},
      {3, "reduction", check_reduction_chain},
      {4, "operator", check_operator_invariants},
      {5, "spectrum", check_spectrum},
      {6, "heat", check_heat_paths},
      {7, "time_averaged", check_time_averaged_kernel},
      {8, "source", check_source_term},
      {9, "simplification", check_simplification_order},
      {10, "filter", check_filters},
      {11, "descriptor", check_descriptors},
  };
  return checks;
}

std::vector<CheckResult> run_check(const ValidationCheck& check, const ValidationOptions& options) {
  Stopwatch clock;
  try {
    return check.run(options);
  } catch (const std::exception& e) {
    CheckResult r;
    r.name = check.name;
    r.criterion = check.criterion;
    r.passed = false;
    r.value = std::numeric_limits<double>::quiet_NaN();
    r.detail = e.what();
    r.seconds = clock.seconds();
    return {r};
  }
}

std::vector<CheckResult> run_validation(const ValidationOptions& options,
                                        const std::function<void(const CheckResult&)>& on_result) {
  std::vector<CheckResult> all;
  for (const ValidationCheck& check : validation_checks()) {
    for (CheckResult& r : run_check(check, options)) {
      if (on_result) on_result(r);
      all.push_back(std::move(r));
    }
  }
  return all;
}

std::string validation_report_json(std::span<const CheckResult> results, const ValidationOptions& options,
                                   double total_seconds) {
  using nlohmann::json;
  auto number = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json checks = json::array();
  bool all_passed = true;
  for (const CheckResult& r : results) {
    json params = json::object();
    for (const auto& [key, value] : r.params) params[key] = value;
    json j{{"test", r.name},
           {"criterion", r.criterion},
           {"mesh", r.mesh},
           {"params", params},
           {"passed", r.passed},
           {"value", number(r.value)},
           {"threshold", r.threshold},
           {"error_l2_relative", r.error_l2_relative ? number(*r.error_l2_relative) : json(nullptr)},
           {"slope", r.slope ? number(*r.slope) : json(nullptr)},
           {"flagged_faces", r.flagged_faces},
           {"seconds", r.seconds}};
    if (!r.detail.empty()) j["detail"] = r.detail;
    checks.push_back(std::move(j));
    all_passed = all_passed && r.passed;
  }
  json report{{"seed", options.seed},
              {"passed", all_passed},
              {"total_seconds", total_seconds},
              {"fault_injection", options.flip_stiffness_sign},
              {"checks", checks}};
  return report.dump(2) + "\n";
}

}  // namespace flbo
