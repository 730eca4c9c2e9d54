// Generalized eigenproblem -W phi = lambda S phi via the symmetric form
// A = S^{-1/2} (-W) S^{-1/2}. Small problems go through a dense solver; larger
// ones use restarted block Krylov iteration on the shift-inverted operator with
// full reorthogonalisation and Rayleigh-Ritz over the kept vectors plus the new
// block. A final cycle from a random vector checks that no copy of a repeated
// eigenvalue was missed.

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "flbo/error.hpp"
#include "flbo/spectral.hpp"

namespace flbo {

namespace {

SparseMatrix symmetric_operator(const OperatorPair& pair, const Eigen::VectorXd& inv_sqrt_mass) {
  SparseMatrix a = -(inv_sqrt_mass.asDiagonal() * pair.stiffness * inv_sqrt_mass.asDiagonal());
  a.makeCompressed();
  return a;
}

Eigen::VectorXd random_unit(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v.normalized();
}

// Two passes of classical Gram-Schmidt against the first `cols` columns of basis.
void orthogonalize(Eigen::VectorXd& w, const Eigen::MatrixXd& basis, Eigen::Index cols) {
  if (cols == 0) return;
  for (int pass = 0; pass < 2; ++pass) w.noalias() -= basis.leftCols(cols) * (basis.leftCols(cols).transpose() * w);
}

struct RitzPair {
  double value;
  double residual;
  Eigen::VectorXd vector;
};

// m steps of Lanczos on `apply`, deflated against the first `locked` columns of
// `deflation`. Returns Ritz vectors with exact Rayleigh quotients and residuals on A.
template <typename Apply>
std::vector<RitzPair> lanczos_cycle(const Apply& apply, const SparseMatrix& a, const Eigen::MatrixXd& deflation,
                                    Eigen::Index locked, int m, std::mt19937_64& rng, int& steps_taken) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd v(n, m + 1);
  Eigen::VectorXd alpha(m), beta(m);

  Eigen::VectorXd start = random_unit(rng, n);
  orthogonalize(start, deflation, locked);
  v.col(0) = start.normalized();

  int steps = 0;
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd w = apply(Eigen::VectorXd(v.col(j)));
    alpha(j) = v.col(j).dot(w);
    orthogonalize(w, deflation, locked);
    orthogonalize(w, v, j + 1);
    beta(j) = w.norm();
    steps = j + 1;
    if (beta(j) <= 1e-12 * std::abs(alpha.head(j + 1).cwiseAbs().maxCoeff())) break;
    v.col(j + 1) = w / beta(j);
  }
  steps_taken += steps;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
  Eigen::VectorXd diag = alpha.head(steps);
  Eigen::VectorXd sub = steps > 1 ? Eigen::VectorXd(beta.head(steps - 1)) : Eigen::VectorXd(0);
  tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);

  std::vector<RitzPair> pairs;
  pairs.reserve(steps);
  const Eigen::MatrixXd ritz = v.leftCols(steps) * tri.eigenvectors();
  for (int c = 0; c < steps; ++c) {
    Eigen::VectorXd y = ritz.col(c).normalized();
    const Eigen::VectorXd ay = a * y;
    const double lambda = y.dot(ay);
    pairs.push_back({lambda, (ay - lambda * y).norm(), std::move(y)});
  }
  std::sort(pairs.begin(), pairs.end(), [](const RitzPair& x, const RitzPair& y) { return x.value < y.value; });
  return pairs;
}

// Rayleigh-Ritz for `apply` on span(kept, K), where K is the block Krylov space
// grown from apply(kept[seed]) for each seed, or from a random vector when there
// are no seeds. Each admitted vector w contributes
// apply(w) to the next layer, orthogonalised against everything before it.
// At most m new vectors are added. Ritz pairs come back sorted by their
// Rayleigh quotient on A.
template <typename Apply>
std::vector<RitzPair> rayleigh_ritz_cycle(const Apply& apply, const SparseMatrix& a, const Eigen::MatrixXd& kept,
                                          const std::vector<int>& seeds, int m, std::mt19937_64& rng,
                                          int& steps_taken) {
  const Eigen::Index n = a.rows();
  const Eigen::Index p = kept.cols();
  Eigen::MatrixXd v(n, p + m), bv(n, p + m);
  v.leftCols(p) = kept;
  for (Eigen::Index c = 0; c < p; ++c) bv.col(c) = apply(Eigen::VectorXd(kept.col(c)));
  Eigen::Index cols = p;

  auto admit = [&](Eigen::VectorXd w) {
    const double before = w.norm();
    orthogonalize(w, v, cols);
    const double after = w.norm();
    if (!(after > 1e-8 * before)) return false;
    v.col(cols) = w / after;
    return true;
  };

  Eigen::MatrixXd layer(n, std::max<size_t>(seeds.size(), 1));
  if (seeds.empty()) {
    layer.col(0) = random_unit(rng, n);
  } else {
    for (size_t c = 0; c < seeds.size(); ++c) layer.col(c) = bv.col(seeds[c]);
  }
  while (cols < p + m && cols < n) {
    Eigen::MatrixXd next(n, layer.cols());
    Eigen::Index produced = 0;
    for (Eigen::Index c = 0; c < layer.cols() && cols < p + m && cols < n; ++c) {
      if (!admit(layer.col(c))) continue;
      bv.col(cols) = apply(Eigen::VectorXd(v.col(cols)));
      next.col(produced++) = bv.col(cols);
      ++cols;
      ++steps_taken;
    }
    if (produced == 0) {
      if (!admit(random_unit(rng, n))) break;
      bv.col(cols) = apply(Eigen::VectorXd(v.col(cols)));
      next.col(produced++) = bv.col(cols);
      ++cols;
      ++steps_taken;
    }
    layer = next.leftCols(produced);
  }

  const Eigen::MatrixXd h = v.leftCols(cols).transpose() * bv.leftCols(cols);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (h + h.transpose()));
  const Eigen::MatrixXd y = v.leftCols(cols) * eig.eigenvectors();

  std::vector<RitzPair> pairs;
  pairs.reserve(cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    Eigen::VectorXd yc = y.col(c).normalized();
    const Eigen::VectorXd ay = a * yc;
    const double lambda = yc.dot(ay);
    pairs.push_back({lambda, (ay - lambda * yc).norm(), std::move(yc)});
  }
  std::sort(pairs.begin(), pairs.end(), [](const RitzPair& x, const RitzPair& y) { return x.value < y.value; });
  return pairs;
}

}  // namespace

Eigen::VectorXd SpectralBasis::project(const Eigen::VectorXd& f) const {
  if (f.size() != mass.size())
    throw InputError("field has " + std::to_string(f.size()) + " values, basis has " + std::to_string(mass.size()) +
                     " vertices");
  return eigenvectors.transpose() * mass.cwiseProduct(f);
}

double estimate_lambda_max(const OperatorPair& pair, std::uint64_t seed) {
  const Eigen::VectorXd inv_sqrt_mass = pair.mass.cwiseSqrt().cwiseInverse();
  const SparseMatrix a = symmetric_operator(pair, inv_sqrt_mass);
  const Eigen::Index n = a.rows();
  const int m = static_cast<int>(std::min<Eigen::Index>(n, 60));
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  int steps = 0;
  const auto pairs = lanczos_cycle([&](const Eigen::VectorXd& x) { return Eigen::VectorXd(a * x); }, a,
                                   Eigen::MatrixXd(n, 0), 0, m, rng, steps);
  return 1.01 * std::max(pairs.back().value, 0.0);
}

SpectralBasis eigensolve(const OperatorPair& pair, int k, const EigensolveOptions& options, EigensolveStats* stats) {
  const int n = pair.size();
  if (k < 1 || k > n) throw ConfigError("eigensolve: k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  if (pair.stiffness.rows() != n || pair.stiffness.cols() != n) throw InputError("eigensolve: mass/stiffness size mismatch");
  if ((pair.mass.array() <= 0.0).any()) throw PreconditionError("eigensolve: mass matrix must be positive");

  EigensolveStats local_stats;
  EigensolveStats& st = stats ? *stats : local_stats;
  st = {};

  const Eigen::VectorXd inv_sqrt_mass = pair.mass.cwiseSqrt().cwiseInverse();
  const SparseMatrix a = symmetric_operator(pair, inv_sqrt_mass);

  SpectralBasis basis;
  basis.mass = pair.mass;

  if (n <= options.dense_threshold || 2 * k > n) {
    st.dense = true;
    const Eigen::MatrixXd dense = Eigen::MatrixXd(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (dense + dense.transpose()));
    if (eig.info() != Eigen::Success) throw NumericalError("eigensolve: dense eigensolver failed");
    basis.eigenvalues = eig.eigenvalues().head(k);
    basis.eigenvectors = inv_sqrt_mass.asDiagonal() * eig.eigenvectors().leftCols(k);
    basis.lambda_max_estimate = 1.01 * std::max(eig.eigenvalues()(n - 1), 0.0);
    if (basis.lambda_max_estimate == 0.0) basis.lambda_max_estimate = 1.0;
    const Eigen::MatrixXd resid = a * eig.eigenvectors().leftCols(k) - eig.eigenvectors().leftCols(k) * basis.eigenvalues.asDiagonal();
    st.max_residual = resid.colwise().norm().maxCoeff() / basis.lambda_max_estimate;
    return basis;
  }

  const double lambda_max = estimate_lambda_max(pair, options.seed);
  const double shift = 1e-3 * lambda_max;
  const double tol = options.tolerance * lambda_max;

  // (A + shift)^{-1} x = S^{1/2} (-W + shift S)^{-1} S^{1/2} x
  SparseMatrix shifted = -pair.stiffness;
  for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) += shift * pair.mass(i);
  Eigen::SimplicialLLT<SparseMatrix> chol(shifted);
  if (chol.info() != Eigen::Success)
    throw NumericalError("eigensolve: factorization of -W + shift S failed (operator not positive semidefinite?)");
  const Eigen::VectorXd sqrt_mass = pair.mass.cwiseSqrt();
  auto apply_inverse = [&](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(sqrt_mass.cwiseProduct(chol.solve(sqrt_mass.cwiseProduct(x))));
  };

  std::mt19937_64 rng(options.seed);
  // Soft locking: the current best k + buffer Ritz vectors are carried into every
  // cycle and refined together with a fresh Krylov block. Nothing is deflated
  // away, so inexact early vectors cannot pollute later copies of a repeated
  // eigenvalue.
  const int buffer = std::min(n - k, std::max(16, k / 4));
  const int keep_target = k + buffer;
  const int block = std::max(k, 40);
  const int cap = std::max(options.iteration_factor * k, 400);
  Eigen::MatrixXd kept(n, 0);
  std::vector<RitzPair> ritz;
  bool probe = true;
  double worst = 0.0;

  while (true) {
    const bool random_start = probe || ritz.empty();
    // Images of the unconverged wanted pairs seed a block Krylov extension.
    std::vector<int> seeds;
    if (!random_start)
      for (int c = 0; c < static_cast<int>(kept.cols()); ++c)
        if (ritz[c].residual > tol) seeds.push_back(c);
    const int len = std::max(1, std::min(block, n - static_cast<int>(kept.cols())));
    ritz = rayleigh_ritz_cycle(apply_inverse, a, kept, seeds, len, rng, st.lanczos_steps);
    ++st.restarts;

    const int available = std::min<int>(k, ritz.size());
    bool converged = available == k;
    worst = 0.0;
    for (int c = 0; c < available; ++c) {
      worst = std::max(worst, ritz[c].residual);
      converged = converged && ritz[c].residual <= tol;
    }
    if (converged && random_start) break;
    // Confirm with a random start before stopping, in case a copy of a repeated
    // eigenvalue below the k-th one was never excited.
    probe = converged;

    const int keep = std::min<int>({keep_target, static_cast<int>(ritz.size()), n - 1});
    kept.resize(n, keep);
    for (int c = 0; c < keep; ++c) kept.col(c) = ritz[c].vector;
    // Ritz vectors are orthonormal up to rounding; tidy them up.
    for (int pass = 0; pass < 2; ++pass) {
      for (int c = 0; c < keep; ++c) {
        Eigen::VectorXd y = kept.col(c);
        orthogonalize(y, kept, c);
        kept.col(c) = y.normalized();
      }
    }

    if (st.lanczos_steps > cap) {
      std::ostringstream msg;
      msg << "eigensolve: Lanczos did not converge within " << cap << " steps (worst residual "
          << worst / lambda_max << " relative)";
      throw NumericalError(msg.str());
    }
  }

  basis.eigenvalues.resize(k);
  Eigen::MatrixXd vecs(n, k);
  for (int c = 0; c < k; ++c) {
    basis.eigenvalues(c) = ritz[c].value;
    vecs.col(c) = ritz[c].vector;
  }
  const Eigen::MatrixXd resid = a * vecs - vecs * basis.eigenvalues.asDiagonal();
  basis.eigenvectors = inv_sqrt_mass.asDiagonal() * vecs;
  basis.lambda_max_estimate = std::max(lambda_max, 1.01 * basis.eigenvalues(k - 1));
  st.max_residual = resid.colwise().norm().maxCoeff() / lambda_max;
  return basis;
}

}  // namespace flbo
