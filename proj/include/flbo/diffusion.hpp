#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <vector>

#include "flbo/mesh.hpp"
#include "flbo/operators.hpp"
#include "flbo/spectral.hpp"

namespace flbo {

/// Weak divergence of a per-face field: b_i = -sum_f area_f <field_f, grad phi_i>,
/// returned pointwise as S^{-1} b. Adjoint of face_gradient, so that
/// divergence_of_field(face_gradient(f)) = S^{-1} W_iso f.
Eigen::VectorXd divergence_of_field(const TriangleMesh& mesh, const FaceVectorField& field);

struct DiffusionConfig {
  double t_final = 0.1;
  int n_steps = 1000;
  bool source_enabled = false;

  void validate() const;
};

/// Called after each step with (step index starting at 1, current field).
using StepObserver = std::function<void(int, const Eigen::VectorXd&)>;

/// Backward Euler: (S - dt W) f^{m+1} = S f^m + dt S source, one sparse Cholesky
/// factorisation reused across steps. The source is used only when
/// config.source_enabled is set.
Eigen::VectorXd implicit_euler_diffuse(const OperatorPair& pair, const Eigen::VectorXd& f0,
                                       const DiffusionConfig& config,
                                       const std::optional<Eigen::VectorXd>& source = std::nullopt,
                                       const StepObserver& observer = {});

/// The source term div(omega*) of the simplified equation, one value per vertex.
Eigen::VectorXd drift_source(const TriangleMesh& mesh, const FaceMetricField& field);

/// Solution of du/dt = -L u + div(omega*): homogeneous heat flow of f0 plus the
/// source convolved with the time-averaged kernel.
Eigen::VectorXd simplified_randers_solve(const TriangleMesh& mesh, const SpectralBasis& basis,
                                         const FaceMetricField& field, const Eigen::VectorXd& f0, double t);

struct FinslerRhs {
  Eigen::VectorXd rhs;
  std::vector<int> flagged_faces;  // |grad u|_{M*} <= 1e-12; flux set to zero
};

/// div( F*(grad u) (M* grad u / |grad u|_{M*} + omega*) ), one explicit evaluation.
FinslerRhs nonlinear_finsler_rhs(const TriangleMesh& mesh, const FaceMetricField& field, const Eigen::VectorXd& u);

/// div( (M* - omega* omega*^T) grad u ) + div(omega*), evaluated with the same
/// face-wise discretisation as nonlinear_finsler_rhs.
Eigen::VectorXd simplified_finsler_rhs(const TriangleMesh& mesh, const FaceMetricField& field, const Eigen::VectorXd& u);

}  // namespace flbo
