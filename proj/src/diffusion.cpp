#include "flbo/diffusion.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <string>

#include "flbo/error.hpp"

namespace flbo {

Eigen::VectorXd divergence_of_field(const TriangleMesh& mesh, const FaceVectorField& field) {
  if (field.rows() != mesh.num_faces())
    throw InputError("divergence_of_field: " + std::to_string(field.rows()) + " vectors for " +
                     std::to_string(mesh.num_faces()) + " faces");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Eigen::Vector3d flux = mesh.face_areas()(f) * field.row(f).transpose();
    const Eigen::Vector3d contrib = hat_gradients(mesh, f) * flux;
    for (int c = 0; c < 3; ++c) b(mesh.faces()(f, c)) -= contrib(c);
  }
  return b.cwiseQuotient(assemble_mass(mesh));
}

void DiffusionConfig::validate() const {
  if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ConfigError("t_final must be finite and >= 0");
}

Eigen::VectorXd implicit_euler_diffuse(const OperatorPair& pair, const Eigen::VectorXd& f0,
                                       const DiffusionConfig& config, const std::optional<Eigen::VectorXd>& source,
                                       const StepObserver& observer) {
  config.validate();
  const int n = pair.size();
  if (f0.size() != n) throw InputError("implicit_euler_diffuse: initial field has wrong length");
  const bool use_source = config.source_enabled && source.has_value();
  if (config.source_enabled && !source) throw InputError("implicit_euler_diffuse: source enabled but not given");
  if (use_source && source->size() != n) throw InputError("implicit_euler_diffuse: source has wrong length");

  const double dt = config.t_final / config.n_steps;
  SparseMatrix system = -dt * pair.stiffness;
  for (int i = 0; i < n; ++i) system.coeffRef(i, i) += pair.mass(i);
  Eigen::SimplicialLLT<SparseMatrix> chol(system);
  if (chol.info() != Eigen::Success) {
    const double ratio = (pair.mass.array() / system.diagonal().array().abs()).minCoeff();
    throw NumericalError("implicit_euler_diffuse: Cholesky failed (min S_ii / |A_ii| = " + std::to_string(ratio) + ")");
  }

  const Eigen::VectorXd forcing = use_source ? Eigen::VectorXd(dt * pair.mass.cwiseProduct(*source))
                                             : Eigen::VectorXd(Eigen::VectorXd::Zero(n));
  Eigen::VectorXd f = f0;
  for (int step = 1; step <= config.n_steps; ++step) {
    const Eigen::VectorXd rhs = pair.mass.cwiseProduct(f) + forcing;
    f = chol.solve(rhs);
    if (chol.info() != Eigen::Success) throw NumericalError("implicit_euler_diffuse: solve failed");
    if (observer) observer(step, f);
  }
  return f;
}

Eigen::VectorXd drift_source(const TriangleMesh& mesh, const FaceMetricField& field) {
  return divergence_of_field(mesh, field.dual_drift());
}

Eigen::VectorXd simplified_randers_solve(const TriangleMesh& mesh, const SpectralBasis& basis,
                                         const FaceMetricField& field, const Eigen::VectorXd& f0, double t) {
  if (static_cast<int>(field.faces.size()) != mesh.num_faces())
    throw InputError("simplified_randers_solve: metric field does not match mesh");
  const Eigen::VectorXd homogeneous = heat_propagate(basis, f0, t);
  const Eigen::VectorXd src = drift_source(mesh, field);
  const Eigen::VectorXd g = time_averaged_weights(basis, t);
  return homogeneous + basis.eigenvectors * g.cwiseProduct(basis.project(src));
}

FinslerRhs nonlinear_finsler_rhs(const TriangleMesh& mesh, const FaceMetricField& field, const Eigen::VectorXd& u) {
  if (static_cast<int>(field.faces.size()) != mesh.num_faces())
    throw InputError("nonlinear_finsler_rhs: metric field does not match mesh");
  const FaceVectorField grad = face_gradient(mesh, u);
  FaceVectorField flux = FaceVectorField::Zero(mesh.num_faces(), 3);
  FinslerRhs out;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto& dual = field.faces[f].dual;
    const Eigen::Vector3d g = grad.row(f).transpose();
    const Eigen::Vector3d m_g = dual.m_star * g;
    const double norm = std::sqrt(std::max(0.0, g.dot(m_g)));
    if (norm <= 1e-12) {
      out.flagged_faces.push_back(f);
      continue;
    }
    const double f_star = norm + dual.omega_star.dot(g);
    flux.row(f) = (f_star * (m_g / norm + dual.omega_star)).transpose();
  }
  out.rhs = divergence_of_field(mesh, flux);
  return out;
}

Eigen::VectorXd simplified_finsler_rhs(const TriangleMesh& mesh, const FaceMetricField& field, const Eigen::VectorXd& u) {
  if (static_cast<int>(field.faces.size()) != mesh.num_faces())
    throw InputError("simplified_finsler_rhs: metric field does not match mesh");
  const FaceVectorField grad = face_gradient(mesh, u);
  FaceVectorField flux(mesh.num_faces(), 3);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto& face = field.faces[f];
    flux.row(f) = (face.diffusivity * grad.row(f).transpose() + face.dual.omega_star).transpose();
  }
  return divergence_of_field(mesh, flux);
}

}  // namespace flbo
