#include "flbo/curvature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "flbo/error.hpp"

namespace flbo {

namespace {

FaceVectorField angle_weighted_normals(const TriangleMesh& mesh) {
  FaceVectorField normals = FaceVectorField::Zero(mesh.num_vertices(), 3);
  const auto angles = face_corner_angles(mesh);
  for (int f = 0; f < mesh.num_faces(); ++f)
    for (int c = 0; c < 3; ++c) normals.row(mesh.faces()(f, c)) += angles(f, c) * mesh.face_normals().row(f);
  normals.rowwise().normalize();
  return normals;
}

std::vector<int> two_ring(const TriangleMesh& mesh, int v) {
  std::vector<int> ring;
  for (int n : mesh.vertex_neighbors(v)) {
    ring.push_back(n);
    for (int m : mesh.vertex_neighbors(n))
      if (m != v) ring.push_back(m);
  }
  std::sort(ring.begin(), ring.end());
  ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
  return ring;
}

// Any unit vector orthogonal to n.
Eigen::Vector3d orthogonal_unit(const Eigen::Vector3d& n) {
  Eigen::Index axis;
  n.cwiseAbs().minCoeff(&axis);
  return n.cross(Eigen::Vector3d::Unit(axis)).normalized();
}

}  // namespace

VertexShapeOperators vertex_shape_operators(const TriangleMesh& mesh) {
  const int nv = mesh.num_vertices();
  VertexShapeOperators out;
  out.normals = angle_weighted_normals(mesh);
  out.tensors.assign(nv, Eigen::Matrix3d::Zero());
  out.valid.assign(nv, false);

  for (int v = 0; v < nv; ++v) {
    const std::vector<int> ring = two_ring(mesh, v);
    if (ring.size() < 3) continue;
    const Eigen::Vector3d n = out.normals.row(v).transpose();
    Eigen::Matrix3d basis;
    basis.col(0) = orthogonal_unit(n);
    basis.col(1) = n.cross(basis.col(0));
    basis.col(2) = n;

    const Eigen::Index m = static_cast<Eigen::Index>(ring.size());
    Eigen::MatrixX3d local(m, 3);
    for (Eigen::Index r = 0; r < m; ++r)
      local.row(r) = ((mesh.position(ring[r]) - mesh.position(v)).transpose() * basis);

    // z = a x^2 + b xy + c y^2 (+ d x + e y when there are enough samples).
    const bool with_linear = m >= 5;
    Eigen::MatrixXd design(m, with_linear ? 5 : 3);
    for (Eigen::Index r = 0; r < m; ++r) {
      const double x = local(r, 0), y = local(r, 1);
      design(r, 0) = x * x;
      design(r, 1) = x * y;
      design(r, 2) = y * y;
      if (with_linear) {
        design(r, 3) = x;
        design(r, 4) = y;
      }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < design.cols()) continue;
    const Eigen::VectorXd coef = qr.solve(local.col(2));

    const double a = coef(0), b = coef(1), c = coef(2);
    const double d = with_linear ? coef(3) : 0.0;
    const double e = with_linear ? coef(4) : 0.0;
    const double w = std::sqrt(1.0 + d * d + e * e);
    Eigen::Matrix2d first;
    first << 1.0 + d * d, d * e, d * e, 1.0 + e * e;
    Eigen::Matrix2d second;
    second << 2.0 * a, b, b, 2.0 * c;
    second /= w;
    Eigen::Matrix<double, 3, 2> jac;
    jac << 1.0, 0.0, 0.0, 1.0, d, e;
    const Eigen::Matrix2d first_inv = first.inverse();
    const Eigen::Matrix3d local_tensor = jac * first_inv * second * first_inv * jac.transpose();
    Eigen::Matrix3d tensor = basis * local_tensor * basis.transpose();
    out.tensors[v] = 0.5 * (tensor + tensor.transpose());
    out.valid[v] = true;
  }
  return out;
}

FaceFrame edge_aligned_frame(const TriangleMesh& mesh, int f) {
  FaceFrame frame;
  frame.normal = mesh.face_normal(f);
  frame.u_max = (mesh.position(mesh.faces()(f, 1)) - mesh.position(mesh.faces()(f, 0))).normalized();
  frame.u_min = frame.normal.cross(frame.u_max);
  return frame;
}

CurvatureFrames estimate_curvature_frames(const TriangleMesh& mesh) {
  const VertexShapeOperators shape = vertex_shape_operators(mesh);
  const int nf = mesh.num_faces();

  Eigen::VectorXd lumped = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (int f = 0; f < nf; ++f)
    for (int c = 0; c < 3; ++c) lumped(mesh.faces()(f, c)) += mesh.face_areas()(f) / 3.0;

  const double inv_diag = 1.0 / mesh.bounding_box_diagonal();

  CurvatureFrames out;
  out.frames.resize(nf);
  out.kappa_max = Eigen::VectorXd::Zero(nf);
  out.kappa_min = Eigen::VectorXd::Zero(nf);

  for (int f = 0; f < nf; ++f) {
    FaceFrame frame = edge_aligned_frame(mesh, f);
    Eigen::Matrix3d tensor = Eigen::Matrix3d::Zero();
    double weight = 0.0;
    for (int c = 0; c < 3; ++c) {
      const int v = mesh.faces()(f, c);
      if (!shape.valid[v]) continue;
      tensor += lumped(v) * shape.tensors[v];
      weight += lumped(v);
    }
    if (weight == 0.0) {
      out.fallback_faces.push_back(f);
      out.frames[f] = frame;
      continue;
    }
    tensor /= weight;

    Eigen::Matrix<double, 3, 2> plane;
    plane << frame.u_max, frame.u_min;
    const Eigen::Matrix2d restricted = plane.transpose() * tensor * plane;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(0.5 * (restricted + restricted.transpose()));
    int major = std::abs(eig.eigenvalues()(1)) >= std::abs(eig.eigenvalues()(0)) ? 1 : 0;
    const double k_major = eig.eigenvalues()(major);
    const double k_minor = eig.eigenvalues()(1 - major);
    out.kappa_max(f) = k_major;
    out.kappa_min(f) = k_minor;

    const double scale = std::max({std::abs(k_major), std::abs(k_minor), inv_diag});
    if (std::abs(k_major - k_minor) <= 1e-6 * scale) {
      out.umbilic_faces.push_back(f);
      out.frames[f] = frame;
      continue;
    }

    Eigen::Vector3d dir = (plane * eig.eigenvectors().col(major)).normalized();
    // Deterministic sign: non-negative component along the first edge.
    const double along = dir.dot(frame.u_max);
    if (along < 0.0 || (std::abs(along) < 1e-12 && dir.dot(frame.u_min) < 0.0)) dir = -dir;
    frame.u_max = dir;
    frame.u_min = frame.normal.cross(dir);
    out.frames[f] = frame;
  }
  return out;
}

void write_frames_csv(const CurvatureFrames& frames, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "face_id,u_max_x,u_max_y,u_max_z,u_min_x,u_min_y,u_min_z,normal_x,normal_y,normal_z\n";
  out << std::setprecision(17);
  for (size_t f = 0; f < frames.frames.size(); ++f) {
    const FaceFrame& fr = frames.frames[f];
    out << f;
    for (const auto* v : {&fr.u_max, &fr.u_min, &fr.normal})
      for (int c = 0; c < 3; ++c) out << ',' << (*v)(c);
    out << '\n';
  }
}

}  // namespace flbo
