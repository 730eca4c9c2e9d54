#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <vector>

#include "flbo/mesh.hpp"

namespace flbo {

/// Orthonormal per-face frame U = (u_max, u_min, normal), det U = +1.
struct FaceFrame {
  Eigen::Vector3d u_max = Eigen::Vector3d::UnitX();
  Eigen::Vector3d u_min = Eigen::Vector3d::UnitY();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d u;
    u << u_max, u_min, normal;
    return u;
  }
};

struct CurvatureFrames {
  std::vector<FaceFrame> frames;
  // Principal curvatures of the face-averaged shape operator; kappa_max has the
  // larger magnitude.
  Eigen::VectorXd kappa_max;
  Eigen::VectorXd kappa_min;
  std::vector<int> umbilic_faces;   // tie-broken along the first edge
  std::vector<int> fallback_faces;  // no corner had enough neighbours for a fit
};

/// Per-vertex shape operators as symmetric 3x3 tensors acting on the tangent
/// plane, from a least-squares height-field quadric over the 2-ring. Vertices
/// with too few neighbours get a zero tensor and valid(v) = false.
struct VertexShapeOperators {
  std::vector<Eigen::Matrix3d> tensors;
  std::vector<bool> valid;
  FaceVectorField normals;
};

VertexShapeOperators vertex_shape_operators(const TriangleMesh& mesh);

/// Principal-direction frames: corner shape operators are averaged per face
/// (weighted by each corner's lumped area), projected to the face plane and
/// diagonalised. Near-umbilic faces (|k1 - k2| <= 1e-6 max(|k1|, |k2|, 1/diag))
/// align u_max with the face's first edge.
CurvatureFrames estimate_curvature_frames(const TriangleMesh& mesh);

/// Frame aligned with the first edge of face f (vertex 0 -> vertex 1).
FaceFrame edge_aligned_frame(const TriangleMesh& mesh, int f);

/// CSV with columns face_id, u_max(3), u_min(3), normal(3).
void write_frames_csv(const CurvatureFrames& frames, const std::filesystem::path& path);

}  // namespace flbo
