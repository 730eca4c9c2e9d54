#pragma once

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

namespace flbo {

using VertexMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using FaceMatrix = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;
/// One 3-vector per face (gradients, fluxes).
using FaceVectorField = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// An undirected edge (v0 < v1) and its one or two incident faces.
struct Edge {
  int v0 = -1;
  int v1 = -1;
  std::array<int, 2> faces{-1, -1};
  bool boundary() const { return faces[1] < 0; }
};

/// Immutable indexed triangle mesh with derived edge adjacency, face areas and
/// unit normals. Construction validates index ranges, degeneracy, manifoldness
/// and orientation consistency.
class TriangleMesh {
 public:
  TriangleMesh(VertexMatrix vertices, FaceMatrix faces);

  int num_vertices() const { return static_cast<int>(vertices_.rows()); }
  int num_faces() const { return static_cast<int>(faces_.rows()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const VertexMatrix& vertices() const { return vertices_; }
  const FaceMatrix& faces() const { return faces_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Eigen::VectorXd& face_areas() const { return face_areas_; }
  const FaceVectorField& face_normals() const { return face_normals_; }

  Eigen::Vector3d position(int v) const { return vertices_.row(v).transpose(); }
  Eigen::Vector3d face_normal(int f) const { return face_normals_.row(f).transpose(); }
  /// Indices into edges() of the three edges of face f, edge c opposite corner c.
  const std::array<int, 3>& face_edges(int f) const { return face_edges_[f]; }

  double total_area() const { return face_areas_.sum(); }
  double bounding_box_diagonal() const;
  int num_boundary_edges() const;
  /// Vertices adjacent to v through an edge, ascending.
  const std::vector<int>& vertex_neighbors(int v) const { return neighbors_[v]; }
  /// Faces incident to v, ascending.
  const std::vector<int>& vertex_faces(int v) const { return vertex_faces_[v]; }

  /// Copy with every vertex mapped through p -> rotation * p + translation.
  TriangleMesh transformed(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation) const;
  TriangleMesh scaled(double factor) const;

 private:
  VertexMatrix vertices_;
  FaceMatrix faces_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> face_edges_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<int>> vertex_faces_;
  Eigen::VectorXd face_areas_;
  FaceVectorField face_normals_;
};

enum class MeshFormat { off, obj };

/// Reads OFF or OBJ (positions and faces only). Polygons are fan-triangulated from
/// their first vertex. The format is inferred from the extension when not given.
TriangleMesh load_mesh(const std::filesystem::path& path, std::optional<MeshFormat> format = {});
void write_off(const TriangleMesh& mesh, const std::filesystem::path& path);

// The interior angle at the corner opposite an edge, and the unit vectors from that
// corner towards the edge endpoints i (= Edge::v0) and j (= Edge::v1).
struct EdgeCorner {
  int face = -1;
  int vertex = -1;
  double angle = 0;
  Eigen::Vector3d to_i = Eigen::Vector3d::Zero();
  Eigen::Vector3d to_j = Eigen::Vector3d::Zero();
};

struct EdgeWedge {
  EdgeCorner first;                  // corner k in the first incident face
  std::optional<EdgeCorner> second;  // corner h, absent on boundary edges
};

/// Opposite-corner data per edge, indexed like TriangleMesh::edges().
std::vector<EdgeWedge> edge_opposite_angles(const TriangleMesh& mesh);

/// Interior angles of every face; column c is the angle at corner c.
Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> face_corner_angles(const TriangleMesh& mesh);

/// Exact gradient of the piecewise-linear interpolant of f on each face.
FaceVectorField face_gradient(const TriangleMesh& mesh, const Eigen::VectorXd& f);

/// Gradients of the three hat functions of face f, row c for corner c.
Eigen::Matrix3d hat_gradients(const TriangleMesh& mesh, int f);

/// Number of connected components of the vertex graph.
int connected_components(const TriangleMesh& mesh);

}  // namespace flbo
