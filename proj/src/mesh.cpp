#include "flbo/mesh.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <numeric>
#include <string>
#include <tuple>

#include "flbo/error.hpp"

namespace flbo {

namespace {

struct HalfEdgeKey {
  int lo, hi;
  int face, corner;
  bool forward;  // face traverses lo -> hi
};

}  // namespace

TriangleMesh::TriangleMesh(VertexMatrix vertices, FaceMatrix faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  const int nv = num_vertices();
  const int nf = num_faces();
  if (nv == 0 || nf == 0) throw InputError("mesh is empty");
  if (!vertices_.allFinite()) throw InputError("mesh has non-finite vertex coordinates");

  for (int f = 0; f < nf; ++f) {
    for (int c = 0; c < 3; ++c) {
      const int v = faces_(f, c);
      if (v < 0 || v >= nv)
        throw InputError("face " + std::to_string(f) + " references vertex " + std::to_string(v) +
                         " out of range [0, " + std::to_string(nv) + ")");
    }
    if (faces_(f, 0) == faces_(f, 1) || faces_(f, 1) == faces_(f, 2) || faces_(f, 0) == faces_(f, 2))
      throw InputError("face " + std::to_string(f) + " repeats a vertex");
  }

  const double diag = bounding_box_diagonal();
  const double min_area = 1e-12 * diag * diag;
  face_areas_.resize(nf);
  face_normals_.resize(nf, 3);
  for (int f = 0; f < nf; ++f) {
    const Eigen::Vector3d p0 = position(faces_(f, 0));
    const Eigen::Vector3d cross = (position(faces_(f, 1)) - p0).cross(position(faces_(f, 2)) - p0);
    const double area = 0.5 * cross.norm();
    if (!(area > min_area))
      throw InputError("face " + std::to_string(f) + " is degenerate (area " + std::to_string(area) + ")");
    face_areas_(f) = area;
    face_normals_.row(f) = (cross / cross.norm()).transpose();
  }

  std::vector<HalfEdgeKey> halfedges;
  halfedges.reserve(3 * static_cast<size_t>(nf));
  for (int f = 0; f < nf; ++f) {
    for (int c = 0; c < 3; ++c) {
      const int a = faces_(f, (c + 1) % 3);
      const int b = faces_(f, (c + 2) % 3);
      halfedges.push_back({std::min(a, b), std::max(a, b), f, c, a < b});
    }
  }
  std::sort(halfedges.begin(), halfedges.end(), [](const HalfEdgeKey& x, const HalfEdgeKey& y) {
    return std::tie(x.lo, x.hi, x.face) < std::tie(y.lo, y.hi, y.face);
  });

  face_edges_.assign(nf, {-1, -1, -1});
  for (size_t i = 0; i < halfedges.size();) {
    size_t j = i;
    while (j < halfedges.size() && halfedges[j].lo == halfedges[i].lo && halfedges[j].hi == halfedges[i].hi) ++j;
    const size_t count = j - i;
    if (count > 2)
      throw InputError("non-manifold edge (" + std::to_string(halfedges[i].lo) + ", " +
                       std::to_string(halfedges[i].hi) + ") shared by " + std::to_string(count) + " faces");
    if (count == 2 && halfedges[i].forward == halfedges[i + 1].forward)
      throw InputError("inconsistent orientation between face " + std::to_string(halfedges[i].face) +
                       " and face " + std::to_string(halfedges[i + 1].face));
    Edge edge;
    edge.v0 = halfedges[i].lo;
    edge.v1 = halfedges[i].hi;
    const int id = static_cast<int>(edges_.size());
    for (size_t h = i; h < j; ++h) {
      edge.faces[h - i] = halfedges[h].face;
      face_edges_[halfedges[h].face][halfedges[h].corner] = id;
    }
    edges_.push_back(edge);
    i = j;
  }

  neighbors_.assign(nv, {});
  vertex_faces_.assign(nv, {});
  for (const Edge& e : edges_) {
    neighbors_[e.v0].push_back(e.v1);
    neighbors_[e.v1].push_back(e.v0);
  }
  for (auto& n : neighbors_) std::sort(n.begin(), n.end());
  for (int f = 0; f < nf; ++f)
    for (int c = 0; c < 3; ++c) vertex_faces_[faces_(f, c)].push_back(f);
  for (int v = 0; v < nv; ++v)
    if (vertex_faces_[v].empty()) throw InputError("vertex " + std::to_string(v) + " is not referenced by any face");
}

double TriangleMesh::bounding_box_diagonal() const {
  return (vertices_.colwise().maxCoeff() - vertices_.colwise().minCoeff()).norm();
}

int TriangleMesh::num_boundary_edges() const {
  return static_cast<int>(std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return e.boundary(); }));
}

TriangleMesh TriangleMesh::transformed(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation) const {
  VertexMatrix moved = (vertices_ * rotation.transpose()).rowwise() + translation.transpose();
  return TriangleMesh(std::move(moved), faces_);
}

TriangleMesh TriangleMesh::scaled(double factor) const { return TriangleMesh(vertices_ * factor, faces_); }

namespace {

EdgeCorner make_corner(const TriangleMesh& mesh, const Edge& edge, int face) {
  const auto& tri = mesh.faces().row(face);
  int k = -1;
  for (int c = 0; c < 3; ++c)
    if (tri(c) != edge.v0 && tri(c) != edge.v1) k = tri(c);
  EdgeCorner corner;
  corner.face = face;
  corner.vertex = k;
  const Eigen::Vector3d pk = mesh.position(k);
  corner.to_i = (mesh.position(edge.v0) - pk).normalized();
  corner.to_j = (mesh.position(edge.v1) - pk).normalized();
  corner.angle = std::atan2(corner.to_i.cross(corner.to_j).norm(), corner.to_i.dot(corner.to_j));
  return corner;
}

}  // namespace

std::vector<EdgeWedge> edge_opposite_angles(const TriangleMesh& mesh) {
  std::vector<EdgeWedge> wedges(mesh.edges().size());
  for (size_t e = 0; e < wedges.size(); ++e) {
    const Edge& edge = mesh.edges()[e];
    wedges[e].first = make_corner(mesh, edge, edge.faces[0]);
    if (!edge.boundary()) wedges[e].second = make_corner(mesh, edge, edge.faces[1]);
  }
  return wedges;
}

Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> face_corner_angles(const TriangleMesh& mesh) {
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> angles(mesh.num_faces(), 3);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    for (int c = 0; c < 3; ++c) {
      const Eigen::Vector3d p = mesh.position(mesh.faces()(f, c));
      const Eigen::Vector3d a = mesh.position(mesh.faces()(f, (c + 1) % 3)) - p;
      const Eigen::Vector3d b = mesh.position(mesh.faces()(f, (c + 2) % 3)) - p;
      angles(f, c) = std::atan2(a.cross(b).norm(), a.dot(b));
    }
  }
  return angles;
}

Eigen::Matrix3d hat_gradients(const TriangleMesh& mesh, int f) {
  const Eigen::Vector3d n = mesh.face_normal(f);
  const double two_area = 2.0 * mesh.face_areas()(f);
  Eigen::Matrix3d grads;
  for (int c = 0; c < 3; ++c) {
    const Eigen::Vector3d pj = mesh.position(mesh.faces()(f, (c + 1) % 3));
    const Eigen::Vector3d pk = mesh.position(mesh.faces()(f, (c + 2) % 3));
    grads.row(c) = (n.cross(pk - pj) / two_area).transpose();
  }
  return grads;
}

FaceVectorField face_gradient(const TriangleMesh& mesh, const Eigen::VectorXd& f) {
  if (f.size() != mesh.num_vertices())
    throw InputError("face_gradient: field has " + std::to_string(f.size()) + " values, mesh has " +
                     std::to_string(mesh.num_vertices()) + " vertices");
  FaceVectorField grad(mesh.num_faces(), 3);
  for (int face = 0; face < mesh.num_faces(); ++face) {
    const Eigen::Matrix3d g = hat_gradients(mesh, face);
    const Eigen::Vector3d values(f(mesh.faces()(face, 0)), f(mesh.faces()(face, 1)), f(mesh.faces()(face, 2)));
    grad.row(face) = values.transpose() * g;
  }
  return grad;
}

int connected_components(const TriangleMesh& mesh) {
  std::vector<int> parent(mesh.num_vertices());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const Edge& e : mesh.edges()) parent[find(e.v0)] = find(e.v1);
  int count = 0;
  for (int v = 0; v < mesh.num_vertices(); ++v) count += find(v) == v;
  return count;
}

}  // namespace flbo
