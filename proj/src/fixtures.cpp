#include "flbo/fixtures.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "flbo/error.hpp"

namespace flbo {

namespace {

TriangleMesh from_lists(const std::vector<Eigen::Vector3d>& verts, const std::vector<Eigen::Vector3i>& tris) {
  VertexMatrix v(verts.size(), 3);
  for (size_t i = 0; i < verts.size(); ++i) v.row(i) = verts[i].transpose();
  FaceMatrix f(tris.size(), 3);
  for (size_t i = 0; i < tris.size(); ++i) f.row(i) = tris[i].transpose();
  return TriangleMesh(std::move(v), std::move(f));
}

}  // namespace

TriangleMesh make_icosphere(int level, double radius) {
  if (level < 0) throw ConfigError("icosphere level must be >= 0");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> verts = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : verts) p.normalize();
  std::vector<Eigen::Vector3i> tris = {
      {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
      {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};

  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoints;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      const auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      const int id = static_cast<int>(verts.size()) - 1;
      midpoints.emplace(key, id);
      return id;
    };
    std::vector<Eigen::Vector3i> refined;
    refined.reserve(4 * tris.size());
    for (const auto& tri : tris) {
      const int ab = midpoint(tri(0), tri(1));
      const int bc = midpoint(tri(1), tri(2));
      const int ca = midpoint(tri(2), tri(0));
      refined.emplace_back(tri(0), ab, ca);
      refined.emplace_back(tri(1), bc, ab);
      refined.emplace_back(tri(2), ca, bc);
      refined.emplace_back(ab, bc, ca);
    }
    tris = std::move(refined);
  }
  for (auto& p : verts) p *= radius;
  return from_lists(verts, tris);
}

TriangleMesh make_flat_grid(int nx, int ny, double width, double height) {
  if (nx < 1 || ny < 1) throw ConfigError("grid needs at least one cell per direction");
  std::vector<Eigen::Vector3d> verts;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) verts.emplace_back(width * i / nx, height * j / ny, 0.0);
  std::vector<Eigen::Vector3i> tris;
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      tris.emplace_back(id(i, j), id(i + 1, j), id(i + 1, j + 1));
      tris.emplace_back(id(i, j), id(i + 1, j + 1), id(i, j + 1));
    }
  }
  return from_lists(verts, tris);
}

TriangleMesh make_two_triangle_square() {
  return from_lists({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, {{0, 1, 2}, {0, 2, 3}});
}

TriangleMesh make_equilateral_pair() {
  const double h = std::sqrt(3.0) / 2.0;
  return from_lists({{0, 0, 0}, {1, 0, 0}, {0.5, h, 0}, {0.5, -h, 0}}, {{0, 1, 2}, {1, 0, 3}});
}

TriangleMesh make_equilateral_triangle() {
  return from_lists({{0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2.0, 0}}, {{0, 1, 2}});
}

TriangleMesh make_tetrahedron() {
  return from_lists({{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}},
                    {{0, 2, 3}, {0, 3, 1}, {0, 1, 2}, {1, 3, 2}});
}

TriangleMesh make_cylinder(int n_around, int n_along, double radius, double height) {
  if (n_around < 3 || n_along < 1) throw ConfigError("cylinder needs n_around >= 3 and n_along >= 1");
  std::vector<Eigen::Vector3d> verts;
  for (int j = 0; j <= n_along; ++j) {
    for (int i = 0; i < n_around; ++i) {
      const double phi = 2.0 * std::numbers::pi * i / n_around;
      verts.emplace_back(radius * std::cos(phi), radius * std::sin(phi), height * j / n_along);
    }
  }
  std::vector<Eigen::Vector3i> tris;
  auto id = [n_around](int i, int j) { return j * n_around + (i % n_around); };
  for (int j = 0; j < n_along; ++j) {
    for (int i = 0; i < n_around; ++i) {
      tris.emplace_back(id(i, j), id(i + 1, j), id(i + 1, j + 1));
      tris.emplace_back(id(i, j), id(i + 1, j + 1), id(i, j + 1));
    }
  }
  return from_lists(verts, tris);
}

TriangleMesh make_torus(double major_radius, double minor_radius, int n_major, int n_minor) {
  if (n_major < 3 || n_minor < 3) throw ConfigError("torus needs at least 3 segments per direction");
  std::vector<Eigen::Vector3d> verts;
  for (int j = 0; j < n_major; ++j) {
    const double u = 2.0 * std::numbers::pi * j / n_major;
    for (int i = 0; i < n_minor; ++i) {
      const double v = 2.0 * std::numbers::pi * i / n_minor;
      const double r = major_radius + minor_radius * std::cos(v);
      verts.emplace_back(r * std::cos(u), r * std::sin(u), minor_radius * std::sin(v));
    }
  }
  std::vector<Eigen::Vector3i> tris;
  auto id = [n_major, n_minor](int i, int j) { return (j % n_major) * n_minor + (i % n_minor); };
  for (int j = 0; j < n_major; ++j) {
    for (int i = 0; i < n_minor; ++i) {
      tris.emplace_back(id(i, j), id(i + 1, j + 1), id(i + 1, j));
      tris.emplace_back(id(i, j), id(i, j + 1), id(i + 1, j + 1));
    }
  }
  return from_lists(verts, tris);
}

TriangleMesh make_fixture(const std::string& name) {
  if (name.rfind("icosphere", 0) == 0 && name.size() == 10 && std::isdigit(static_cast<unsigned char>(name[9])))
    return make_icosphere(name[9] - '0');
  if (name == "strip") return make_flat_grid(40, 8, 2.0, 0.4);
  if (name == "square") return make_two_triangle_square();
  if (name == "rhombus") return make_equilateral_pair();
  if (name == "triangle") return make_equilateral_triangle();
  if (name == "tetrahedron") return make_tetrahedron();
  if (name == "cylinder") return make_cylinder(48, 24, 1.0, 3.0);
  if (name == "torus") return make_torus(2.0, 0.7, 48, 24);
  throw InputError("unknown fixture '" + name + "'");
}

}  // namespace flbo
