#include <Eigen/Geometry>

#include <cmath>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "flbo/error.hpp"
#include "flbo/fixtures.hpp"
#include "flbo/io.hpp"
#include "flbo/mesh.hpp"
#include "test_support.hpp"

using namespace flbo;
using flbo::testing::TempDir;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string load_error(const std::filesystem::path& p) {
  try {
    load_mesh(p);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

const double kPi = std::numbers::pi;

}  // namespace

TEST_SUITE("mesh") {
  TEST_CASE("OFF tetrahedron") {
    TempDir dir("mesh");
    write_text(dir / "tet.off",
               "OFF\n# regular tetrahedron\n4 4 6\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n"
               "3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n");
    const TriangleMesh mesh = load_mesh(dir / "tet.off");
    CHECK(mesh.num_vertices() == 4);
    CHECK(mesh.num_faces() == 4);
    CHECK(mesh.num_edges() == 6);
    CHECK(mesh.num_boundary_edges() == 0);
    CHECK(mesh.num_vertices() - mesh.num_edges() + mesh.num_faces() == 2);
  }

  TEST_CASE("OBJ with texture and normal indices") {
    TempDir dir("mesh");
    write_text(dir / "tri.obj", "# one triangle\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvn 0 0 1\nf 1/1/1 2/1/1 3/1/1\n");
    const TriangleMesh mesh = load_mesh(dir / "tri.obj");
    CHECK(mesh.num_vertices() == 3);
    CHECK(mesh.num_faces() == 1);
    CHECK(mesh.num_boundary_edges() == 3);

    write_text(dir / "neg.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n");
    CHECK(load_mesh(dir / "neg.obj").faces().row(0) == Eigen::RowVector3i(0, 1, 2));
  }

  TEST_CASE("polygons are fan-triangulated from their first vertex") {
    TempDir dir("mesh");
    write_text(dir / "quad.off", "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n");
    const TriangleMesh mesh = load_mesh(dir / "quad.off");
    REQUIRE(mesh.num_faces() == 2);
    CHECK(mesh.faces().row(0) == Eigen::RowVector3i(0, 1, 2));
    CHECK(mesh.faces().row(1) == Eigen::RowVector3i(0, 2, 3));
  }

  TEST_CASE("icosphere vertex counts") {
    for (int level = 0; level <= 4; ++level) {
      const TriangleMesh mesh = make_icosphere(level);
      const int expected = 10 * (1 << (2 * level)) + 2;
      CHECK(mesh.num_vertices() == expected);
      CHECK(mesh.num_faces() == 2 * expected - 4);
    }
  }

  TEST_CASE("load errors name the offending element") {
    TempDir dir("mesh");
    write_text(dir / "empty.off", "");
    CHECK_FALSE(load_error(dir / "empty.off").empty());

    write_text(dir / "garbage.off", "OFF\n3 1 0\n0 0 0\n1 x 0\n0 1 0\n3 0 1 2\n");
    CHECK(load_error(dir / "garbage.off").find("bad vertex") != std::string::npos);

    write_text(dir / "range.off", "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n");
    CHECK(load_error(dir / "range.off").find("face 0") != std::string::npos);

    write_text(dir / "degenerate.off", "OFF\n4 2 0\n0 0 0\n1 0 0\n0 1 0\n2 0 0\n3 0 1 2\n3 0 1 3\n");
    CHECK(load_error(dir / "degenerate.off").find("face 1") != std::string::npos);

    write_text(dir / "fan.off",
               "OFF\n5 3 0\n0 0 0\n1 0 0\n0 1 0\n0 -1 0\n0 0 1\n3 0 1 2\n3 1 0 3\n3 0 1 4\n");
    CHECK(load_error(dir / "fan.off").find("non-manifold") != std::string::npos);

    write_text(dir / "flipped.off", "OFF\n4 2 0\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n3 0 1 2\n3 1 2 3\n");
    CHECK(load_error(dir / "flipped.off").find("orientation") != std::string::npos);

    write_text(dir / "lonely.off", "OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n5 5 5\n3 0 1 2\n");
    CHECK(load_error(dir / "lonely.off").find("vertex 3") != std::string::npos);

    CHECK_THROWS_AS(load_mesh(dir / "missing.off"), InputError);
    CHECK_THROWS_AS(load_mesh(dir / "mesh.ply"), InputError);
  }

  TEST_CASE("degeneracy threshold is scale free") {
    VertexMatrix v(3, 3);
    v << 0, 0, 0, 1e-6, 0, 0, 0, 1e-6, 0;
    FaceMatrix f(1, 3);
    f << 0, 1, 2;
    CHECK_NOTHROW(TriangleMesh(v, f));
  }

  TEST_CASE("OFF round trip is bit exact") {
    TempDir dir("mesh");
    const TriangleMesh mesh = make_torus(1.3, 0.31, 17, 9);
    write_off(mesh, dir / "torus.off");
    const TriangleMesh back = load_mesh(dir / "torus.off");
    CHECK(back.vertices() == mesh.vertices());
    CHECK(back.faces() == mesh.faces());
  }

  TEST_CASE("bundled fixture files match the generators") {
    for (const std::string name : {"icosphere2", "icosphere3", "icosphere4", "strip", "square", "tetrahedron"}) {
      const std::filesystem::path file = std::filesystem::path(FLBO_DATA_DIR) / (name + ".off");
      REQUIRE(std::filesystem::exists(file));
      const TriangleMesh generated = make_fixture(name);
      const TriangleMesh loaded = load_mesh(file);
      CHECK(loaded.vertices() == generated.vertices());
      CHECK(loaded.faces() == generated.faces());
    }
  }

  TEST_CASE("opposite angles") {
    const auto equilateral = edge_opposite_angles(make_equilateral_triangle());
    REQUIRE(equilateral.size() == 3);
    for (const auto& w : equilateral) {
      CHECK(w.first.angle == doctest::Approx(kPi / 3).epsilon(1e-14));
      CHECK_FALSE(w.second.has_value());
    }

    VertexMatrix v(3, 3);
    v << 0, 0, 0, 1, 0, 0, 0, 1, 0;
    FaceMatrix f(1, 3);
    f << 0, 1, 2;
    const TriangleMesh right(v, f);
    const auto angles = edge_opposite_angles(right);
    for (size_t e = 0; e < angles.size(); ++e) {
      const Edge& edge = right.edges()[e];
      if (edge.v0 == 1 && edge.v1 == 2) CHECK(angles[e].first.angle == doctest::Approx(kPi / 2).epsilon(1e-14));
    }

    const TriangleMesh square = make_two_triangle_square();
    const auto sq = edge_opposite_angles(square);
    int interior = 0;
    for (size_t e = 0; e < sq.size(); ++e) {
      if (square.edges()[e].boundary()) continue;
      ++interior;
      REQUIRE(sq[e].second.has_value());
      CHECK(sq[e].first.angle == doctest::Approx(kPi / 2).epsilon(1e-14));
      CHECK(sq[e].second->angle == doctest::Approx(kPi / 2).epsilon(1e-14));
    }
    CHECK(interior == 1);
  }

  TEST_CASE("corner data is consistent") {
    const TriangleMesh mesh = make_icosphere(2);
    const auto wedges = edge_opposite_angles(mesh);
    for (size_t e = 0; e < wedges.size(); ++e) {
      const Edge& edge = mesh.edges()[e];
      for (const EdgeCorner* c : {&wedges[e].first, wedges[e].second ? &*wedges[e].second : nullptr}) {
        if (!c) continue;
        REQUIRE(std::abs(c->to_i.norm() - 1) < 1e-12);
        REQUIRE(std::abs(c->to_j.norm() - 1) < 1e-12);
        REQUIRE(c->angle > 0);
        REQUIRE(c->angle < kPi);
        const Eigen::Vector3d to_i = (mesh.position(edge.v0) - mesh.position(c->vertex)).normalized();
        REQUIRE((c->to_i - to_i).norm() < 1e-12);
        REQUIRE(std::abs(std::acos(c->to_i.dot(c->to_j)) - c->angle) < 1e-12);
      }
    }
    const auto corners = face_corner_angles(mesh);
    CHECK((corners.rowwise().sum().array() - kPi).abs().maxCoeff() < 1e-10);
  }

  TEST_CASE("face gradient") {
    const TriangleMesh grid = make_flat_grid(6, 5, 2.0, 1.0);
    CHECK(face_gradient(grid, Eigen::VectorXd::Constant(grid.num_vertices(), 3.0)).cwiseAbs().maxCoeff() < 1e-12);

    const FaceVectorField g = face_gradient(grid, grid.vertices().col(0));
    for (int f = 0; f < grid.num_faces(); ++f)
      REQUIRE((g.row(f) - Eigen::RowVector3d(1, 0, 0)).norm() < 1e-12);

    CHECK_THROWS_AS(face_gradient(grid, Eigen::VectorXd::Zero(3)), InputError);
  }

  TEST_CASE("face gradient of a smooth field on the sphere converges") {
    double previous = 1.0;
    for (int level : {2, 3, 4}) {
      const TriangleMesh sphere = make_icosphere(level);
      const Eigen::VectorXd xy = sphere.vertices().col(0).cwiseProduct(sphere.vertices().col(1));
      const FaceVectorField g = face_gradient(sphere, xy);
      double worst = 0;
      for (int f = 0; f < sphere.num_faces(); ++f) {
        REQUIRE(std::abs(g.row(f).dot(sphere.face_normal(f).transpose())) < 1e-12);
        Eigen::Vector3d c = Eigen::Vector3d::Zero();
        for (int k = 0; k < 3; ++k) c += sphere.position(sphere.faces()(f, k)) / 3.0;
        const Eigen::Vector3d n = c.normalized();
        const Eigen::Vector3d ambient(n.y(), n.x(), 0.0);
        const Eigen::Vector3d tangential = ambient - ambient.dot(n) * n;
        worst = std::max(worst, (g.row(f).transpose() - tangential).norm());
      }
      CHECK(worst < 0.75 * previous);
      previous = worst;
    }
  }

  TEST_CASE("hat gradients sum to zero and reproduce linear fields") {
    const TriangleMesh mesh = make_torus(2.0, 0.5, 10, 6);
    for (int f = 0; f < mesh.num_faces(); ++f) {
      const Eigen::Matrix3d h = hat_gradients(mesh, f);
      REQUIRE(h.colwise().sum().norm() < 1e-12);
    }
  }

  TEST_CASE("connected components") {
    const TriangleMesh two = flbo::testing::disjoint_union(make_tetrahedron(), make_tetrahedron(), Eigen::Vector3d(5, 0, 0));
    CHECK(connected_components(two) == 2);
    CHECK(connected_components(make_icosphere(1)) == 1);
  }

  TEST_CASE("rigid motion and scaling") {
    const TriangleMesh mesh = make_icosphere(1);
    const Eigen::Matrix3d r = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
    const TriangleMesh moved = mesh.transformed(r, Eigen::Vector3d(1, -2, 0.5));
    CHECK((moved.face_areas() - mesh.face_areas()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(mesh.scaled(3.0).total_area() == doctest::Approx(9.0 * mesh.total_area()).epsilon(1e-14));
  }
}
