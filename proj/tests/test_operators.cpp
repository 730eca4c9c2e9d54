#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "flbo/fixtures.hpp"
#include "flbo/io.hpp"
#include "flbo/operators.hpp"
#include "flbo/validation.hpp"
#include "json.hpp"
#include "test_support.hpp"

using namespace flbo;
using flbo::testing::law_of_cosines_cotan;
using flbo::testing::relative_difference;

namespace {

const double kPi = std::numbers::pi;

FaceFrame identity_frame() { return FaceFrame{}; }

double min_generalized_eigenvalue(const OperatorPair& pair) {
  const Eigen::VectorXd s = pair.mass.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd a = -(s.asDiagonal() * Eigen::MatrixXd(pair.stiffness) * s.asDiagonal());
  const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a, Eigen::EigenvaluesOnly).eigenvalues();
  return eig(0) / eig(eig.size() - 1);
}

}  // namespace

TEST_SUITE("operators") {
  TEST_CASE("anisotropy parameters") {
    const AnisotropyParams p{10.0, 0.1, 8};
    const auto thetas = p.theta_values();
    REQUIRE(thetas.size() == 8);
    for (int t = 0; t < 8; ++t) CHECK(thetas[t] == doctest::Approx(t * kPi / 8));
    CHECK_THROWS_AS((AnisotropyParams{10.0, 0.1, 0}.validate()), ConfigError);
    CHECK_THROWS_AS((AnisotropyParams{10.0, -0.1, 8}.validate()), ConfigError);
    CHECK_THROWS_AS((AnisotropyParams{-1.0, 0.1, 8}.validate()), ConfigError);
  }

  TEST_CASE("shear matrices") {
    CHECK(build_shear(identity_frame(), 0.0, 0.7).isApprox(Eigen::Matrix3d::Identity(), 1e-15));
    const Eigen::Matrix3d h0 = build_shear(identity_frame(), 10.0, 0.0);
    CHECK((h0 - Eigen::Matrix3d(Eigen::Vector3d(1.0 / 11, 1, 1).asDiagonal())).norm() < 1e-15);
    const Eigen::Matrix3d h90 = build_shear(identity_frame(), 10.0, kPi / 2);
    CHECK((h90 - Eigen::Matrix3d(Eigen::Vector3d(1, 1.0 / 11, 1).asDiagonal())).norm() < 1e-15);

    // Tilted frame: H keeps the normal as a unit eigenvector.
    FaceFrame tilted;
    const Eigen::Matrix3d r = Eigen::AngleAxisd(0.4, Eigen::Vector3d(1, 1, 0).normalized()).toRotationMatrix();
    tilted.u_max = r.col(0);
    tilted.u_min = r.col(1);
    tilted.normal = r.col(2);
    const Eigen::Matrix3d h = build_shear(tilted, 10.0, 0.3);
    CHECK((h * tilted.normal - tilted.normal).norm() < 1e-14);
    CHECK((h - h.transpose()).norm() < 1e-15);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(h).eigenvalues()(0) == doctest::Approx(1.0 / 11));
  }

  TEST_CASE("face Randers metric") {
    const FaceRanders albo = build_face_randers(identity_frame(), AnisotropyParams{10.0, 0.0, 8}, 0.4);
    CHECK(albo.metric.omega.norm() == 0.0);
    CHECK((albo.diffusivity - albo.shear).norm() < 1e-10);

    const FaceRanders half = build_face_randers(identity_frame(), AnisotropyParams{0.0, 0.5, 1}, 0.0);
    CHECK(half.metric.m.isApprox(Eigen::Matrix3d::Identity(), 1e-15));
    CHECK((half.metric.omega - Eigen::Vector3d(0.5, 0, 0)).norm() < 1e-15);
    CHECK((half.diffusivity - (4.0 / 3.0) * Eigen::Matrix3d::Identity()).norm() < 1e-14);

    const AnisotropyParams p{10.0, 0.1, 8};
    for (double theta : p.theta_values()) {
      const FaceRanders fr = build_face_randers(identity_frame(), p, theta);
      // Quadratic form evaluated directly in frame coordinates.
      const Eigen::Vector3d rotated(std::cos(theta), std::sin(theta), 0);
      const Eigen::Matrix3d h = Eigen::Vector3d(1.0 / 11, 1, 1).asDiagonal();
      const Eigen::Matrix3d rot = Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitZ()).toRotationMatrix();
      const double expected = 0.01 * rotated.dot(rot * h * rot.transpose() * rotated);
      CHECK(fr.drift_norm * fr.drift_norm == doctest::Approx(expected).epsilon(1e-12));
      // The drift turns with the shear, so its norm does not depend on theta.
      CHECK(fr.drift_norm * fr.drift_norm == doctest::Approx(0.01 / 11).epsilon(1e-12));
      CHECK_FALSE(fr.clamped);
    }
  }

  TEST_CASE("drift is clamped below one") {
    const FaceRanders fr = build_face_randers(identity_frame(), AnisotropyParams{0.0, 1.5, 1}, 0.0);
    CHECK(fr.clamped);
    CHECK(fr.requested_drift_norm == doctest::Approx(1.5));
    CHECK(drift_norm(fr.metric) == doctest::Approx(kMaxDriftNorm).epsilon(1e-14));
    CHECK(validate_randers(fr.metric).valid);

    const TriangleMesh sphere = make_icosphere(1);
    const FlboAssembly a = assemble_flbo(sphere, AnisotropyParams{0.0, 2.0, 1}, 0.0);
    CHECK(static_cast<int>(a.field.clamped_faces.size()) == sphere.num_faces());
    CHECK(a.report.max_drift_norm == doctest::Approx(2.0));
  }

  TEST_CASE("lumped mass") {
    const Eigen::VectorXd tri = assemble_mass(make_equilateral_triangle());
    for (int i = 0; i < 3; ++i) CHECK(tri(i) == doctest::Approx(std::sqrt(3.0) / 12).epsilon(1e-14));

    const TriangleMesh rhombus = make_equilateral_pair();
    const Eigen::VectorXd m = assemble_mass(rhombus);
    int shared = 0;
    for (int v = 0; v < 4; ++v)
      if (rhombus.vertex_faces(v).size() == 2) {
        ++shared;
        CHECK(m(v) == doctest::Approx(2 * std::sqrt(3.0) / 12).epsilon(1e-14));
      }
    CHECK(shared == 2);

    const TriangleMesh sphere = make_icosphere(2);
    const Eigen::VectorXd s = assemble_mass(sphere);
    CHECK(s.sum() == doctest::Approx(sphere.total_area()).epsilon(1e-14));
    CHECK((assemble_mass(sphere.scaled(2.5)) - 6.25 * s).cwiseAbs().maxCoeff() < 1e-13);
  }

  TEST_CASE("isotropic stiffness matches cotangent weights") {
    const TriangleMesh rhombus = make_equilateral_pair();
    const std::vector<Eigen::Matrix3d> identity(2, Eigen::Matrix3d::Identity());
    const SparseMatrix w = assemble_stiffness(rhombus, identity).stiffness;
    for (const Edge& e : rhombus.edges())
      if (!e.boundary()) CHECK(w.coeff(e.v0, e.v1) == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(relative_difference(w, law_of_cosines_cotan(rhombus)) < 1e-12);

    const std::vector<Eigen::Matrix3d> scaled(2, 2.5 * Eigen::Matrix3d::Identity());
    CHECK(relative_difference(assemble_stiffness(rhombus, scaled).stiffness, SparseMatrix(2.5 * w)) < 1e-15);

    for (const std::string name : {"square", "icosphere3", "cylinder"}) {
      const TriangleMesh mesh = make_fixture(name);
      const OperatorPair pair = assemble_flbo(mesh, AnisotropyParams{0.0, 0.0, 1}, 0.0).pair;
      CHECK(relative_difference(pair.stiffness, law_of_cosines_cotan(mesh)) < 1e-12);
    }

    CHECK_THROWS_AS(assemble_stiffness(rhombus, std::vector<Eigen::Matrix3d>(1)), InputError);
  }

  TEST_CASE("anisotropic weights equal FEM with the quarter-turned conductivity") {
    // Each face term <e_kj, D e_ki> / sin(angle) is the FEM stiffness of J^T D J,
    // J the quarter turn about the face normal.
    const TriangleMesh mesh = make_torus(2.0, 0.7, 16, 8);
    const FlboAssembly a = assemble_flbo(mesh, AnisotropyParams{10.0, 0.1, 8}, 0.3);
    const auto d = a.field.diffusivities();
    std::vector<Eigen::Matrix3d> turned(d.size());
    for (int f = 0; f < mesh.num_faces(); ++f) {
      const Eigen::Vector3d n = mesh.face_normal(f);
      Eigen::Matrix3d j;
      j << 0, -n.z(), n.y(), n.z(), 0, -n.x(), -n.y(), n.x(), 0;
      turned[f] = j.transpose() * d[f] * j;
    }
    CHECK(relative_difference(a.pair.stiffness, flbo::testing::fem_stiffness(mesh, turned)) < 1e-10);
  }

  TEST_CASE("sliver angles are floored and reported") {
    VertexMatrix v(3, 3);
    v << 0, 0, 0, 1, 0, 0, 0.5, 1e-9, 0;
    FaceMatrix f(1, 3);
    f << 0, 1, 2;
    const TriangleMesh sliver(v, f);
    const StiffnessResult r = assemble_stiffness(sliver, std::vector<Eigen::Matrix3d>(1, Eigen::Matrix3d::Identity()));
    CHECK(r.slivers.size() == 3);
    CHECK(r.stiffness.coeffs().allFinite());
    for (const auto& s : r.slivers) CHECK(s.sine < kMinSine);
  }

  TEST_CASE("operator invariants over the parameter grid") {
    const TriangleMesh mesh = make_icosphere(2);
    for (double level : {0.0, 1.0, 10.0}) {
      for (double tau : {0.0, 0.1, 0.5}) {
        const OperatorFamily family = assemble_family(mesh, AnisotropyParams{level, tau, 8});
        for (const OperatorPair& pair : family.pairs) {
          const SparseMatrix& w = pair.stiffness;
          const double scale = flbo::testing::max_abs(w);
          REQUIRE(flbo::testing::max_abs(SparseMatrix(w - SparseMatrix(w.transpose()))) <= 1e-10 * scale);
          REQUIRE((w * Eigen::VectorXd::Ones(w.cols())).cwiseAbs().maxCoeff() <= 1e-10 * scale);
          REQUIRE(min_generalized_eigenvalue(pair) >= -1e-9);
          REQUIRE((pair.mass.array() > 0).all());
          REQUIRE(pair.mass.sum() == doctest::Approx(mesh.total_area()).epsilon(1e-13));
        }
      }
    }
  }

  TEST_CASE("drift-free family reproduces the shear path") {
    const TriangleMesh mesh = make_icosphere(3);
    const OperatorFamily family = assemble_family(mesh, AnisotropyParams{10.0, 0.0, 8});
    for (size_t t = 0; t < family.pairs.size(); ++t) {
      const auto h = family.fields[t].shears();
      CHECK(relative_difference(family.pairs[t].stiffness, assemble_stiffness(mesh, h).stiffness) < 1e-10);
    }
  }

  TEST_CASE("theta and theta + pi give the same operator") {
    const TriangleMesh mesh = make_torus(2.0, 0.7, 24, 12);
    for (double tau : {0.0, 0.3}) {
      const AnisotropyParams p{10.0, tau, 8};
      const FlboAssembly a = assemble_flbo(mesh, p, 0.3);
      const FlboAssembly b = assemble_flbo(mesh, p, 0.3 + kPi);
      CHECK(relative_difference(a.pair.stiffness, b.pair.stiffness) < 1e-12);
      if (tau > 0) CHECK((a.field.dual_drift() + b.field.dual_drift()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("family layout") {
    const TriangleMesh mesh = make_icosphere(2);
    const OperatorFamily family = assemble_family(mesh, AnisotropyParams{10.0, 0.1, 8});
    REQUIRE(family.pairs.size() == 8);
    for (int t = 0; t < 8; ++t) {
      CHECK(family.pairs[t].theta == doctest::Approx(t * kPi / 8));
      CHECK(family.pairs[t].mass == family.pairs[0].mass);
    }
    const OperatorFamily iso = assemble_family(mesh, AnisotropyParams{0.0, 0.0, 1});
    REQUIRE(iso.pairs.size() == 1);
    CHECK(relative_difference(iso.pairs[0].stiffness, law_of_cosines_cotan(mesh)) < 1e-12);
  }

  TEST_CASE("rigid motion invariance") {
    const TriangleMesh torus = make_torus(2.0, 0.7, 24, 12);
    std::mt19937_64 rng(41);
    const TriangleMesh moved = torus.transformed(random_rotation(rng), Eigen::Vector3d(3, -1, 2));
    const AnisotropyParams p{10.0, 0.1, 8};
    const OperatorFamily a = assemble_family(torus, p);
    const OperatorFamily b = assemble_family(moved, p);
    CHECK((a.pairs[0].mass - b.pairs[0].mass).cwiseAbs().maxCoeff() <= 1e-9 * a.pairs[0].mass.maxCoeff());
    for (size_t t = 0; t < a.pairs.size(); ++t)
      CHECK(relative_difference(b.pairs[t].stiffness, a.pairs[t].stiffness) < 1e-9);
  }

  TEST_CASE("uniform scaling") {
    const TriangleMesh torus = make_torus(2.0, 0.7, 24, 12);
    const AnisotropyParams p{10.0, 0.1, 2};
    const OperatorFamily a = assemble_family(torus, p);
    const OperatorFamily b = assemble_family(torus.scaled(3.0), p);
    CHECK((b.pairs[0].mass - 9.0 * a.pairs[0].mass).cwiseAbs().maxCoeff() < 1e-12 * b.pairs[0].mass.maxCoeff());
    // Weights are ratios of lengths and stay put.
    for (size_t t = 0; t < a.pairs.size(); ++t)
      CHECK(relative_difference(b.pairs[t].stiffness, a.pairs[t].stiffness) < 1e-9);
  }

  TEST_CASE("export and report") {
    flbo::testing::TempDir dir("ops");
    const TriangleMesh mesh = make_icosphere(1);
    const AnisotropyParams p{10.0, 0.1, 4};
    const OperatorFamily family = assemble_family(mesh, p);
    export_family(family, dir.path(), "ico");
    write_assembly_report(family.report, p, dir / "report.json");

    int files = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++files;
    CHECK(files == 6);
    CHECK(read_matrix_market_vector(dir / "ico.S.mtx") == family.pairs[0].mass);
    for (int t = 0; t < 4; ++t) {
      const SparseMatrix w = read_matrix_market(dir / ("ico_theta" + std::to_string(t) + ".W.mtx"));
      CHECK(flbo::testing::max_abs(SparseMatrix(w - family.pairs[t].stiffness)) == 0.0);
    }
    const auto report = nlohmann::json::parse(read_file(dir / "report.json"));
    CHECK(report["n_angles"] == 4);
    CHECK(report["clamped_faces"].size() == 4);
    CHECK(report["sliver_warnings"].empty());
    CHECK(report.contains("frame_fallback_faces"));
  }

  TEST_CASE("constant metric field") {
    RandersMetric<double> metric;
    metric.m = Eigen::Vector3d(2, 3, 4).asDiagonal();
    metric.omega = Eigen::Vector3d(0.2, 0.1, 0);
    const FaceMetricField field = constant_metric_field(5, metric);
    REQUIRE(field.faces.size() == 5);
    CHECK((field.faces[3].shear * metric.m - Eigen::Matrix3d::Identity()).norm() < 1e-14);
    CHECK((field.faces[3].diffusivity - finsler_diffusivity(dual_randers(metric))).norm() == 0.0);
  }
}
