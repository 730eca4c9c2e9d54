#include <Eigen/Dense>

#include <cmath>

#include "doctest.h"
#include "flbo/validation.hpp"
#include "json.hpp"

using namespace flbo;

namespace {

const CheckResult* find(const std::vector<CheckResult>& results, const std::string& name) {
  for (const auto& r : results)
    if (r.name == name) return &r;
  return nullptr;
}

const ValidationCheck& group(int criterion) {
  for (const auto& c : validation_checks())
    if (c.criterion == criterion) return c;
  throw std::runtime_error("no check group");
}

}  // namespace

TEST_SUITE("validation") {
  TEST_CASE("random metrics are admissible") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 500; ++i) {
      const RandersMetric<double> m = random_randers_metric(rng);
      const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(m.m).eigenvalues();
      REQUIRE(eig.minCoeff() >= 0.1 * (1 - 1e-12));
      REQUIRE(eig.maxCoeff() <= 10.0 * (1 + 1e-12));
      REQUIRE(drift_norm(m) <= 0.95 + 1e-12);
      REQUIRE(validate_randers(m).valid);
    }
  }

  TEST_CASE("random rotations") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) {
      const Eigen::Matrix3d r = random_rotation(rng);
      REQUIRE((r.transpose() * r - Eigen::Matrix3d::Identity()).norm() < 1e-12);
      REQUIRE(r.determinant() == doctest::Approx(1.0));
    }
  }

  TEST_CASE("helpers") {
    const std::vector<double> x{1, 2, 4, 8}, y{3, 12, 48, 192};
    CHECK(loglog_slope(x, y) == doctest::Approx(2.0).epsilon(1e-12));
    const Eigen::VectorXd a = Eigen::VectorXd::Constant(4, 1.0), b = Eigen::VectorXd::Constant(4, 2.0);
    CHECK(relative_l2(a, b) == doctest::Approx(0.5));
    CHECK(relative_l2(a, b, Eigen::VectorXd::Constant(4, 3.0)) == doctest::Approx(0.5));
  }

  TEST_CASE("checks are listed in criterion order") {
    const auto& checks = validation_checks();
    REQUIRE(checks.size() == 11);
    for (size_t i = 0; i < checks.size(); ++i) CHECK(checks[i].criterion == static_cast<int>(i) + 1);
  }

  TEST_CASE("fault injection breaks the operator checks but not duality") {
    ValidationOptions bad;
    bad.flip_stiffness_sign = true;
    const auto ops = run_check(group(4), bad);
    const CheckResult* psd = find(ops, "operator.psd");
    REQUIRE(psd != nullptr);
    CHECK_FALSE(psd->passed);
    const auto duality = run_check(group(1), bad);
    for (const auto& r : duality) CHECK(r.passed);
  }

  TEST_CASE("verdicts do not depend on the seed") {
    for (int criterion : {1, 2, 7}) {
      ValidationOptions a, b;
      b.seed = 7;
      const auto ra = run_check(group(criterion), a);
      const auto rb = run_check(group(criterion), b);
      REQUIRE(ra.size() == rb.size());
      for (size_t i = 0; i < ra.size(); ++i) {
        CHECK(ra[i].name == rb[i].name);
        CHECK(ra[i].passed == rb[i].passed);
      }
    }
  }

  TEST_CASE("failures inside a check become failed results") {
    const ValidationCheck boom{3, "boom", [](const ValidationOptions&) -> std::vector<CheckResult> {
                                 throw NumericalError("exploded");
                               }};
    const auto r = run_check(boom, {});
    REQUIRE(r.size() == 1);
    CHECK_FALSE(r[0].passed);
    CHECK(std::isnan(r[0].value));
    CHECK(r[0].detail.find("exploded") != std::string::npos);
  }

  TEST_CASE("report JSON") {
    CheckResult r;
    r.name = "x.y";
    r.criterion = 2;
    r.mesh = "none";
    r.params = {{"tau", 0.1}};
    r.passed = true;
    r.value = 1e-12;
    r.threshold = 1e-10;
    r.slope = 2.0;
    const std::vector<CheckResult> results{r};
    const auto j = nlohmann::json::parse(validation_report_json(results, {}, 1.5));
    CHECK(j["passed"] == true);
    CHECK(j["seed"] == 0);
    const auto& c = j["checks"][0];
    for (const char* key : {"test", "criterion", "mesh", "params", "passed", "value", "threshold", "error_l2_relative",
                            "slope", "flagged_faces", "seconds"})
      CHECK(c.contains(key));
    CHECK(c["error_l2_relative"].is_null());
    CHECK(c["slope"] == 2.0);
    CHECK(c["params"]["tau"] == 0.1);
  }
}
