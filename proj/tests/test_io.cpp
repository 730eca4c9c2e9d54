#include <cmath>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "flbo/error.hpp"
#include "flbo/io.hpp"
#include "test_support.hpp"

using namespace flbo;
using flbo::testing::TempDir;

TEST_SUITE("io") {
  TEST_CASE("doubles round trip through text") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::numeric_limits<double>::min(), 0.0})
      CHECK(std::stod(format_double(v)) == v);
  }

  TEST_CASE("symmetric coordinate round trip") {
    TempDir dir("io");
    Eigen::SparseMatrix<double> m(4, 4);
    std::vector<Eigen::Triplet<double>> t{{0, 0, -2.0}, {1, 1, -1.0 / 3.0}, {0, 1, 0.7}, {1, 0, 0.7},
                                          {3, 2, 1e-17}, {2, 3, 1e-17}, {2, 2, 4.0}};
    m.setFromTriplets(t.begin(), t.end());
    const std::string text = matrix_market_symmetric(m);
    CHECK(text.rfind("%%MatrixMarket matrix coordinate real symmetric", 0) == 0);
    write_file_atomic(dir / "m.mtx", text);
    const Eigen::SparseMatrix<double> back = read_matrix_market(dir / "m.mtx");
    CHECK(Eigen::MatrixXd(back) == Eigen::MatrixXd(m));
  }

  TEST_CASE("array round trip") {
    TempDir dir("io");
    const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(7, 0.1, 1.3);
    write_file_atomic(dir / "v.mtx", matrix_market_array(v));
    CHECK(read_matrix_market_vector(dir / "v.mtx") == v);
  }

  TEST_CASE("malformed Matrix Market files") {
    TempDir dir("io");
    write_file_atomic(dir / "a.mtx", "hello\n");
    CHECK_THROWS_AS(read_matrix_market(dir / "a.mtx"), InputError);
    write_file_atomic(dir / "b.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n");
    CHECK_THROWS_AS(read_matrix_market(dir / "b.mtx"), InputError);
    write_file_atomic(dir / "c.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n");
    CHECK_THROWS_AS(read_matrix_market(dir / "c.mtx"), InputError);
    CHECK_THROWS_AS(read_matrix_market(dir / "missing.mtx"), InputError);
  }

  TEST_CASE("CSV") {
    TempDir dir("io");
    Eigen::MatrixXd m(2, 3);
    m << 1, 2.5, -3, 0.125, 1e-20, 7;
    write_file_atomic(dir / "m.csv", csv_matrix(m, {"a", "b", "c"}));
    std::ifstream in(dir / "m.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "a,b,c");
    CHECK(read_csv_matrix(dir / "m.csv") == m);

    write_file_atomic(dir / "ragged.csv", "1,2\n3\n");
    CHECK_THROWS_AS(read_csv_matrix(dir / "ragged.csv"), InputError);
    write_file_atomic(dir / "empty.csv", "x,y\n");
    CHECK_THROWS_AS(read_csv_matrix(dir / "empty.csv"), InputError);
  }

  TEST_CASE("atomic write replaces the file and leaves no temporaries") {
    TempDir dir("io");
    write_file_atomic(dir / "f.txt", "first");
    write_file_atomic(dir / "f.txt", "second");
    CHECK(read_file(dir / "f.txt") == "second");
    int entries = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++entries;
    CHECK(entries == 1);
    CHECK_THROWS_AS(write_file_atomic(dir / "no/such/dir/f.txt", "x"), InputError);
    CHECK_THROWS_AS(read_file(dir / "absent.txt"), InputError);
  }
}
