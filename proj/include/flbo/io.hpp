#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace flbo {

/// Writes contents to a temporary sibling and renames it over path.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// Matrix Market "coordinate real symmetric", lower triangle only.
std::string matrix_market_symmetric(const Eigen::SparseMatrix<double>& m);
/// Matrix Market "array real general" column vector.
std::string matrix_market_array(const Eigen::VectorXd& v);

/// Reads coordinate (general or symmetric) or array files into a sparse matrix.
Eigen::SparseMatrix<double> read_matrix_market(const std::filesystem::path& path);
/// Reads an array-format (or n x 1 / diagonal coordinate) file as a vector.
Eigen::VectorXd read_matrix_market_vector(const std::filesystem::path& path);

/// Dense matrix as CSV, optional header row.
std::string csv_matrix(const Eigen::MatrixXd& m, const std::vector<std::string>& header = {});
/// Reads a numeric CSV; a first line that does not parse as numbers is skipped.
Eigen::MatrixXd read_csv_matrix(const std::filesystem::path& path);

}  // namespace flbo
