#include "flbo/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <tuple>

#include "flbo/error.hpp"

namespace flbo {

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw InputError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw InputError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double value) {
  std::array<char, 64> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

std::string matrix_market_symmetric(const Eigen::SparseMatrix<double>& m) {
  std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> entries;
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
      if (it.row() >= it.col()) entries.emplace_back(it.row(), it.col(), it.value());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<1>(a), std::get<0>(a)) < std::tie(std::get<1>(b), std::get<0>(b));
  });
  std::string out = "%%MatrixMarket matrix coordinate real symmetric\n";
  out += std::to_string(m.rows()) + ' ' + std::to_string(m.cols()) + ' ' + std::to_string(entries.size()) + '\n';
  for (const auto& [r, c, v] : entries)
    out += std::to_string(r + 1) + ' ' + std::to_string(c + 1) + ' ' + format_double(v) + '\n';
  return out;
}

std::string matrix_market_array(const Eigen::VectorXd& v) {
  std::string out = "%%MatrixMarket matrix array real general\n";
  out += std::to_string(v.size()) + " 1\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) out += format_double(v(i)) + '\n';
  return out;
}

namespace {

struct MatrixMarketHeader {
  bool coordinate = true;
  bool symmetric = false;
  long rows = 0, cols = 0, entries = 0;
};

MatrixMarketHeader read_header(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0)
    throw InputError(path.string() + ": missing %%MatrixMarket banner");
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (object != "matrix" || (field != "real" && field != "double" && field != "integer"))
    throw InputError(path.string() + ": unsupported Matrix Market type '" + line + "'");
  MatrixMarketHeader h;
  h.coordinate = format == "coordinate";
  if (!h.coordinate && format != "array") throw InputError(path.string() + ": unknown format '" + format + "'");
  h.symmetric = symmetry == "symmetric";
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '%') break;
  std::istringstream size(line);
  if (h.coordinate) {
    if (!(size >> h.rows >> h.cols >> h.entries)) throw InputError(path.string() + ": bad size line");
  } else {
    if (!(size >> h.rows >> h.cols)) throw InputError(path.string() + ": bad size line");
    h.entries = h.rows * h.cols;
  }
  return h;
}

}  // namespace

Eigen::SparseMatrix<double> read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  const MatrixMarketHeader h = read_header(in, path);
  std::vector<Eigen::Triplet<double>> triplets;
  if (h.coordinate) {
    for (long k = 0; k < h.entries; ++k) {
      long r, c;
      double v;
      if (!(in >> r >> c >> v)) throw InputError(path.string() + ": truncated entry list");
      if (r < 1 || r > h.rows || c < 1 || c > h.cols) throw InputError(path.string() + ": entry index out of range");
      triplets.emplace_back(r - 1, c - 1, v);
      if (h.symmetric && r != c) triplets.emplace_back(c - 1, r - 1, v);
    }
  } else {
    for (long c = 0; c < h.cols; ++c)
      for (long r = 0; r < h.rows; ++r) {
        double v;
        if (!(in >> v)) throw InputError(path.string() + ": truncated array");
        if (v != 0.0) triplets.emplace_back(r, c, v);
      }
  }
  Eigen::SparseMatrix<double> m(h.rows, h.cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

Eigen::VectorXd read_matrix_market_vector(const std::filesystem::path& path) {
  const Eigen::SparseMatrix<double> m = read_matrix_market(path);
  if (m.cols() == 1) return Eigen::VectorXd(m.col(0));
  if (m.rows() == m.cols()) return Eigen::VectorXd(m.diagonal());
  throw InputError(path.string() + ": expected a column vector or diagonal matrix");
}

std::string csv_matrix(const Eigen::MatrixXd& m, const std::vector<std::string>& header) {
  std::string out;
  for (size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  if (!header.empty()) out += '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out += (c ? "," : "") + format_double(m(r, c));
    out += '\n';
  }
  return out;
}

Eigen::MatrixXd read_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t\r");
      const auto e = cell.find_last_not_of(" \t\r");
      if (b == std::string::npos) {
        numeric = false;
        break;
      }
      double v = 0.0;
      const auto res = std::from_chars(cell.data() + b, cell.data() + e + 1, v);
      if (res.ec != std::errc() || res.ptr != cell.data() + e + 1) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw InputError(path.string() + ": non-numeric CSV row '" + line + "'");
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size()) throw InputError(path.string() + ": ragged CSV");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path.string() + ": no data rows");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return m;
}

}  // namespace flbo
