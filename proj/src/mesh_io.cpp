#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "flbo/error.hpp"
#include "flbo/mesh.hpp"

namespace flbo {

namespace {

struct RawMesh {
  std::vector<double> coords;
  std::vector<int> tris;
};

void fan_triangulate(const std::vector<int>& poly, RawMesh& raw, long line) {
  if (poly.size() < 3) throw InputError("line " + std::to_string(line) + ": face with fewer than 3 vertices");
  for (size_t i = 1; i + 1 < poly.size(); ++i) {
    raw.tris.push_back(poly[0]);
    raw.tris.push_back(poly[i]);
    raw.tris.push_back(poly[i + 1]);
  }
}

// Next line that is neither blank nor a comment.
bool next_content_line(std::istream& in, std::string& line, long& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

RawMesh read_off(std::istream& in) {
  RawMesh raw;
  std::string line;
  long line_no = 0;
  if (!next_content_line(in, line, line_no)) throw InputError("OFF: empty file");
  std::istringstream header(line);
  std::string magic;
  header >> magic;
  if (magic != "OFF") throw InputError("OFF: missing 'OFF' header");
  long nv = -1, nf = -1, ne = 0;
  if (!(header >> nv)) {
    if (!next_content_line(in, line, line_no)) throw InputError("OFF: missing counts line");
    std::istringstream counts(line);
    counts >> nv >> nf >> ne;
  } else {
    header >> nf >> ne;
  }
  if (nv <= 0 || nf <= 0) throw InputError("OFF: invalid vertex/face counts");

  raw.coords.reserve(3 * nv);
  for (long v = 0; v < nv; ++v) {
    if (!next_content_line(in, line, line_no)) throw InputError("OFF: truncated vertex list at vertex " + std::to_string(v));
    std::istringstream row(line);
    double x, y, z;
    if (!(row >> x >> y >> z)) throw InputError("OFF: line " + std::to_string(line_no) + ": bad vertex " + std::to_string(v));
    raw.coords.insert(raw.coords.end(), {x, y, z});
  }
  for (long f = 0; f < nf; ++f) {
    if (!next_content_line(in, line, line_no)) throw InputError("OFF: truncated face list at face " + std::to_string(f));
    std::istringstream row(line);
    int count = 0;
    if (!(row >> count) || count < 3) throw InputError("OFF: line " + std::to_string(line_no) + ": bad face " + std::to_string(f));
    std::vector<int> poly(count);
    for (int& idx : poly)
      if (!(row >> idx)) throw InputError("OFF: line " + std::to_string(line_no) + ": bad face " + std::to_string(f));
    fan_triangulate(poly, raw, line_no);
  }
  return raw;
}

RawMesh read_obj(std::istream& in) {
  RawMesh raw;
  std::string line;
  long line_no = 0;
  while (next_content_line(in, line, line_no)) {
    std::istringstream row(line);
    std::string tag;
    row >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(row >> x >> y >> z)) throw InputError("OBJ: line " + std::to_string(line_no) + ": bad vertex");
      raw.coords.insert(raw.coords.end(), {x, y, z});
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string token;
      const int nv = static_cast<int>(raw.coords.size() / 3);
      while (row >> token) {
        // "v", "v/vt", "v//vn", "v/vt/vn"; only the position index is used.
        const std::string head = token.substr(0, token.find('/'));
        int idx = 0;
        const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
        if (ec != std::errc() || idx == 0) throw InputError("OBJ: line " + std::to_string(line_no) + ": bad face index '" + token + "'");
        poly.push_back(idx > 0 ? idx - 1 : nv + idx);
      }
      fan_triangulate(poly, raw, line_no);
    }
  }
  return raw;
}

}  // namespace

TriangleMesh load_mesh(const std::filesystem::path& path, std::optional<MeshFormat> format) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open mesh file " + path.string());
  if (!format) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".off") format = MeshFormat::off;
    else if (ext == ".obj") format = MeshFormat::obj;
    else throw InputError("unknown mesh extension '" + ext + "' for " + path.string());
  }
  const RawMesh raw = *format == MeshFormat::off ? read_off(in) : read_obj(in);
  if (raw.coords.empty() || raw.tris.empty()) throw InputError("mesh file " + path.string() + " has no vertices or faces");

  VertexMatrix v = Eigen::Map<const VertexMatrix>(raw.coords.data(), static_cast<Eigen::Index>(raw.coords.size() / 3), 3);
  FaceMatrix f = Eigen::Map<const FaceMatrix>(raw.tris.data(), static_cast<Eigen::Index>(raw.tris.size() / 3), 3);
  return TriangleMesh(std::move(v), std::move(f));
}

void write_off(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write mesh file " + path.string());
  out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_faces() << ' ' << mesh.num_edges() << '\n';
  std::array<char, 64> buf;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    for (int c = 0; c < 3; ++c) {
      // Shortest representation that parses back to the same double.
      const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), mesh.vertices()(v, c));
      out << std::string_view(buf.data(), res.ptr - buf.data()) << (c < 2 ? ' ' : '\n');
    }
  }
  for (int f = 0; f < mesh.num_faces(); ++f)
    out << "3 " << mesh.faces()(f, 0) << ' ' << mesh.faces()(f, 1) << ' ' << mesh.faces()(f, 2) << '\n';
  if (!out) throw InputError("failed writing mesh file " + path.string());
}

}  // namespace flbo
