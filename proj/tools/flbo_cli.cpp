// flbo: build Finsler-Laplace-Beltrami operator families and run spectral
// pipelines on triangle meshes.
//
// Exit codes: 0 success, 1 validation or numerical failure, 2 input error,
// 3 missing prerequisite file.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "flbo/curvature.hpp"
#include "flbo/diffusion.hpp"
#include "flbo/error.hpp"
#include "flbo/fixtures.hpp"
#include "flbo/io.hpp"
#include "flbo/mesh.hpp"
#include "flbo/operators.hpp"
#include "flbo/spectral.hpp"
#include "flbo/validation.hpp"

namespace fs = std::filesystem;
using namespace flbo;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kInputError = 2, kMissingPrerequisite = 3 };

class MissingPrerequisite : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::string mesh;
  std::string config_path;
  std::string output_dir = ".";
  double anisotropy_level = 10.0;
  double tau = 0.1;
  int n_angles = 8;
  int n_eigenpairs = 128;
  int chebyshev_order = 16;
  std::vector<double> times;
  std::uint64_t seed = 0;
  bool normalize_area = false;
  std::string operators_dir;

  AnisotropyParams params() const { return {anisotropy_level, tau, n_angles}; }
};

// Options registered on a subcommand, kept so JSON values only fill what the
// command line left unset.
struct CommonOptions {
  CLI::Option* mesh = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* alpha = nullptr;
  CLI::Option* tau = nullptr;
  CLI::Option* angles = nullptr;
  CLI::Option* eigs = nullptr;
  CLI::Option* cheb = nullptr;
  CLI::Option* times = nullptr;
  CLI::Option* seed = nullptr;
};

CommonOptions add_common(CLI::App* sub, RunConfig& cfg) {
  CommonOptions o;
  o.mesh = sub->add_option("--mesh", cfg.mesh, "OFF/OBJ file, or builtin:<fixture>");
  sub->add_option("--config", cfg.config_path, "JSON run configuration; flags override it");
  o.out = sub->add_option("--out", cfg.output_dir, "output directory");
  o.alpha = sub->add_option("--alpha", cfg.anisotropy_level, "anisotropy level")->check(CLI::NonNegativeNumber);
  o.tau = sub->add_option("--tau", cfg.tau, "drift strength")->check(CLI::NonNegativeNumber);
  o.angles = sub->add_option("--angles", cfg.n_angles, "number of orientations in [0, pi)")->check(CLI::PositiveNumber);
  o.eigs = sub->add_option("--eigs", cfg.n_eigenpairs, "eigenpairs per operator (clamped to the vertex count)")
               ->check(CLI::PositiveNumber);
  o.cheb = sub->add_option("--cheb-order", cfg.chebyshev_order, "Chebyshev filter order")->check(CLI::PositiveNumber);
  o.times = sub->add_option("--times", cfg.times, "diffusion times");
  o.seed = sub->add_option("--seed", cfg.seed, "random seed");
  sub->add_flag("--normalize-area", cfg.normalize_area, "rescale the mesh to unit total area");
  sub->add_option("--operators", cfg.operators_dir, "directory written by 'operator' to reuse");
  return o;
}

void apply_config_file(RunConfig& cfg, const CommonOptions& o) {
  if (cfg.config_path.empty()) return;
  if (!fs::exists(cfg.config_path)) throw MissingPrerequisite("config file not found: " + cfg.config_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(cfg.config_path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config " + cfg.config_path + ": " + e.what());
  }
  auto fill = [&](const char* key, CLI::Option* opt, auto& target) {
    if (j.contains(key) && opt->count() == 0) target = j[key].get<std::decay_t<decltype(target)>>();
  };
  try {
    fill("mesh", o.mesh, cfg.mesh);
    fill("output_dir", o.out, cfg.output_dir);
    fill("anisotropy_level", o.alpha, cfg.anisotropy_level);
    fill("tau", o.tau, cfg.tau);
    fill("n_angles", o.angles, cfg.n_angles);
    fill("n_eigenpairs", o.eigs, cfg.n_eigenpairs);
    fill("chebyshev_order", o.cheb, cfg.chebyshev_order);
    fill("times", o.times, cfg.times);
    fill("seed", o.seed, cfg.seed);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config " + cfg.config_path + ": " + e.what());
  }
}

void check_config(const RunConfig& cfg) {
  cfg.params().validate();
  if (cfg.n_eigenpairs < 1) throw ConfigError("n_eigenpairs must be >= 1");
  if (cfg.chebyshev_order < 1) throw ConfigError("chebyshev_order must be >= 1");
  for (double t : cfg.times)
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("times must be positive");
}

TriangleMesh load_input_mesh(const RunConfig& cfg) {
  if (cfg.mesh.empty()) throw InputError("--mesh is required");
  std::optional<TriangleMesh> mesh;
  if (cfg.mesh.rfind("builtin:", 0) == 0) {
    mesh.emplace(make_fixture(cfg.mesh.substr(8)));
  } else {
    if (!fs::exists(cfg.mesh)) throw InputError("mesh file not found: " + cfg.mesh);
    mesh.emplace(load_mesh(cfg.mesh));
  }
  if (cfg.normalize_area) return mesh->scaled(1.0 / std::sqrt(mesh->total_area()));
  return *mesh;
}

std::string mesh_stem(const RunConfig& cfg) {
  if (cfg.mesh.rfind("builtin:", 0) == 0) return cfg.mesh.substr(8);
  return fs::path(cfg.mesh).stem().string();
}

fs::path output_dir(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  return dir;
}

std::string theta_suffix(size_t t) { return "_theta" + std::to_string(t); }

// Operators either assembled from the mesh or read back from --operators.
std::vector<OperatorPair> obtain_operators(const RunConfig& cfg, const TriangleMesh* mesh) {
  if (cfg.operators_dir.empty()) {
    if (!mesh) throw InputError("either --mesh or --operators is required");
    return assemble_family(*mesh, cfg.params()).pairs;
  }
  const fs::path dir(cfg.operators_dir);
  if (!fs::is_directory(dir)) throw MissingPrerequisite("operator directory not found: " + dir.string());
  std::optional<fs::path> mass_file;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 6 && name.ends_with(".S.mtx")) {
      if (mass_file) throw InputError("more than one mass matrix in " + dir.string());
      mass_file = entry.path();
    }
  }
  if (!mass_file) throw MissingPrerequisite("no <stem>.S.mtx in " + dir.string());
  const std::string name = mass_file->filename().string();
  const std::string stem = name.substr(0, name.size() - 6);
  const Eigen::VectorXd mass = read_matrix_market_vector(*mass_file);

  std::vector<OperatorPair> pairs;
  for (int t = 0;; ++t) {
    const fs::path w = dir / (stem + theta_suffix(t) + ".W.mtx");
    if (!fs::exists(w)) break;
    OperatorPair pair;
    pair.mass = mass;
    pair.stiffness = read_matrix_market(w);
    pair.theta = t * std::numbers::pi / cfg.n_angles;
    if (pair.stiffness.rows() != mass.size()) throw InputError(w.string() + " does not match the mass matrix size");
    pairs.push_back(std::move(pair));
  }
  if (pairs.empty()) throw MissingPrerequisite("no " + stem + "_theta<k>.W.mtx files in " + dir.string());
  if (mesh && mesh->num_vertices() != mass.size())
    throw InputError("operators in " + dir.string() + " do not match the mesh vertex count");
  if (static_cast<int>(pairs.size()) != cfg.n_angles)
    for (size_t t = 0; t < pairs.size(); ++t) pairs[t].theta = t * std::numbers::pi / pairs.size();
  return pairs;
}

SpectralBasis solve(const RunConfig& cfg, const OperatorPair& pair) {
  EigensolveOptions options;
  options.seed = cfg.seed;
  return eigensolve(pair, std::min(cfg.n_eigenpairs, pair.size()), options);
}

Eigen::VectorXd read_signal(const std::string& path, int n) {
  if (!fs::exists(path)) throw MissingPrerequisite("signal file not found: " + path);
  Eigen::VectorXd f;
  if (fs::path(path).extension() == ".mtx") {
    f = read_matrix_market_vector(path);
  } else {
    const Eigen::MatrixXd m = read_csv_matrix(path);
    if (m.cols() != 1 && m.rows() != 1) throw InputError("signal file must hold a single column or row: " + path);
    f = m.cols() == 1 ? Eigen::VectorXd(m.col(0)) : Eigen::VectorXd(m.row(0).transpose());
  }
  if (f.size() != n)
    throw InputError("signal has " + std::to_string(f.size()) + " values, mesh has " + std::to_string(n) + " vertices");
  return f;
}

std::vector<std::string> time_header(std::span<const double> times) {
  std::vector<std::string> header;
  for (double t : times) header.push_back("t=" + format_double(t));
  return header;
}

int cmd_operator(const RunConfig& cfg, bool write_frames) {
  const TriangleMesh mesh = load_input_mesh(cfg);
  const OperatorFamily family = assemble_family(mesh, cfg.params());
  const fs::path dir = output_dir(cfg);
  export_family(family, dir, mesh_stem(cfg));
  write_assembly_report(family.report, cfg.params(), dir / "report.json");
  if (write_frames) write_frames_csv(family.frames, dir / "frames.csv");
  std::cerr << "wrote " << family.pairs.size() << " operators for " << mesh.num_vertices() << " vertices to " << dir
            << "\n";
  return kOk;
}

int cmd_spectrum(const RunConfig& cfg) {
  std::optional<TriangleMesh> mesh;
  if (!cfg.mesh.empty()) mesh.emplace(load_input_mesh(cfg));
  const auto pairs = obtain_operators(cfg, mesh ? &*mesh : nullptr);
  const fs::path dir = output_dir(cfg);
  for (size_t t = 0; t < pairs.size(); ++t) {
    const SpectralBasis basis = solve(cfg, pairs[t]);
    Eigen::MatrixXd values(basis.size(), 2);
    for (int k = 0; k < basis.size(); ++k) values.row(k) << k, basis.eigenvalues(k);
    write_file_atomic(dir / ("eigenvalues" + theta_suffix(t) + ".csv"), csv_matrix(values, {"index", "lambda"}));
    write_file_atomic(dir / ("eigenvectors" + theta_suffix(t) + ".csv"), csv_matrix(basis.eigenvectors));
  }
  return kOk;
}

int cmd_heat(const RunConfig& cfg, bool with_source, const std::string& signal, int vertex) {
  const TriangleMesh mesh = load_input_mesh(cfg);
  const auto pairs = obtain_operators(cfg, &mesh);
  const std::vector<double> times = cfg.times.empty() ? std::vector<double>{0.1} : cfg.times;
  const fs::path dir = output_dir(cfg);

  Eigen::VectorXd f0;
  if (!signal.empty()) {
    f0 = read_signal(signal, mesh.num_vertices());
  } else {
    if (vertex < 0 || vertex >= mesh.num_vertices()) throw InputError("--vertex out of range");
    // Unit heat at one vertex: the S-weighted delta.
    f0 = Eigen::VectorXd::Zero(mesh.num_vertices());
    f0(vertex) = 1.0 / assemble_mass(mesh)(vertex);
  }

  std::optional<CurvatureFrames> frames;
  if (with_source) frames.emplace(estimate_curvature_frames(mesh));
  for (size_t t = 0; t < pairs.size(); ++t) {
    const SpectralBasis basis = solve(cfg, pairs[t]);
    Eigen::MatrixXd out(mesh.num_vertices(), times.size());
    std::optional<FaceMetricField> field;
    if (with_source) field.emplace(build_metric_field(*frames, cfg.params(), pairs[t].theta));
    for (size_t c = 0; c < times.size(); ++c)
      out.col(c) = with_source ? simplified_randers_solve(mesh, basis, *field, f0, times[c])
                               : heat_propagate(basis, f0, times[c]);
    write_file_atomic(dir / ("heat" + theta_suffix(t) + ".csv"), csv_matrix(out, time_header(times)));
  }
  return kOk;
}

std::vector<FilterSpec> read_filters(const std::string& path, size_t n_angles) {
  if (!fs::exists(path)) throw MissingPrerequisite("coefficient file not found: " + path);
  const Eigen::MatrixXd c = read_csv_matrix(path);
  std::vector<FilterSpec> specs;
  if (c.rows() == static_cast<Eigen::Index>(n_angles) && c.cols() > 1) {
    for (Eigen::Index r = 0; r < c.rows(); ++r) specs.push_back({std::vector<double>(c.row(r).data(), c.row(r).data() + c.cols())});
  } else if (c.rows() == 1 || c.cols() == 1) {
    const Eigen::VectorXd v = c.rows() == 1 ? Eigen::VectorXd(c.row(0).transpose()) : Eigen::VectorXd(c.col(0));
    specs.assign(n_angles, FilterSpec{std::vector<double>(v.data(), v.data() + v.size())});
  } else {
    throw InputError("coefficient file needs one row, one column, or one row per orientation: " + path);
  }
  for (const auto& s : specs) s.validate();
  return specs;
}

int cmd_filter(const RunConfig& cfg, const std::string& coeffs, const std::string& signal) {
  std::optional<TriangleMesh> mesh;
  if (!cfg.mesh.empty()) mesh.emplace(load_input_mesh(cfg));
  const auto pairs = obtain_operators(cfg, mesh ? &*mesh : nullptr);
  const int n = pairs.front().size();
  const Eigen::VectorXd f = read_signal(signal, n);
  const std::vector<FilterSpec> specs = read_filters(coeffs, pairs.size());
  if (specs.front().order() > cfg.chebyshev_order)
    std::cerr << "warning: " << specs.front().order() << " coefficients exceed --cheb-order " << cfg.chebyshev_order
              << "\n";

  const fs::path dir = output_dir(cfg);
  std::vector<SpectralBasis> bases;
  for (size_t t = 0; t < pairs.size(); ++t) {
    bases.push_back(solve(cfg, pairs[t]));
    write_file_atomic(dir / ("filtered" + theta_suffix(t) + ".csv"),
                      csv_matrix(anisotropic_convolve(bases.back(), f, specs[t])));
  }
  write_file_atomic(dir / "filtered_sum.csv", csv_matrix(directional_sum_convolve(bases, f, specs)));
  return kOk;
}

int cmd_descriptor(const RunConfig& cfg) {
  std::optional<TriangleMesh> mesh;
  if (!cfg.mesh.empty()) mesh.emplace(load_input_mesh(cfg));
  const auto pairs = obtain_operators(cfg, mesh ? &*mesh : nullptr);
  const std::vector<double> times = cfg.times.empty() ? log_spaced_times(0.01, 1.0, 8) : cfg.times;
  const fs::path dir = output_dir(cfg);
  for (size_t t = 0; t < pairs.size(); ++t) {
    const Eigen::MatrixXd hks = finsler_hks(solve(cfg, pairs[t]), times);
    write_file_atomic(dir / ("descriptor" + theta_suffix(t) + ".csv"), csv_matrix(hks, time_header(times)));
  }
  return kOk;
}

int cmd_validate(const RunConfig& cfg, bool inject_sign_error) {
  ValidationOptions options;
  options.seed = cfg.seed;
  options.flip_stiffness_sign = inject_sign_error;
  const auto start = std::chrono::steady_clock::now();
  const auto results = run_validation(options, [](const CheckResult& r) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  value=" << r.value << " threshold=" << r.threshold;
    if (!r.detail.empty()) std::cout << "  (" << r.detail << ")";
    std::cout << std::endl;
  });
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const fs::path dir = output_dir(cfg);
  write_file_atomic(dir / "validation.json", validation_report_json(results, options, total));

  int failed = 0;
  for (const auto& r : results) {
    if (r.passed) continue;
    std::cerr << "failed check: " << r.name << "\n";
    ++failed;
  }
  std::cout << results.size() - failed << "/" << results.size() << " checks passed in " << total << " s\n";
  return failed == 0 ? kOk : kFailure;
}

int cmd_fixtures(const std::string& out) {
  const fs::path dir(out);
  fs::create_directories(dir);
  for (const std::string name : {"icosphere2", "icosphere3", "icosphere4", "strip", "square", "tetrahedron"})
    write_off(make_fixture(name), dir / (name + ".off"));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finsler-Laplace-Beltrami operators on triangle meshes"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* op = app.add_subcommand("operator", "assemble and export the operator family");
  const CommonOptions op_opts = add_common(op, cfg);
  bool write_frames = false;
  op->add_flag("--frames", write_frames, "also write per-face curvature frames");

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues and eigenvectors per orientation");
  const CommonOptions spectrum_opts = add_common(spectrum, cfg);

  auto* heat = app.add_subcommand("heat", "spectral heat diffusion per orientation");
  const CommonOptions heat_opts = add_common(heat, cfg);
  bool with_source = false;
  std::string heat_signal;
  int vertex = 0;
  heat->add_flag("--source", with_source, "add the drift source term");
  heat->add_option("--signal", heat_signal, "initial field, one value per vertex");
  heat->add_option("--vertex", vertex, "unit heat source vertex when no --signal is given");

  auto* filter = app.add_subcommand("filter", "Chebyshev spectral filtering");
  const CommonOptions filter_opts = add_common(filter, cfg);
  std::string coeffs, filter_signal;
  filter->add_option("--coeffs", coeffs, "Chebyshev coefficients CSV")->required();
  filter->add_option("--signal", filter_signal, "input field, one value per vertex")->required();

  auto* descriptor = app.add_subcommand("descriptor", "heat-kernel signature per orientation");
  const CommonOptions descriptor_opts = add_common(descriptor, cfg);

  auto* validate = app.add_subcommand("validate", "run the invariant and oracle suite");
  const CommonOptions validate_opts = add_common(validate, cfg);
  bool inject = false;
  validate->add_flag("--inject-sign-error", inject, "negate every stiffness matrix (test hook)")->group("");

  auto* fixtures = app.add_subcommand("fixtures", "write the bundled fixture meshes");
  fixtures->group("");
  std::string fixtures_out = "data";
  fixtures->add_option("--out", fixtures_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    auto prepare = [&](const CommonOptions& o) {
      apply_config_file(cfg, o);
      check_config(cfg);
    };
    if (*op) return prepare(op_opts), cmd_operator(cfg, write_frames);
    if (*spectrum) return prepare(spectrum_opts), cmd_spectrum(cfg);
    if (*heat) return prepare(heat_opts), cmd_heat(cfg, with_source, heat_signal, vertex);
    if (*filter) return prepare(filter_opts), cmd_filter(cfg, coeffs, filter_signal);
    if (*descriptor) return prepare(descriptor_opts), cmd_descriptor(cfg);
    if (*validate) return prepare(validate_opts), cmd_validate(cfg, inject);
    if (*fixtures) return cmd_fixtures(fixtures_out);
  } catch (const MissingPrerequisite& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMissingPrerequisite;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}
