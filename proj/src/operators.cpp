#include "flbo/operators.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <numbers>

#include "flbo/error.hpp"
#include "flbo/io.hpp"
#include "json.hpp"

namespace flbo {

std::vector<double> AnisotropyParams::theta_values() const {
  std::vector<double> thetas(n_angles);
  for (int t = 0; t < n_angles; ++t) thetas[t] = t * std::numbers::pi / n_angles;
  return thetas;
}

void AnisotropyParams::validate() const {
  if (n_angles < 1) throw ConfigError("n_angles must be >= 1");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be finite and >= 0");
  if (!(anisotropy_level >= 0.0) || !std::isfinite(anisotropy_level))
    throw ConfigError("anisotropy level must be finite and >= 0");
}

Eigen::Matrix3d frame_rotation(const FaceFrame& frame, double theta) {
  const Eigen::Matrix3d u = frame.matrix();
  const Eigen::Matrix3d rz = Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  return u * rz * u.transpose();
}

Eigen::Matrix3d build_shear(const FaceFrame& frame, double anisotropy_level, double theta) {
  const Eigen::Matrix3d u = frame.matrix();
  const Eigen::Matrix3d rotation = frame_rotation(frame, theta);
  const Eigen::Vector3d scales(1.0 / (1.0 + anisotropy_level), 1.0, 1.0);
  const Eigen::Matrix3d h = rotation * u * scales.asDiagonal() * u.transpose() * rotation.transpose();
  return 0.5 * (h + h.transpose());
}

FaceRanders build_face_randers(const FaceFrame& frame, const AnisotropyParams& params, double theta) {
  FaceRanders out;
  out.shear = build_shear(frame, params.anisotropy_level, theta);
  out.metric.m = out.shear.inverse();
  out.metric.m = 0.5 * (out.metric.m + out.metric.m.transpose()).eval();
  out.metric.omega = params.tau * (frame_rotation(frame, theta) * frame.u_max);

  // M^{-1} = H, so |omega|_{M^{-1}}^2 = omega^T H omega.
  out.requested_drift_norm = std::sqrt(out.metric.omega.dot(out.shear * out.metric.omega));
  out.drift_norm = out.requested_drift_norm;
  if (out.requested_drift_norm >= kMaxDriftNorm) {
    out.metric.omega *= kMaxDriftNorm / out.requested_drift_norm;
    out.drift_norm = kMaxDriftNorm;
    out.clamped = true;
  }
  out.dual = dual_randers(out.metric);
  // Without drift D = M^{-1} = H; use H itself so the ALBO path is reproduced exactly.
  out.diffusivity = out.metric.omega.isZero(0) ? out.shear : finsler_diffusivity(out.dual);
  return out;
}

std::vector<Eigen::Matrix3d> FaceMetricField::diffusivities() const {
  std::vector<Eigen::Matrix3d> d;
  d.reserve(faces.size());
  for (const auto& f : faces) d.push_back(f.diffusivity);
  return d;
}

std::vector<Eigen::Matrix3d> FaceMetricField::shears() const {
  std::vector<Eigen::Matrix3d> h;
  h.reserve(faces.size());
  for (const auto& f : faces) h.push_back(f.shear);
  return h;
}

FaceVectorField FaceMetricField::dual_drift() const {
  FaceVectorField w(faces.size(), 3);
  for (size_t f = 0; f < faces.size(); ++f) w.row(f) = faces[f].dual.omega_star.transpose();
  return w;
}

FaceMetricField build_metric_field(const CurvatureFrames& frames, const AnisotropyParams& params, double theta) {
  params.validate();
  FaceMetricField field;
  field.theta = theta;
  field.faces.reserve(frames.frames.size());
  for (size_t f = 0; f < frames.frames.size(); ++f) {
    field.faces.push_back(build_face_randers(frames.frames[f], params, theta));
    if (field.faces.back().clamped) field.clamped_faces.push_back(static_cast<int>(f));
  }
  return field;
}

FaceMetricField constant_metric_field(int num_faces, const RandersMetric<double>& metric) {
  FaceRanders face;
  face.metric = metric;
  face.shear = metric.m.inverse();
  face.dual = dual_randers(metric);
  face.diffusivity = finsler_diffusivity(face.dual);
  face.requested_drift_norm = face.drift_norm = drift_norm(metric);
  FaceMetricField field;
  field.faces.assign(num_faces, face);
  return field;
}

Eigen::VectorXd assemble_mass(const TriangleMesh& mesh) {
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (int f = 0; f < mesh.num_faces(); ++f)
    for (int c = 0; c < 3; ++c) mass(mesh.faces()(f, c)) += mesh.face_areas()(f) / 3.0;
  return mass;
}

StiffnessResult assemble_stiffness(const TriangleMesh& mesh, std::span<const Eigen::Matrix3d> diffusivity) {
  if (static_cast<int>(diffusivity.size()) != mesh.num_faces())
    throw InputError("assemble_stiffness: " + std::to_string(diffusivity.size()) + " face metrics for " +
                     std::to_string(mesh.num_faces()) + " faces");
  StiffnessResult out;
  const auto wedges = edge_opposite_angles(mesh);

  auto corner_term = [&](const EdgeCorner& corner, int edge) {
    double sine = std::sin(corner.angle);
    if (sine < kMinSine) {
      out.slivers.push_back({edge, corner.face, sine});
      sine = kMinSine;
    }
    return 0.5 * corner.to_j.dot(diffusivity[corner.face] * corner.to_i) / sine;
  };

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(4 * wedges.size());
  for (size_t e = 0; e < wedges.size(); ++e) {
    const Edge& edge = mesh.edges()[e];
    double w = corner_term(wedges[e].first, static_cast<int>(e));
    if (wedges[e].second) w += corner_term(*wedges[e].second, static_cast<int>(e));
    triplets.emplace_back(edge.v0, edge.v1, w);
    triplets.emplace_back(edge.v1, edge.v0, w);
    triplets.emplace_back(edge.v0, edge.v0, -w);
    triplets.emplace_back(edge.v1, edge.v1, -w);
  }
  out.stiffness.resize(mesh.num_vertices(), mesh.num_vertices());
  out.stiffness.setFromTriplets(triplets.begin(), triplets.end());
  out.stiffness.makeCompressed();
  return out;
}

StiffnessResult assemble_stiffness(const TriangleMesh& mesh, const FaceMetricField& field) {
  const auto d = field.diffusivities();
  return assemble_stiffness(mesh, std::span<const Eigen::Matrix3d>(d));
}

namespace {

double max_requested_drift(const FaceMetricField& field) {
  double m = 0.0;
  for (const auto& f : field.faces) m = std::max(m, f.requested_drift_norm);
  return m;
}

}  // namespace

FlboAssembly assemble_flbo(const TriangleMesh& mesh, const CurvatureFrames& frames, const AnisotropyParams& params,
                           double theta) {
  FlboAssembly out;
  out.field = build_metric_field(frames, params, theta);
  StiffnessResult stiffness = assemble_stiffness(mesh, out.field);
  out.pair.mass = assemble_mass(mesh);
  out.pair.stiffness = std::move(stiffness.stiffness);
  out.pair.theta = theta;
  out.report.frame_fallback_faces = frames.fallback_faces;
  out.report.umbilic_faces = frames.umbilic_faces;
  out.report.clamped_faces = {out.field.clamped_faces};
  out.report.slivers = std::move(stiffness.slivers);
  out.report.max_drift_norm = max_requested_drift(out.field);
  return out;
}

FlboAssembly assemble_flbo(const TriangleMesh& mesh, const AnisotropyParams& params, double theta) {
  return assemble_flbo(mesh, estimate_curvature_frames(mesh), params, theta);
}

OperatorFamily assemble_family(const TriangleMesh& mesh, const AnisotropyParams& params) {
  params.validate();
  OperatorFamily family;
  family.frames = estimate_curvature_frames(mesh);
  family.report.frame_fallback_faces = family.frames.fallback_faces;
  family.report.umbilic_faces = family.frames.umbilic_faces;
  for (double theta : params.theta_values()) {
    FlboAssembly a = assemble_flbo(mesh, family.frames, params, theta);
    family.report.clamped_faces.push_back(a.field.clamped_faces);
    // Slivers depend only on geometry; keep one copy.
    if (family.pairs.empty()) family.report.slivers = a.report.slivers;
    family.report.max_drift_norm = std::max(family.report.max_drift_norm, a.report.max_drift_norm);
    family.pairs.push_back(std::move(a.pair));
    family.fields.push_back(std::move(a.field));
  }
  return family;
}

void export_family(const OperatorFamily& family, const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  if (family.pairs.empty()) return;
  write_file_atomic(dir / (stem + ".S.mtx"), matrix_market_array(family.pairs.front().mass));
  for (size_t k = 0; k < family.pairs.size(); ++k)
    write_file_atomic(dir / (stem + "_theta" + std::to_string(k) + ".W.mtx"),
                      matrix_market_symmetric(family.pairs[k].stiffness));
}

void write_assembly_report(const AssemblyReport& report, const AnisotropyParams& params,
                           const std::filesystem::path& path) {
  nlohmann::json j;
  j["anisotropy_level"] = params.anisotropy_level;
  j["tau"] = params.tau;
  j["n_angles"] = params.n_angles;
  j["theta_values"] = params.theta_values();
  j["clamp_threshold"] = kMaxDriftNorm;
  j["max_drift_norm"] = report.max_drift_norm;
  j["clamped_faces"] = report.clamped_faces;
  j["frame_fallback_faces"] = report.frame_fallback_faces;
  j["umbilic_face_count"] = report.umbilic_faces.size();
  nlohmann::json slivers = nlohmann::json::array();
  for (const auto& s : report.slivers) slivers.push_back({{"edge", s.edge}, {"face", s.face}, {"sine", s.sine}});
  j["sliver_warnings"] = slivers;
  write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace flbo
