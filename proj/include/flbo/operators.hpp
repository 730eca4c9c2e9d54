#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "flbo/curvature.hpp"
#include "flbo/mesh.hpp"
#include "flbo/randers.hpp"

namespace flbo {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct AnisotropyParams {
  double anisotropy_level = 10.0;  // scales the u_max eigenvalue of the shear to 1/(1 + level)
  double tau = 0.1;                // drift strength
  int n_angles = 8;

  /// theta_t = t * pi / n_angles.
  std::vector<double> theta_values() const;
  void validate() const;
};

/// Faces whose drift hit |omega|_{M^{-1}} >= 0.99 are rescaled to exactly 0.99.
inline constexpr double kMaxDriftNorm = 0.99;
/// Sines of opposite angles are floored at this value.
inline constexpr double kMinSine = 1e-8;

/// Rotation by theta about the frame normal, expressed in ambient coordinates.
Eigen::Matrix3d frame_rotation(const FaceFrame& frame, double theta);

/// H = R_theta U diag(1/(1+level), 1, 1) U^T R_theta^T.
Eigen::Matrix3d build_shear(const FaceFrame& frame, double anisotropy_level, double theta);

struct FaceRanders {
  Eigen::Matrix3d shear = Eigen::Matrix3d::Identity();
  RandersMetric<double> metric;
  DualRandersMetric<double> dual;
  Eigen::Matrix3d diffusivity = Eigen::Matrix3d::Identity();
  double requested_drift_norm = 0.0;  // |tau R_theta u_max|_{M^{-1}}
  double drift_norm = 0.0;            // after clamping
  bool clamped = false;
};

/// M = H^{-1}, omega = tau R_theta u_max (clamped), D = M* - omega* omega*^T.
FaceRanders build_face_randers(const FaceFrame& frame, const AnisotropyParams& params, double theta);

struct FaceMetricField {
  double theta = 0.0;
  std::vector<FaceRanders> faces;
  std::vector<int> clamped_faces;

  std::vector<Eigen::Matrix3d> diffusivities() const;
  std::vector<Eigen::Matrix3d> shears() const;
  /// omega* per face.
  FaceVectorField dual_drift() const;
};

FaceMetricField build_metric_field(const CurvatureFrames& frames, const AnisotropyParams& params, double theta);

/// The same Randers metric on every face (shear = M^{-1}); no clamping.
FaceMetricField constant_metric_field(int num_faces, const RandersMetric<double>& metric);

/// Lumped mass matrix S; entry i is one third of the area of the faces around i.
Eigen::VectorXd assemble_mass(const TriangleMesh& mesh);

struct SliverWarning {
  int edge = -1;
  int face = -1;
  double sine = 0.0;
};

struct StiffnessResult {
  SparseMatrix stiffness;
  std::vector<SliverWarning> slivers;
};

/// Anisotropic cotangent stiffness: for edge (i, j) with opposite corners k, h
///   w_ij = 1/2 ( <e_kj, e_ki>_{D_k} / sin a_ij + <e_hj, e_hi>_{D_h} / sin b_ij ),
/// each term using its own face's diffusivity; w_ii = -sum_k w_ik.
StiffnessResult assemble_stiffness(const TriangleMesh& mesh, std::span<const Eigen::Matrix3d> diffusivity);
StiffnessResult assemble_stiffness(const TriangleMesh& mesh, const FaceMetricField& field);

/// Mass S (diagonal) and stiffness W; the discrete operator is -S^{-1} W.
struct OperatorPair {
  Eigen::VectorXd mass;
  SparseMatrix stiffness;
  double theta = 0.0;

  int size() const { return static_cast<int>(mass.size()); }
};

struct AssemblyReport {
  std::vector<int> frame_fallback_faces;
  std::vector<int> umbilic_faces;
  /// Per theta index, faces whose drift was clamped.
  std::vector<std::vector<int>> clamped_faces;
  std::vector<SliverWarning> slivers;
  /// Largest |omega|_{M^{-1}} over faces and angles, before clamping.
  double max_drift_norm = 0.0;
};

struct FlboAssembly {
  OperatorPair pair;
  FaceMetricField field;
  AssemblyReport report;
};

FlboAssembly assemble_flbo(const TriangleMesh& mesh, const AnisotropyParams& params, double theta);
/// Same, reusing precomputed frames.
FlboAssembly assemble_flbo(const TriangleMesh& mesh, const CurvatureFrames& frames, const AnisotropyParams& params,
                           double theta);

struct OperatorFamily {
  CurvatureFrames frames;
  std::vector<OperatorPair> pairs;
  std::vector<FaceMetricField> fields;
  AssemblyReport report;
};

/// One operator per theta in params.theta_values(); frames computed once.
OperatorFamily assemble_family(const TriangleMesh& mesh, const AnisotropyParams& params);

/// Writes <stem>.S.mtx (array format) and <stem>_theta<k>.W.mtx (symmetric coordinate).
void export_family(const OperatorFamily& family, const std::filesystem::path& dir, const std::string& stem);
/// JSON listing clamped faces, sliver warnings and frame fallbacks.
void write_assembly_report(const AssemblyReport& report, const AnisotropyParams& params,
                           const std::filesystem::path& path);

}  // namespace flbo
