#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "xtalsst/synchrosqueeze.hpp"
#include "xtalsst/synthetic.hpp"
#include "xtalsst/types.hpp"
#include "xtalsst/volume.hpp"

namespace xtal {

struct PeakBall {
  Vec3 center_sph = Vec3::Zero();   // (v, psi, theta)
  Vec3 center_cart = Vec3::Zero();  // folded representative
  double radius = 0.0;
  double energy = 0.0;
  std::vector<std::uint32_t> members;  // captured bin keys
  bool degenerate = false;             // fewer nonzero cells than requested balls
};

// Greedy peak picking: K rounds of (max unsuppressed cell -> centroid-refined
// center -> capture and suppress cells within delta). Distances are Euclidean
// in Cartesian frequency space, antipodal-symmetric. Balls come back sorted
// by captured energy, descending.
std::vector<PeakBall> find_peak_balls(const SparseCells& cells, const SphericalGrid& grid,
                                      int K, double delta);

// Fraction of the total cell energy captured by the balls; 0 when the total
// is 0 (treated as a defect by callers).
double defect_mass(const SparseCells& cells, const std::vector<PeakBall>& balls);

// mask[i] = 1 where mass < eta.
std::vector<std::uint8_t> threshold_defects(const std::vector<double>& mass, double eta);

struct WavevectorMatch {
  std::vector<Vec3> nu;        // one per reference, sign-folded onto it
  std::vector<double> align;   // |cos| of each match
  bool complete = false;       // all references matched distinctly and well
};

// Energy-weighted Cartesian centroid of each ball's member cells (members
// sign-aligned to the ball center first), then greedy max-|cos| assignment
// onto the reference directions.
WavevectorMatch estimate_local_wavevectors(const SparseCells& cells,
                                           const std::vector<PeakBall>& balls,
                                           const SphericalGrid& grid,
                                           const std::vector<Vec3>& refs);

// Least squares min over M of sum_j |nu[j] - M * (N * refs[j])|^2 via the
// normal equations. Throws on rank-deficient references. The fitted M acts on
// reference directions, i.e. it is the transpose of the deformation Jacobian
// whose rows push forward the reciprocal directions.
Mat3 fit_inverse_gradient(const std::vector<Vec3>& nu, const std::vector<Vec3>& refs,
                          double N, double* residual = nullptr);

struct PolarFactors {
  Mat3 R = Mat3::Identity();
  Mat3 U = Mat3::Identity();
  bool ok = false;  // false when G is singular
};

// G = R*U with R a proper rotation (det +1) and U symmetric, via SVD. U is
// PSD exactly when det(G) >= 0; a reflection-containing G trades one negative
// stretch into U to keep R proper.
PolarFactors polar_decompose(const Mat3& G);

// Inverse of rotation_from_euler. Throws ValidationError when R is not
// orthonormal. |cos(beta)| < 1e-8 takes the gimbal branch (gamma = 0).
EulerAngles euler_angles(const Mat3& R);

struct AnalysisConfig {
  double s = 0.5;
  double c_w = 2.0;
  double eps_rel = 0.1;
  double delta_cells = 3.0;  // ball radius in grid cells at the dominant radius
  double eta = 0.7;
  LatticeType lattice = LatticeType::Cubic;
  double axial_ratio = kDefaultAxialRatio;
  double dv = 1.0;
  int n_psi = 60;
  int n_theta = 60;
  std::optional<std::pair<double, double>> band;  // overrides auto-detection
  int lb_override = 0;                            // overrides the output grid side
  int threads = 1;
};

// Per-voxel results on the analysis grid (the transform's output grid, side
// `lb`). Defect voxels keep identity G/R/U and zero angles.
struct DeformationField {
  Index3 dims{0, 0, 0};  // = (lb, lb, lb)
  int k_ref = 0;
  std::vector<double> mass;
  std::vector<std::uint8_t> defect;
  std::vector<Vec3> nu;  // k_ref per voxel, voxel-major
  std::vector<Mat3> G;
  std::vector<Mat3> R;
  std::vector<Mat3> U;
  std::vector<EulerAngles> angles;

  // Run report.
  Band band;
  double lattice_N = 0.0;  // band radius converted to the lattice parameter
  std::size_t atom_count = 0;
  double energy_residual = 0.0;  // retained energy outside the grid, as a fraction
  double defect_fraction = 0.0;
};

DeformationField analyze_volume(const ScalarVolume& vol, const AnalysisConfig& config);

// Nearest-index upsampling from the analysis grid to the volume grid.
std::vector<double> upsample_nearest(const std::vector<double>& field, const Index3& from,
                                     const Index3& to);
std::vector<std::uint8_t> upsample_nearest(const std::vector<std::uint8_t>& field,
                                           const Index3& from, const Index3& to);

}  // namespace xtal
