#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "xtalsst/types.hpp"
#include "xtalsst/volume.hpp"

namespace xtal {

enum class LatticeType { Cubic, Hexagonal };

// Axial period of the hexagonal cell, chosen so the four stored reciprocal
// directions share a single magnitude (one radial shell in the spectrum).
inline constexpr double kDefaultAxialRatio = 0.86602540378443864676;

// Number of stored reference directions: one per conjugate pair.
int reference_direction_count(LatticeType lattice);

// Columns are the direct lattice vectors, in units of one atomic period.
Mat3 lattice_basis(LatticeType lattice, double axial_ratio = kDefaultAxialRatio);

// Half-domain representatives of the dominant reciprocal directions, scaled
// by N. All returned vectors have equal magnitude.
std::vector<Vec3> reference_wavevectors(LatticeType lattice, double N,
                                        double axial_ratio = kDefaultAxialRatio);

// Mean-free periodic pattern of isotropic Gaussian bumps (width 0.25 periods)
// centered at the lattice sites basis*m, m integer. Mean-free holds exactly
// for the continuous cell average.
double lattice_pattern(const Vec3& z, const Mat3& basis);

// Smooth periodic warp x -> x + amplitude*sin(2*pi*(wavevector.x+phase))*direction.
// Integer wavevector entries keep the warp periodic on the unit cube.
struct SinusoidalWarp {
  double amplitude = 0.0;
  Vec3 wavevector = Vec3::Zero();
  double phase = 0.0;
  Vec3 direction = Vec3::UnitX();
};

struct GrainSpec {
  Vec3 seed = Vec3::Zero();  // in [0,1)^3
  EulerAngles rotation;
  std::optional<SinusoidalWarp> warp;
};

// Removes the atom bump at integer lattice site `site` of grain `grain`.
struct VacancySpec {
  int grain = 0;
  Index3 site{0, 0, 0};
};

// Inserts an extra strip of atom bumps between lattice planes: lattice
// coordinates u with u[normal_axis] = offset (half-integer), u[extend_axis]
// in [from, to], u[line_axis] free. Both strip edges are line defects.
struct HalfPlaneSpec {
  int grain = 0;
  int normal_axis = 0;
  double offset = 0.5;
  int extend_axis = 1;
  int from = 0;
  int to = 0;
};

struct PolycrystalSpec {
  Index3 dims{64, 64, 64};
  LatticeType lattice = LatticeType::Cubic;
  double N = 16.0;  // atomic periods per unit length
  double axial_ratio = kDefaultAxialRatio;
  std::vector<GrainSpec> grains;
  std::vector<VacancySpec> vacancies;
  std::vector<HalfPlaneSpec> half_planes;
  double amplitude = 1.0;
  double trend = 0.0;
  double noise_variance = 0.0;
  std::uint64_t seed = 0;
};

// Map from an image point to the grain's reference coordinates, and its
// analytic Jacobian. The ground-truth G equals the Jacobian.
Vec3 grain_reference_map(const GrainSpec& grain, const Vec3& x);
Mat3 grain_reference_jacobian(const GrainSpec& grain, const Vec3& x);

struct GroundTruth {
  Index3 dims{0, 0, 0};
  std::vector<std::int32_t> grain_id;   // per voxel
  std::vector<Mat3> G;                  // per voxel, Jacobian of the reference map
  std::vector<std::uint8_t> mask;       // 1 on grain boundaries / near point defects
};

// Renders the grain pattern through each grain's reference map on a periodic
// Voronoi partition of the seeds, then applies defects and the constant
// amplitude/trend. Noise is NOT applied here; see add_gaussian_noise.
std::pair<ScalarVolume, GroundTruth> generate_polycrystal(const PolycrystalSpec& spec);

ScalarVolume add_gaussian_noise(const ScalarVolume& vol, double variance, std::uint64_t seed);

}  // namespace xtal
