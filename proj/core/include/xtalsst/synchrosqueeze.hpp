#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "xtalsst/types.hpp"
#include "xtalsst/wavepacket.hpp"

namespace xtal {

// Spherical binning of wavevectors. Bins are centered on the grid points
// (nearest-center assignment): v-bin centers are integer multiples of dv
// inside [r1, r2]; psi bins cover [0, pi) with wraparound at pi; theta bins
// cover [0, pi] inclusive (n_theta + 1 bins).
struct SphericalGrid {
  double r1 = 0.0, r2 = 0.0;
  double dv = 1.0;
  int n_psi = 60;    // dpsi = pi / n_psi
  int n_theta = 60;  // dtheta = pi / n_theta

  int v_min = 0;  // first v-bin center index, ceil(r1/dv)
  int v_max = 0;  // last v-bin center index, floor(r2/dv)

  double dpsi() const;
  double dtheta() const;
  int v_bins() const { return v_max - v_min + 1; }
  std::uint32_t bin_count() const {
    return static_cast<std::uint32_t>(v_bins()) * n_psi * (n_theta + 1);
  }
};

SphericalGrid make_spherical_grid(double r1, double r2, double dv = 1.0, int n_psi = 60,
                                  int n_theta = 60);

// Antipodal fold: negates v if needed so (v2, v3, v1) is lexicographically
// nonnegative, i.e. the azimuth lands in [0, pi).
Vec3 fold_wavevector(const Vec3& v);

// (v, psi, theta) of the folded vector under the convention
// v = (r sin(theta) cos(psi), r sin(theta) sin(psi), r cos(theta)).
Vec3 to_spherical(const Vec3& folded);
Vec3 to_cartesian(const Vec3& sph);

// Flattened bin key, or kInvalidBin when the radial bin center falls outside
// [r1, r2]. Layout: (iv_rel * n_psi + ipsi) * (n_theta + 1) + itheta.
inline constexpr std::uint32_t kInvalidBin = 0xffffffffu;
std::uint32_t bin_key(const SphericalGrid& grid, const Vec3& v);
Vec3 bin_center_spherical(const SphericalGrid& grid, std::uint32_t key);

// Retained wavevector estimates of a materialized coefficient field.
struct WavevectorField {
  int lb = 0;
  double max_abs_coeff = 0.0;
  double threshold = 0.0;
  struct Entry {
    std::uint32_t atom;
    std::uint32_t b;
    Vec3 v;
    double weight;  // |W|^2
  };
  std::vector<Entry> entries;
};

// v = Im(grad W * conj(W)) / (2 pi |W|^2) on entries with
// |W| >= eps_rel * max|W|. Throws AnalysisError when nothing is retained.
WavevectorField local_wavevectors(const CoefficientField& coeffs, double eps_rel);

using SparseCells = std::vector<std::pair<std::uint32_t, double>>;

// Per spatial index: bin -> accumulated |W|^2, sorted by bin key.
struct SqueezeTensor {
  SphericalGrid grid;
  int lb = 0;
  std::vector<SparseCells> cells;  // lb^3 entries
  double total_energy = 0.0;

  double energy_at(std::size_t b) const;
};

SqueezeTensor squeeze(const WavevectorField& field, const SphericalGrid& grid);

// Called for every retained (atom, spatial index) with the raw (unfolded)
// wavevector estimate and weight |W|^2, in deterministic order.
using RetainedVisitor =
    std::function<void(std::uint32_t atom, std::uint32_t b, const Vec3& v, double weight)>;

struct SqueezeSummary {
  SqueezeTensor tensor;
  double max_abs_coeff = 0.0;
  std::size_t retained_count = 0;
  double retained_energy = 0.0;  // sum of |W|^2 over retained entries
  double binned_energy = 0.0;    // the part whose radial bin lies in range
};

// Streaming two-pass pipeline over the atlas atoms: pass one finds max|W|,
// pass two bins retained entries. Never materializes more than one atom.
SqueezeSummary squeeze_volume(const SpectralVolume& spec, const WavePacketAtlas& atlas,
                              double eps_rel, const SphericalGrid& grid, int threads = 1,
                              const RetainedVisitor& visitor = nullptr);

}  // namespace xtal
