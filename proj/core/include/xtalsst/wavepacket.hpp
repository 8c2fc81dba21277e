#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "xtalsst/spectrum.hpp"
#include "xtalsst/types.hpp"

namespace xtal {

// One frequency-domain window: a box of integer frequencies [lo, lo+n) per
// axis around the real-valued center, with a separable profile stored as
// per-axis factors. The normalized window is profile / sqrt(sum of squared
// profiles over all atoms at that frequency), so squared windows sum to 1
// everywhere the atlas covers.
struct WavePacketAtom {
  Vec3 center = Vec3::Zero();
  Index3 lo{0, 0, 0};
  Index3 n{0, 0, 0};
  std::array<std::vector<double>, 3> factor;

  double profile(int i1, int i2, int i3) const {
    return factor[0][i1] * factor[1][i2] * factor[2][i3];
  }
};

struct WavePacketAtlas {
  int L = 0;           // source grid side
  double s = 0.5;      // geometric scaling exponent
  double c_w = 2.0;    // window width constant
  double r1 = 0.0, r2 = 0.0;
  double pitch = 0.0;  // center lattice spacing, c_w * r1^s / 2
  int lb = 0;          // output grid side per axis

  // Stored half of the atlas: centers lexicographically positive. The mirror
  // atom at -a carries the conjugate coefficients of a real input.
  std::vector<WavePacketAtom> atoms;

  // Dense over the wrapped frequency grid (L^3): 1/sqrt(sum of squared
  // profiles, stored + mirrored), 0 where uncovered.
  std::vector<double> inv_norm;

  // 1 where the frequency is covered by stored atoms only (no mirror
  // overlap); spectra supported here make the stored half a tight frame.
  std::vector<std::uint8_t> tight;

  std::size_t freq_offset(int k1, int k2, int k3) const {
    return (static_cast<std::size_t>(k1) * L + k2) * L + k3;
  }
  // Normalized window value of `atom` at box-local sample (i1,i2,i3).
  double window(const WavePacketAtom& atom, int i1, int i2, int i3) const;
};

// Tiles the annulus r1 <= |xi| <= r2 with overlapping boxes centered on a
// lattice of pitch c_w*r1^s/2, keeps boxes meeting the annulus, clips them to
// the symmetric frequency grid [-(L/2-1), L/2-1]^3, and stores one atom per
// conjugate pair. lb_override, when positive, replaces the default output
// grid side (smallest power of two >= twice the largest box side).
WavePacketAtlas build_atlas(int L, const Band& band, double s, double c_w,
                            int lb_override = 0);

// Coefficients on the lb^3 output grid, one contiguous block per stored atom;
// gradient component c of atom t lives at block (3*t + c) of `grad`.
struct CoefficientField {
  int lb = 0;
  std::size_t atom_count = 0;
  bool has_gradients = false;
  std::vector<std::complex<double>> w;
  std::vector<std::complex<double>> grad;

  std::size_t block() const { return static_cast<std::size_t>(lb) * lb * lb; }
  const std::complex<double>* w_of(std::size_t atom) const { return w.data() + atom * block(); }
  const std::complex<double>* grad_of(std::size_t atom, int c) const {
    return grad.data() + (atom * 3 + c) * block();
  }
};

CoefficientField forward_transform(const SpectralVolume& spec, const WavePacketAtlas& atlas);
CoefficientField gradient_transform(const SpectralVolume& spec, const WavePacketAtlas& atlas);

// Per-atom kernel shared by the materialized transforms and the streaming
// pipeline: fills w (lb^3) and, when grad is non-null, the three gradient
// blocks (lb^3 each, component-major).
void transform_atom(const SpectralVolume& spec, const WavePacketAtlas& atlas,
                    const WavePacketAtom& atom, std::complex<double>* w,
                    std::complex<double>* grad);

}  // namespace xtal
