#include "xtalsst/wavepacket.hpp"

#include <algorithm>
#include <cmath>

#include "fft3.hpp"
#include "xtalsst/errors.hpp"

namespace xtal {

namespace {

constexpr double kPi = 3.14159265358979323846;

int even_round(double x) { return std::max(2, 2 * static_cast<int>(std::lround(x / 2.0))); }

int pow2_at_least(int n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

// Per-axis profile: flat on the inner half of the support, cosine flank to
// zero at the edge. Any smooth positive-interior profile works here; the
// atlas-wide renormalization makes the squared windows sum to exactly 1.
double flank_profile(double t, double half_width) {
  const double a = std::abs(t);
  if (a >= half_width) return 0.0;
  if (a <= half_width / 2.0) return 1.0;
  return std::cos(kPi / 2.0 * (a - half_width / 2.0) / (half_width / 2.0));
}

}  // namespace

double WavePacketAtlas::window(const WavePacketAtom& atom, int i1, int i2, int i3) const {
  const int k1 = wrap_index(atom.lo[0] + i1, L);
  const int k2 = wrap_index(atom.lo[1] + i2, L);
  const int k3 = wrap_index(atom.lo[2] + i3, L);
  return atom.profile(i1, i2, i3) * inv_norm[freq_offset(k1, k2, k3)];
}

WavePacketAtlas build_atlas(int L, const Band& band, double s, double c_w, int lb_override) {
  if (L < 8 || L % 2 != 0) throw ValidationError("grid side must be even and at least 8");
  if (!(s >= 0.5 && s <= 1.0)) throw ValidationError("scaling exponent must lie in [1/2, 1]");
  if (!(c_w > 0.0)) throw ValidationError("window width constant must be positive");
  const double corner = std::sqrt(3.0) * L / 2.0;
  if (!(band.r1 > 0.0) || !(band.r2 > band.r1) || band.r2 > corner + 1e-9)
    throw ValidationError("band does not fit the frequency grid");

  WavePacketAtlas atlas;
  atlas.L = L;
  atlas.s = s;
  atlas.c_w = c_w;
  atlas.r1 = band.r1;
  atlas.r2 = band.r2;
  atlas.pitch = c_w * std::pow(band.r1, s) / 2.0;

  const int kmax = L / 2 - 1;  // symmetric sample range keeps conjugate pairs exact
  const int imax = static_cast<int>(std::floor((kmax + band.r2) / atlas.pitch));
  int max_extent = 0;
  int max_side = 2;

  for (int i = -imax; i <= imax; ++i) {
    for (int j = -imax; j <= imax; ++j) {
      for (int k = -imax; k <= imax; ++k) {
        // One atom per conjugate pair: keep lexicographically positive centers.
        if (!(i > 0 || (i == 0 && j > 0) || (i == 0 && j == 0 && k > 0))) continue;
        const Vec3 a(i * atlas.pitch, j * atlas.pitch, k * atlas.pitch);
        const double la = c_w * std::pow(std::max(a.norm(), band.r1), s);
        const int side = even_round(la);
        const double half = side / 2.0;

        WavePacketAtom atom;
        atom.center = a;
        bool empty = false;
        double dmin2 = 0.0, dmax2 = 0.0;
        for (int c = 0; c < 3; ++c) {
          int lo = static_cast<int>(std::ceil(a[c] - half));
          int hi = static_cast<int>(std::floor(a[c] + half));
          lo = std::max(lo, -kmax);
          hi = std::min(hi, kmax);
          if (lo > hi) { empty = true; break; }
          atom.lo[c] = lo;
          atom.n[c] = hi - lo + 1;
          const double near = std::clamp(0.0, static_cast<double>(lo), static_cast<double>(hi));
          dmin2 += near * near;
          dmax2 += std::max(static_cast<double>(lo) * lo, static_cast<double>(hi) * hi);
        }
        if (empty) continue;
        if (dmin2 > band.r2 * band.r2 || dmax2 < band.r1 * band.r1) continue;

        for (int c = 0; c < 3; ++c) {
          atom.factor[c].resize(atom.n[c]);
          for (int t = 0; t < atom.n[c]; ++t)
            atom.factor[c][t] = flank_profile(atom.lo[c] + t - a[c], half);
        }
        max_extent = std::max({max_extent, atom.n[0], atom.n[1], atom.n[2]});
        max_side = std::max(max_side, side);
        atlas.atoms.push_back(std::move(atom));
      }
    }
  }
  if (atlas.atoms.empty()) throw ValidationError("band is empty on this grid");

  // Squared-profile sums of the stored half, then of the mirrored pairs.
  const std::size_t n3 = static_cast<std::size_t>(L) * L * L;
  std::vector<double> ssum(n3, 0.0);
  for (const auto& atom : atlas.atoms) {
    for (int i1 = 0; i1 < atom.n[0]; ++i1) {
      const int k1 = wrap_index(atom.lo[0] + i1, L);
      for (int i2 = 0; i2 < atom.n[1]; ++i2) {
        const int k2 = wrap_index(atom.lo[1] + i2, L);
        const double f12 = atom.factor[0][i1] * atom.factor[1][i2];
        if (f12 == 0.0) continue;
        double* row = ssum.data() + atlas.freq_offset(k1, k2, 0);
        for (int i3 = 0; i3 < atom.n[2]; ++i3) {
          const double f = f12 * atom.factor[2][i3];
          row[wrap_index(atom.lo[2] + i3, L)] += f * f;
        }
      }
    }
  }

  atlas.inv_norm.assign(n3, 0.0);
  atlas.tight.assign(n3, 0);
  for (int k1 = 0; k1 < L; ++k1) {
    const int m1 = (L - k1) % L;
    for (int k2 = 0; k2 < L; ++k2) {
      const int m2 = (L - k2) % L;
      for (int k3 = 0; k3 < L; ++k3) {
        const int m3 = (L - k3) % L;
        const double own = ssum[atlas.freq_offset(k1, k2, k3)];
        const double mirror = ssum[atlas.freq_offset(m1, m2, m3)];
        const double s2 = own + mirror;
        if (s2 > 0.0)
          atlas.inv_norm[atlas.freq_offset(k1, k2, k3)] = 1.0 / std::sqrt(s2);
        if (own > 0.0 && mirror == 0.0) atlas.tight[atlas.freq_offset(k1, k2, k3)] = 1;
      }
    }
  }

  atlas.lb = lb_override > 0 ? lb_override : pow2_at_least(2 * max_side);
  if (atlas.lb < max_extent)
    throw ValidationError("output grid side smaller than the largest window box");
  return atlas;
}

void transform_atom(const SpectralVolume& spec, const WavePacketAtlas& atlas,
                    const WavePacketAtom& atom, std::complex<double>* w,
                    std::complex<double>* grad) {
  const int L = atlas.L;
  const int lb = atlas.lb;
  const Index3 bdims{lb, lb, lb};
  const std::size_t block = static_cast<std::size_t>(lb) * lb * lb;

  std::fill(w, w + block, std::complex<double>(0.0, 0.0));
  if (grad) std::fill(grad, grad + 3 * block, std::complex<double>(0.0, 0.0));

  for (int i1 = 0; i1 < atom.n[0]; ++i1) {
    const int x1 = atom.lo[0] + i1;
    const int k1 = wrap_index(x1, L);
    const int b1 = ((x1 % lb) + lb) % lb;
    for (int i2 = 0; i2 < atom.n[1]; ++i2) {
      const int x2 = atom.lo[1] + i2;
      const int k2 = wrap_index(x2, L);
      const int b2 = ((x2 % lb) + lb) % lb;
      const double f12 = atom.factor[0][i1] * atom.factor[1][i2];
      if (f12 == 0.0) continue;
      for (int i3 = 0; i3 < atom.n[2]; ++i3) {
        const int x3 = atom.lo[2] + i3;
        const int k3 = wrap_index(x3, L);
        const double g = f12 * atom.factor[2][i3] *
                         atlas.inv_norm[atlas.freq_offset(k1, k2, k3)];
        if (g == 0.0) continue;
        const std::complex<double> gv = g * spec.data[spec.offset_wrapped(k1, k2, k3)];
        const int b3 = ((x3 % lb) + lb) % lb;
        const std::size_t bi = (static_cast<std::size_t>(b1) * lb + b2) * lb + b3;
        w[bi] += gv;
        if (grad) {
          const std::complex<double> m = 2.0 * kPi * std::complex<double>(0.0, 1.0) * gv;
          grad[bi] += static_cast<double>(x1) * m;
          grad[block + bi] += static_cast<double>(x2) * m;
          grad[2 * block + bi] += static_cast<double>(x3) * m;
        }
      }
    }
  }

  const double scale = 1.0 / std::pow(static_cast<double>(lb), 1.5);
  fft::c2c_inplace(bdims, w, +1);
  for (std::size_t i = 0; i < block; ++i) w[i] *= scale;
  if (grad) {
    for (int c = 0; c < 3; ++c) {
      fft::c2c_inplace(bdims, grad + c * block, +1);
      for (std::size_t i = 0; i < block; ++i) grad[c * block + i] *= scale;
    }
  }
}

namespace {

CoefficientField run_transform(const SpectralVolume& spec, const WavePacketAtlas& atlas,
                               bool with_gradients) {
  if (spec.dims[0] != atlas.L || spec.dims[1] != atlas.L || spec.dims[2] != atlas.L)
    throw ValidationError("spectrum dims do not match the atlas grid");
  CoefficientField field;
  field.lb = atlas.lb;
  field.atom_count = atlas.atoms.size();
  field.has_gradients = with_gradients;

  const std::size_t block = field.block();
  const std::size_t bytes =
      field.atom_count * block * sizeof(std::complex<double>) * (with_gradients ? 4 : 1);
  if (bytes > (3ull << 30))
    throw ValidationError(
        "coefficient field would exceed 3 GiB; use the streaming pipeline instead");

  field.w.resize(field.atom_count * block);
  if (with_gradients) field.grad.resize(field.atom_count * 3 * block);
  for (std::size_t t = 0; t < field.atom_count; ++t)
    transform_atom(spec, atlas, atlas.atoms[t], field.w.data() + t * block,
                   with_gradients ? field.grad.data() + t * 3 * block : nullptr);
  return field;
}

}  // namespace

CoefficientField forward_transform(const SpectralVolume& spec, const WavePacketAtlas& atlas) {
  return run_transform(spec, atlas, false);
}

CoefficientField gradient_transform(const SpectralVolume& spec, const WavePacketAtlas& atlas) {
  return run_transform(spec, atlas, true);
}

}  // namespace xtal
