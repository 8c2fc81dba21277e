#include "xtalsst/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "fft3.hpp"
#include "xtalsst/errors.hpp"

namespace xtal {

namespace {

void require_min_dims(const Index3& dims) {
  if (dims[0] < 8 || dims[1] < 8 || dims[2] < 8)
    throw ValidationError("spectral transforms need at least 8 samples per axis");
}

}  // namespace

SpectralVolume forward_fourier(const ScalarVolume& vol) {
  validate_volume(vol);
  require_min_dims(vol.dims);
  SpectralVolume spec;
  spec.dims = vol.dims;
  spec.data.assign(vol.data.begin(), vol.data.end());
  fft::c2c_inplace(spec.dims, spec.data.data(), -1);
  const double scale = 1.0 / std::sqrt(static_cast<double>(vol.size()));
  for (auto& c : spec.data) c *= scale;
  return spec;
}

ScalarVolume inverse_fourier(const SpectralVolume& spec) {
  require_min_dims(spec.dims);
  const std::size_t n =
      static_cast<std::size_t>(spec.dims[0]) * spec.dims[1] * spec.dims[2];
  if (spec.data.size() != n)
    throw ValidationError("spectral data length does not match dims");
  std::vector<std::complex<double>> buf = spec.data;
  fft::c2c_inplace(spec.dims, buf.data(), +1);
  ScalarVolume vol(spec.dims[0], spec.dims[1], spec.dims[2]);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) vol.data[i] = buf[i].real() * scale;
  return vol;
}

RadialSpectrum radial_power_spectrum(const SpectralVolume& spec, double delta) {
  if (!(delta >= 0.5)) throw ValidationError("radial bin step must be at least 0.5");
  const int L = std::min({spec.dims[0], spec.dims[1], spec.dims[2]});
  const double r_max = L / 2.0;
  const int n_max = static_cast<int>(std::floor(r_max / delta));

  RadialSpectrum E;
  E.delta = delta;
  E.values.assign(static_cast<std::size_t>(n_max) + 1, 0.0);

  for (int k1 = 0; k1 < spec.dims[0]; ++k1) {
    const int x1 = signed_freq(k1, spec.dims[0]);
    for (int k2 = 0; k2 < spec.dims[1]; ++k2) {
      const int x2 = signed_freq(k2, spec.dims[1]);
      for (int k3 = 0; k3 < spec.dims[2]; ++k3) {
        const int x3 = signed_freq(k3, spec.dims[2]);
        const double r = std::sqrt(static_cast<double>(x1) * x1 +
                                   static_cast<double>(x2) * x2 +
                                   static_cast<double>(x3) * x3);
        const int n = static_cast<int>(std::floor(r / delta));
        if (n < 1 || n > n_max) continue;
        E.values[n] += std::abs(spec.data[spec.offset_wrapped(k1, k2, k3)]) / (n * delta);
      }
    }
  }
  return E;
}

namespace {

// Centered 3-bin moving average over n >= 1, window shrinking at the ends.
std::vector<double> smooth3(const std::vector<double>& v) {
  std::vector<double> out(v.size(), 0.0);
  const int n_max = static_cast<int>(v.size()) - 1;
  for (int n = 1; n <= n_max; ++n) {
    double sum = v[n];
    int cnt = 1;
    if (n - 1 >= 1) { sum += v[n - 1]; ++cnt; }
    if (n + 1 <= n_max) { sum += v[n + 1]; ++cnt; }
    out[n] = sum / cnt;
  }
  return out;
}

constexpr double kTrendCutoff = 2.0;  // ignore bins at or below this radius
constexpr double kBandFraction = 0.1; // expansion stops below this peak fraction

}  // namespace

Band dominant_band(const RadialSpectrum& E) {
  const int n_max = static_cast<int>(E.values.size()) - 1;
  if (n_max < 1) throw AnalysisError("radial spectrum has no usable bins");
  // Zero the trend bins before smoothing so their mass cannot leak into the
  // first candidate bins and shadow the real bump.
  std::vector<double> detrended = E.values;
  for (int n = 0; n <= n_max; ++n)
    if (n * E.delta <= kTrendCutoff) detrended[n] = 0.0;
  const std::vector<double> sm = smooth3(detrended);

  int peak = -1;
  for (int n = 1; n <= n_max; ++n) {
    if (n * E.delta <= kTrendCutoff) continue;
    if (peak < 0 || sm[n] > sm[peak]) peak = n;
  }
  if (peak < 0 || sm[peak] <= 0.0)
    throw AnalysisError("no spectral energy above the trend cutoff");

  const double tau = kBandFraction * sm[peak];
  int lo = peak;
  while (lo - 1 >= 1 && sm[lo - 1] >= tau) --lo;
  int hi = peak;
  while (hi + 1 <= n_max && sm[hi + 1] >= tau) ++hi;
  if (hi == lo) hi = std::min(hi + 1, n_max);

  Band band;
  band.r1 = lo * E.delta;
  // n_max*delta never exceeds the Nyquist radius the bins were built from.
  band.r2 = std::min((hi + 1) * E.delta, n_max * E.delta);
  if (band.r2 <= band.r1) band.r1 = std::max(1, lo - 1) * E.delta;
  band.N = estimate_wavenumber(E, band.r1, band.r2);
  return band;
}

double estimate_wavenumber(const RadialSpectrum& E, double r1, double r2) {
  if (!(r1 > 0.0) || !(r2 > r1)) throw ValidationError("invalid band for wavenumber estimate");
  const int n_max = static_cast<int>(E.values.size()) - 1;
  const int lo = std::max(1, static_cast<int>(std::ceil(r1 / E.delta - 1e-9)));
  const int hi = std::min(n_max, static_cast<int>(std::floor(r2 / E.delta + 1e-9)));
  if (lo > hi) throw AnalysisError("band contains no radial bins");

  if (lo == hi) {
    if (E.values[lo] <= 0.0) throw AnalysisError("band has zero spectral mass");
    return lo * E.delta;
  }
  // Trapezoidal weights: half at the end nodes.
  double num = 0.0, den = 0.0;
  for (int n = lo; n <= hi; ++n) {
    const double w = (n == lo || n == hi) ? 0.5 : 1.0;
    num += w * (n * E.delta) * E.values[n];
    den += w * E.values[n];
  }
  if (den <= 0.0) throw AnalysisError("band has zero spectral mass");
  return num / den;
}

}  // namespace xtal
