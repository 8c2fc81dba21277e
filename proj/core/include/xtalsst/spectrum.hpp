#pragma once

#include <complex>
#include <vector>

#include "xtalsst/types.hpp"
#include "xtalsst/volume.hpp"

namespace xtal {

// Signed frequency of the wrapped storage index k in [0, L): the frequency
// range is -L/2 <= xi < L/2.
inline int signed_freq(int k, int L) { return k < (L + 1) / 2 ? k : k - L; }
inline int wrap_index(int xi, int L) { return xi >= 0 ? xi : xi + L; }

// Complex Fourier coefficients, stored in wrapped index order (index k along
// each axis holds frequency signed_freq(k, L)). Normalization is unitary.
struct SpectralVolume {
  Index3 dims{0, 0, 0};
  std::vector<std::complex<double>> data;

  std::size_t size() const { return data.size(); }

  std::size_t offset_wrapped(int k1, int k2, int k3) const {
    return (static_cast<std::size_t>(k1) * dims[1] + k2) * dims[2] + k3;
  }
  std::complex<double>& coeff(int xi1, int xi2, int xi3) {
    return data[offset_wrapped(wrap_index(xi1, dims[0]), wrap_index(xi2, dims[1]),
                               wrap_index(xi3, dims[2]))];
  }
  std::complex<double> coeff(int xi1, int xi2, int xi3) const {
    return data[offset_wrapped(wrap_index(xi1, dims[0]), wrap_index(xi2, dims[1]),
                               wrap_index(xi3, dims[2]))];
  }
};

SpectralVolume forward_fourier(const ScalarVolume& vol);
ScalarVolume inverse_fourier(const SpectralVolume& spec);

// Shell-averaged magnitude spectrum. values[n] holds the bin at r = n*delta,
// covering |xi| in [n*delta, (n+1)*delta), scaled by 1/(n*delta); n = 0 is
// the excluded DC bin and stays 0. Defined up to r_max = L/2.
struct RadialSpectrum {
  double delta = 1.0;
  std::vector<double> values;

  double r(std::size_t n) const { return static_cast<double>(n) * delta; }
};

struct Band {
  double r1 = 0.0;
  double r2 = 0.0;
  double N = 0.0;  // estimated dominant wavenumber, r1 < N < r2
};

RadialSpectrum radial_power_spectrum(const SpectralVolume& spec, double delta);

// Locates the dominant bump of E (above r_min = 2) after 3-bin moving-average
// smoothing, expands to the 10%-of-peak crossings, and estimates N inside.
Band dominant_band(const RadialSpectrum& E);

// Normalized weighted mean of r over [r1, r2], trapezoidal on the bins.
double estimate_wavenumber(const RadialSpectrum& E, double r1, double r2);

}  // namespace xtal
