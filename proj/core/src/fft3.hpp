#pragma once

#include <complex>

#include "xtalsst/types.hpp"

namespace xtal::fft {

// Unnormalized in-place c2c DFT over a row-major 3D array; sign -1 applies
// e^{-2 pi i ...} (forward), +1 the conjugate. Plans are cached per (dims,
// sign); concurrent calls on distinct buffers are safe.
void c2c_inplace(const Index3& dims, std::complex<double>* buf, int sign);

}  // namespace xtal::fft
