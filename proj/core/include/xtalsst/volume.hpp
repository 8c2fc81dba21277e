#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "xtalsst/errors.hpp"
#include "xtalsst/types.hpp"

namespace xtal {

// Real scalar field on the periodic unit cube. Voxel (n1,n2,n3) samples the
// point x = (n1/L1, n2/L2, n3/L3); storage is row-major, last index fastest.
struct ScalarVolume {
  Index3 dims{0, 0, 0};
  std::vector<double> data;

  ScalarVolume() = default;
  ScalarVolume(int n1, int n2, int n3)
      : dims{n1, n2, n3},
        data(static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2) *
                 static_cast<std::size_t>(n3),
             0.0) {}

  std::size_t size() const { return data.size(); }

  std::size_t offset(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k;
  }

  double& at(int i, int j, int k) { return data[offset(i, j, k)]; }
  double at(int i, int j, int k) const { return data[offset(i, j, k)]; }

  bool is_cube() const { return dims[0] == dims[1] && dims[1] == dims[2]; }
};

inline void validate_volume(const ScalarVolume& v) {
  if (v.dims[0] <= 0 || v.dims[1] <= 0 || v.dims[2] <= 0)
    throw ValidationError("volume dims must be positive");
  const auto expect = static_cast<std::size_t>(v.dims[0]) * v.dims[1] * v.dims[2];
  if (v.data.size() != expect)
    throw ValidationError("volume data length does not match dims");
  for (double x : v.data)
    if (!std::isfinite(x)) throw ValidationError("volume contains non-finite values");
}

}  // namespace xtal
