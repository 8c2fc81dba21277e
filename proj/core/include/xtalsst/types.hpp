#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

namespace xtal {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Index3 = std::array<int, 3>;

struct EulerAngles {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

// R = Rx(alpha) * Ry(beta) * Rz(gamma), elemental rotations about the fixed
// coordinate axes. euler_angles() in analysis.hpp inverts this parametrization.
inline Mat3 rotation_from_euler(const EulerAngles& e) {
  const double ca = std::cos(e.alpha), sa = std::sin(e.alpha);
  const double cb = std::cos(e.beta), sb = std::sin(e.beta);
  const double cg = std::cos(e.gamma), sg = std::sin(e.gamma);
  Mat3 r;
  r << cb * cg, -cb * sg, sb,
      ca * sg + sa * sb * cg, ca * cg - sa * sb * sg, -sa * cb,
      sa * sg - ca * sb * cg, sa * cg + ca * sb * sg, ca * cb;
  return r;
}

}  // namespace xtal
