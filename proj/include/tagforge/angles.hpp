#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace tagforge {

// Degree-based trigonometry. Arguments are folded with exact subtractions so that
// multiples of 90 give exact 0/±1 and sin(360 - a) == -sin(a) bit for bit; the
// renderer's mirror symmetry depends on both.

template <typename Scalar>
[[nodiscard]] Scalar wrap_degrees(Scalar deg) {
  Scalar d = std::fmod(deg, Scalar(360));
  if (d < 0) d += Scalar(360);
  if (d >= Scalar(360)) d = 0;
  return d;
}

template <typename Scalar>
[[nodiscard]] Scalar sin_deg(Scalar deg) {
  constexpr Scalar to_rad = std::numbers::pi_v<Scalar> / Scalar(180);
  Scalar d = wrap_degrees(deg);
  Scalar sign = 1;
  if (d > Scalar(180)) {
    d = Scalar(360) - d;
    sign = -1;
  }
  if (d > Scalar(90)) d = Scalar(180) - d;
  if (d > Scalar(45)) return sign * std::cos((Scalar(90) - d) * to_rad);
  return sign * std::sin(d * to_rad);
}

template <typename Scalar>
[[nodiscard]] Scalar cos_deg(Scalar deg) {
  constexpr Scalar to_rad = std::numbers::pi_v<Scalar> / Scalar(180);
  Scalar d = wrap_degrees(deg);
  if (d > Scalar(180)) d = Scalar(360) - d;
  Scalar sign = 1;
  if (d > Scalar(90)) {
    d = Scalar(180) - d;
    sign = -1;
  }
  if (d > Scalar(45)) return sign * std::sin((Scalar(90) - d) * to_rad);
  return sign * std::cos(d * to_rad);
}

template <typename Scalar>
[[nodiscard]] Eigen::Matrix<Scalar, 3, 3> rotation_x(Scalar deg) {
  const Scalar s = sin_deg(deg), c = cos_deg(deg);
  Eigen::Matrix<Scalar, 3, 3> r;
  r << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return r;
}

template <typename Scalar>
[[nodiscard]] Eigen::Matrix<Scalar, 3, 3> rotation_y(Scalar deg) {
  const Scalar s = sin_deg(deg), c = cos_deg(deg);
  Eigen::Matrix<Scalar, 3, 3> r;
  r << c, 0, s,
       0, 1, 0,
       -s, 0, c;
  return r;
}

template <typename Scalar>
[[nodiscard]] Eigen::Matrix<Scalar, 3, 3> rotation_z(Scalar deg) {
  const Scalar s = sin_deg(deg), c = cos_deg(deg);
  Eigen::Matrix<Scalar, 3, 3> r;
  r << c, -s, 0,
       s, c, 0,
       0, 0, 1;
  return r;
}

/// Intrinsic Z, then X, then Y: R = Rz * Rx * Ry (BVH channel order ZXY).
template <typename Scalar>
[[nodiscard]] Eigen::Matrix<Scalar, 3, 3> rotation_zxy(Scalar z_deg, Scalar x_deg, Scalar y_deg) {
  return rotation_z(z_deg) * rotation_x(x_deg) * rotation_y(y_deg);
}

}  // namespace tagforge
