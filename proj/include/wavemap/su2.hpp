#pragma once

#include <array>
#include <cmath>

// Pointwise su(2) / SU(2) algebra.
//
// A Lie-algebra element is a coefficient vector c in the basis X_1, X_2, X_3
// with [X_1, X_2] = X_3 (cyclic) and |X_i| = 1. It is identified with the pure
// quaternion (0, c/2); the group is the unit quaternions (w, x, y, z).
namespace wavemap::su2 {

using Vec3 = std::array<double, 3>;
using Quat = std::array<double, 4>;

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline Quat identity() { return {1.0, 0.0, 0.0, 0.0}; }

inline Quat mul(const Quat& p, const Quat& q) {
  return {p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
          p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
          p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
          p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0]};
}

inline Quat conj(const Quat& q) { return {q[0], -q[1], -q[2], -q[3]}; }

inline Quat normalized(const Quat& q) {
  double s = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  return {q[0] / s, q[1] / s, q[2] / s, q[3] / s};
}

// exp of the algebra element c: (cos(|c|/2), sin(|c|/2) c/|c|).
inline Quat exp(const Vec3& c) {
  double th = std::sqrt(dot(c, c));
  double h = 0.5 * th;
  // sin(h)/th, with the series near zero
  double s = th > 1e-8 ? std::sin(h) / th : 0.5 - th * th / 48.0;
  return {std::cos(h), s * c[0], s * c[1], s * c[2]};
}

// Inverse of exp on the principal branch (rotation angle < 2 pi).
inline Vec3 log(const Quat& q) {
  double v = std::sqrt(q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  double th = 2.0 * std::atan2(v, q[0]);
  double s = v > 1e-14 ? th / v : 2.0;
  return {s * q[1], s * q[2], s * q[3]};
}

// q (0, c/2) q^{-1}, returned as algebra coefficients.
inline Vec3 adjoint(const Quat& q, const Vec3& c) {
  Quat p = mul(mul(q, Quat{0.0, c[0], c[1], c[2]}), conj(q));
  return {p[1], p[2], p[3]};
}

// Algebra coefficients of the pure quaternion 2*vec(p); used for q^{-1} dq
// and dq q^{-1} with p the corresponding quaternion product.
inline Vec3 algebra_part(const Quat& p) { return {2.0 * p[1], 2.0 * p[2], 2.0 * p[3]}; }

// Euclidean distance of unit quaternions (SU(2) itself, no double-cover
// identification).
inline double distance(const Quat& p, const Quat& q) {
  double d = 0.0;
  for (int i = 0; i < 4; ++i) d += (p[i] - q[i]) * (p[i] - q[i]);
  return std::sqrt(d);
}

}  // namespace wavemap::su2
