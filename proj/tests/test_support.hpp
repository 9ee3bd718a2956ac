#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "wavemap/fields.hpp"

namespace testsupport {

using namespace wavemap;

inline Grid grid_of(int n, int N, int M = 1, double T = 1.0) {
  Grid g;
  g.n = n;
  g.N = N;
  g.M = M;
  g.T = T;
  return g;
}

// Band-limited random field rescaled to the given sup norm.
inline LieAlgebraField random_field(const Grid& grid, std::mt19937_64& rng, double radius, double amplitude) {
  auto f = random_band_limited(grid, rng, radius);
  double m = max_abs(f);
  return m > 0.0 ? (amplitude / m) * f : f;
}

inline OneForm random_oneform(const Grid& grid, std::mt19937_64& rng, double radius, double amplitude) {
  OneForm a(grid);
  for (auto& f : a.e) f = random_field(grid, rng, radius, amplitude);
  return a;
}

// c1 cos(2 pi xi1.x / L) + c2 sin(2 pi xi2.x / L)
inline LieAlgebraField two_mode(const Grid& grid, const std::vector<int>& xi1, const su2::Vec3& c1,
                                const std::vector<int>& xi2, const su2::Vec3& c2) {
  return LieAlgebraField::sample(grid, [&](const std::vector<double>& x) {
    double p1 = 0.0, p2 = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) {
      p1 += xi1[a] * x[a];
      p2 += xi2[a] * x[a];
    }
    double s = 2.0 * std::numbers::pi / grid.L;
    double u = std::cos(s * p1), v = std::sin(s * p2);
    return su2::Vec3{c1[0] * u + c2[0] * v, c1[1] * u + c2[1] * v, c1[2] * u + c2[2] * v};
  });
}

inline double rel_diff(const LieAlgebraField& a, const LieAlgebraField& b) {
  double nb = l2_norm(b);
  double d = l2_norm(a - b);
  return nb > 0.0 ? d / nb : d;
}

inline double oneform_l2(const OneForm& a) {
  double s = 0.0;
  for (const auto& f : a.e) s += std::pow(l2_norm(f), 2);
  return std::sqrt(s);
}

}  // namespace testsupport
