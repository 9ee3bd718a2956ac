#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "test_support.hpp"
#include "wavemap/connection.hpp"
#include "wavemap/errors.hpp"
#include "wavemap/lp.hpp"

using namespace wavemap;
using namespace wavemap::connection;
using namespace testsupport;

namespace {

// Independent Picard map built from field-level operations.
OneForm oracle_map(const OneForm& a, const OneForm& b) {
  int n = b.n();
  OneForm out(b.grid());
  for (int j = 0; j <= n; ++j) {
    LieAlgebraField acc(b.grid());
    for (int k = 1; k <= n; ++k) {
      if (k == j) continue;
      auto w = bracket(a[k], a[j]) + bracket(b[k], b[j]);
      acc = acc - differentiate(lp::inverse_laplacian(w), k);
    }
    out[j] = acc;
  }
  return out;
}

OneForm two_mode_b(const Grid& grid, double amp) {
  OneForm b(grid);
  int n = grid.n;
  for (int mu = 0; mu <= n; ++mu) {
    std::vector<int> x1(n, 0), x2(n, 0);
    x1[mu % n] = 1;
    x2[(mu + 1) % n] = 1;
    x2[(mu + 2) % n] = mu % 2 ? -1 : 1;
    su2::Vec3 c1{0, 0, 0}, c2{0, 0, 0};
    c1[mu % 3] = amp;
    c2[(mu + 1) % 3] = amp;
    b[mu] = two_mode(grid, x1, c1, x2, c2);
  }
  return b;
}

double spatial_div(const OneForm& a) {
  std::vector<LieAlgebraField> sp(a.e.begin() + 1, a.e.end());
  return l2_norm(divergence(sp));
}

}  // namespace

TEST_CASE("curvature vanishes for zero and for constant commuting connections") {
  Grid g = grid_of(3, 8, 2, 0.5);
  auto zero = SpaceTimeField::zeros(g, 4, true);
  for (const auto& F : curvature(zero))
    for (const auto& f : F.e) CHECK(max_abs(f) == 0.0);

  auto A = SpaceTimeField::zeros(g, 4, true);
  for (auto& slice : A.values)
    for (int mu = 0; mu < 4; ++mu) slice[mu] = LieAlgebraField::constant(g, {0.3 * (mu + 1), 0.0, 0.0});
  for (const auto& F : curvature(A))
    for (const auto& f : F.e) CHECK(max_abs(f) < 1e-15);
}

TEST_CASE("curvature requires derivative channels") {
  Grid g = grid_of(3, 8, 1);
  auto A = SpaceTimeField::zeros(g, 4, false);
  CHECK_THROWS_AS(curvature(A), ContractError);
}

TEST_CASE("curvature is antisymmetric and matches the component formula") {
  Grid g = grid_of(3, 8);
  std::mt19937_64 rng(5);
  OneForm a = random_oneform(g, rng, 2.0, 0.3), r = random_oneform(g, rng, 2.0, 0.3);
  TwoForm F = curvature_slice(a, r);
  CHECK(max_abs(F.get(2, 1) + F.get(1, 2)) == 0.0);
  CHECK(max_abs(F.get(2, 2)) == 0.0);
  auto f01 = r[1] - differentiate(a[0], 1) + bracket(a[0], a[1]);
  CHECK(rel_diff(F.get(0, 1), f01) < 1e-14);
  auto f23 = differentiate(a[3], 2) - differentiate(a[2], 3) + bracket(a[2], a[3]);
  CHECK(rel_diff(F.get(2, 3), f23) < 1e-14);
}

TEST_CASE("pure gauge connections are flat") {
  Grid g = grid_of(4, 16);
  std::mt19937_64 rng(11);
  auto h = group_exp(random_field(g, rng, 1.0, 0.1));
  std::vector<LieAlgebraField> A;
  double scale = 0.0;
  for (int j = 1; j <= 4; ++j) {
    A.push_back(-right_derivative(h, j));
    scale += std::pow(l2_norm(A.back()), 2);
  }
  double f = 0.0;
  for (const auto& x : spatial_curvature(A)) f += std::pow(l2_norm(x), 2);
  CHECK(std::sqrt(f) <= 1e-8 * std::max(scale, 1e-300) + 1e-12);
}

TEST_CASE("curvature is gauge covariant") {
  Grid g = grid_of(3, 16);
  std::mt19937_64 rng(17);
  std::vector<LieAlgebraField> A;
  for (int j = 0; j < 3; ++j) A.push_back(random_field(g, rng, 1.0, 0.2));
  auto gf = group_exp(random_field(g, rng, 1.0, 0.1));
  auto FA = spatial_curvature(A);
  auto Fg = spatial_curvature(gauge_transform(gf, A));
  for (std::size_t i = 0; i < FA.size(); ++i) CHECK(l2_norm(Fg[i] - adjoint(gf, FA[i])) <= 1e-9);
}

TEST_CASE("solve_connection: zero and abelian data give zero") {
  Grid g = grid_of(4, 8);
  auto r0 = solve_connection(OneForm(g));
  for (const auto& f : r0.a.e) CHECK(max_abs(f) == 0.0);

  std::mt19937_64 rng(3);
  OneForm b(g);
  for (auto& f : b.e) {
    auto s = random_field(g, rng, 2.0, 0.01);
    f = LieAlgebraField::from_physical(g, {s.component(0), RealArray(g.points(), 0.0), RealArray(g.points(), 0.0)});
  }
  auto r1 = solve_connection(b);
  for (const auto& f : r1.a.e) CHECK(max_abs(f) == 0.0);
}

TEST_CASE("solve_connection matches a brute-force Picard oracle iterate by iterate") {
  Grid g = grid_of(4, 16);
  OneForm b = two_mode_b(g, 1e-2);
  ConnectionOptions opt;
  opt.record_iterates = true;
  auto res = solve_connection(b, opt);
  REQUIRE(!res.iterates.empty());

  OneForm it = oracle_map(OneForm(g), b);
  for (std::size_t m = 0; m < res.iterates.size(); ++m) {
    double d = oneform_l2(res.iterates[m] - it) / oneform_l2(it);
    CHECK(d < 1e-12);
    it = oracle_map(it, b);
  }
  CHECK(res.contraction <= 0.1);
  CHECK(res.residual <= 1e-10);
  CHECK(res.relative_residual <= 1e-10);
  CHECK(oneform_l2(oracle_map(res.a, b) - res.a) < opt.tol);
}

TEST_CASE("solve_connection output is divergence-free") {
  Grid g = grid_of(4, 8);
  std::mt19937_64 rng(23);
  for (int s = 0; s < 5; ++s) {
    OneForm b = random_oneform(g, rng, 2.0, 0.02);
    auto res = solve_connection(b);
    CHECK(spatial_div(res.a) <= 1e-11 * oneform_l2(res.a));
    CHECK(res.divergence <= 1e-11 * oneform_l2(res.a));
  }
}

TEST_CASE("solve_connection output scales quadratically in b") {
  Grid g = grid_of(4, 8);
  std::mt19937_64 rng(29);
  OneForm b = random_oneform(g, rng, 2.0, 1.0);
  for (double amp : {1e-3, 5e-3, 1e-2}) {
    double a1 = oneform_l2(solve_connection(amp * b).a);
    double a2 = oneform_l2(solve_connection((2 * amp) * b).a);
    double expo = std::log2(a2 / a1);
    CHECK(expo >= 1.9);
    CHECK(expo <= 2.1);
  }
}

TEST_CASE("solve_connection gates and reports divergence") {
  Grid g = grid_of(4, 8);
  std::mt19937_64 rng(31);
  OneForm big = random_oneform(g, rng, 2.0, 40.0);
  CHECK_THROWS_AS(solve_connection(big), PreconditionError);
  ConnectionOptions opt;
  opt.gate = 0.0;
  opt.max_iter = 200;
  CHECK_THROWS_AS(solve_connection(big, opt), DivergenceError);
  OneForm small = random_oneform(g, rng, 2.0, 0.02);
  opt.max_iter = 1;
  opt.tol = 1e-30;
  CHECK_THROWS_AS(solve_connection(small, opt), NonConvergenceError);
}

TEST_CASE("solve_connection_rate matches a finite difference in time") {
  Grid g = grid_of(4, 8);
  std::mt19937_64 rng(37);
  OneForm b = random_oneform(g, rng, 2.0, 0.02), bd = random_oneform(g, rng, 2.0, 0.02);
  auto a = solve_connection(b).a;
  auto r = solve_connection_rate(a, b, bd);
  double h = 1e-4;
  ConnectionOptions tight;
  tight.tol = 1e-14;
  auto ap = solve_connection(b + h * bd, tight).a;
  auto am = solve_connection(b - h * bd, tight).a;
  OneForm fd = (0.5 / h) * (ap - am);
  CHECK(oneform_l2(fd - r) <= 1e-6 * oneform_l2(r));
}

TEST_CASE("coulomb_fix_slice leaves divergence-free connections unchanged") {
  Grid g = grid_of(4, 8);
  std::mt19937_64 rng(41);
  // A_j = sum_k d_k W_kj with W antisymmetric is divergence-free.
  std::vector<LieAlgebraField> W;
  for (int i = 0; i < 6; ++i) W.push_back(random_field(g, rng, 2.0, 0.002));
  auto w = [&](int k, int j) -> LieAlgebraField {
    if (k == j) return LieAlgebraField(g);
    int a = std::min(k, j), b = std::max(k, j);
    int id = (a - 1) * 4 - (a - 1) * a / 2 + (b - a - 1);
    return k < j ? W[id] : -W[id];
  };
  std::vector<LieAlgebraField> A;
  for (int j = 1; j <= 4; ++j) {
    LieAlgebraField acc(g);
    for (int k = 1; k <= 4; ++k) acc = acc + differentiate(w(k, j), k);
    A.push_back(acc);
  }
  auto res = coulomb_fix_slice(A);
  CHECK(res.iterations == 0);
  CHECK(sup_distance(res.g, GroupField(g)) == 0.0);
  for (int j = 0; j < 4; ++j) CHECK(max_abs(res.a_tilde[j] - A[j]) == 0.0);
}

TEST_CASE("coulomb_fix_slice trivializes a pure gauge") {
  Grid g = grid_of(4, 16);
  std::mt19937_64 rng(43);
  auto h = group_exp(random_field(g, rng, 1.0, 0.1));
  std::vector<LieAlgebraField> A;
  for (int j = 1; j <= 4; ++j) A.push_back(-right_derivative(h, j));
  auto res = coulomb_fix_slice(A);
  double s = 0.0;
  for (const auto& f : res.a_tilde) s += std::pow(l2_norm(f), 2);
  CHECK(std::sqrt(s) <= 1e-6);
  CHECK(res.iterations > 0);
}

TEST_CASE("coulomb_fix_slice ensemble: converged, bounded ratio") {
  Grid g = grid_of(4, 8);
  std::mt19937_64 rng(47);
  CoulombOptions opt;
  double lo = 1e300, hi = 0.0;
  for (int s = 0; s < 30; ++s) {
    std::vector<LieAlgebraField> A;
    for (int j = 0; j < 4; ++j) A.push_back(random_field(g, rng, 2.0, 0.05));
    auto res = coulomb_fix_slice(A, opt);
    CHECK(res.divergence <= opt.tol);
    lo = std::min(lo, res.ratio);
    hi = std::max(hi, res.ratio);
  }
  CHECK(hi / lo <= 10.0);
}

TEST_CASE("coulomb_fix_slice enforces its gates") {
  Grid g = grid_of(4, 8);
  std::mt19937_64 rng(53);
  std::vector<LieAlgebraField> A;
  for (int j = 0; j < 4; ++j) A.push_back(random_field(g, rng, 2.0, 5.0));
  CHECK_THROWS_AS(coulomb_fix_slice(A), PreconditionError);
  std::vector<LieAlgebraField> B;
  for (int j = 0; j < 4; ++j) B.push_back(random_field(g, rng, 2.0, 0.05));
  CoulombOptions opt;
  opt.max_iter = 1;
  opt.tol = 1e-30;
  try {
    coulomb_fix_slice(B, opt);
    FAIL("expected NonConvergenceError");
  } catch (const NonConvergenceError& e) {
    CHECK(e.history.size() == 2);
  }
}
