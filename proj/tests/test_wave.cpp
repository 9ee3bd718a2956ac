#include <doctest.h>

#include <cmath>
#include <numbers>

#include "test_support.hpp"
#include "wavemap/errors.hpp"
#include "wavemap/norms.hpp"
#include "wavemap/wave.hpp"

using namespace wavemap;
using namespace wavemap::wave;
using namespace testsupport;

namespace {

constexpr double kPi = std::numbers::pi;

LieAlgebraField cos_mode(const Grid& g, const std::vector<int>& xi, const su2::Vec3& c) {
  return two_mode(g, xi, c, std::vector<int>(g.n, 0), {0, 0, 0});
}

SpaceTimeField forcing_of(const Grid& g, const std::function<LieAlgebraField(double)>& at) {
  auto F = SpaceTimeField::zeros(g, 1, false);
  for (int m = 0; m <= g.M; ++m) F.values[m][0] = at(g.time(m));
  return F;
}

double series_diff(const SpaceTimeField& a, const SpaceTimeField& b, bool derivs) {
  double worst = 0.0;
  for (int m = 0; m < a.slices(); ++m)
    for (int c = 0; c < a.channels; ++c) {
      const auto& x = derivs ? a.derivs[m][c] : a.values[m][c];
      const auto& y = derivs ? b.derivs[m][c] : b.values[m][c];
      worst = std::max(worst, max_abs(x - y));
    }
  return worst;
}

// Sup over time of the error against A(t) cos(2 pi x1) X1, where
// A'' + w^2 A = cos(nu t), A(0) = A'(0) = 0.
double forced_mode_error(int M) {
  Grid g = grid_of(2, 8, M, 1.0);
  const double w = 2.0 * kPi, nu = 5.0;
  auto e = cos_mode(g, {1, 0}, {1, 0, 0});
  auto F = forcing_of(g, [&](double t) { return std::cos(nu * t) * e; });
  auto v = duhamel_solve(LieAlgebraField(g), LieAlgebraField(g), F);
  double err = 0.0;
  for (int m = 0; m <= M; ++m) {
    double t = g.time(m);
    double A = (std::cos(nu * t) - std::cos(w * t)) / (w * w - nu * nu);
    err = std::max(err, max_abs(v.values[m][0] - A * e));
  }
  return err;
}

}  // namespace

TEST_CASE("free plane wave and zero mode") {
  Grid g = grid_of(2, 16);
  auto f0 = cos_mode(g, {1, 0}, {1, 0, 0});
  for (double t : {0.0, 0.13, 0.5, 1.7}) {
    auto [v, w] = free_wave(f0, LieAlgebraField(g), t);
    CHECK(max_abs(v - std::cos(2 * kPi * t) * f0) <= 1e-12);
    CHECK(max_abs(w + (2 * kPi * std::sin(2 * kPi * t)) * f0) <= 1e-12);
  }
  auto c = LieAlgebraField::constant(g, {0.5, -1.0, 2.0});
  auto [v, w] = free_wave(LieAlgebraField(g), c, 0.75);
  CHECK(max_abs(v - 0.75 * c) <= 1e-14);
  CHECK(max_abs(w - c) <= 1e-14);
}

TEST_CASE("free energy is conserved over 256 steps") {
  Grid g = grid_of(3, 16, 256, 2.0);
  std::mt19937_64 rng(1);
  auto f = random_field(g, rng, 6.0, 1.0);
  auto h = random_field(g, rng, 6.0, 4.0);
  auto v = free_solve({f}, {h}, g);
  double e0 = free_energy(v.values[0], v.derivs[0]);
  double drift = 0.0;
  for (int m = 0; m <= g.M; ++m) drift = std::max(drift, std::abs(free_energy(v.values[m], v.derivs[m]) - e0) / e0);
  CHECK(drift <= 1e-12);
}

TEST_CASE("Duhamel solve with zero forcing is the free wave") {
  Grid g = grid_of(3, 8, 16, 0.7);
  std::mt19937_64 rng(2);
  auto f = random_field(g, rng, 3.0, 1.0);
  auto h = random_field(g, rng, 3.0, 1.0);
  auto v = duhamel_solve(f, h, SpaceTimeField::zeros(g, 1, false));
  REQUIRE(v.has_derivs());
  for (int m = 0; m <= g.M; ++m) {
    auto [x, y] = free_wave(f, h, g.time(m));
    CHECK(max_abs(v.values[m][0] - x) <= 1e-12);
    CHECK(max_abs(v.derivs[m][0] - y) <= 1e-12);
  }
  CHECK(series_diff(v, free_solve({f}, {h}, g), false) <= 1e-12);
}

TEST_CASE("constant forcing gives c t^2 / 2") {
  Grid g = grid_of(2, 8, 10, 1.0);
  auto c = LieAlgebraField::constant(g, {1.5, 0, 0});
  auto v = duhamel_solve(LieAlgebraField(g), LieAlgebraField(g), forcing_of(g, [&](double) { return c; }));
  for (int m = 0; m <= g.M; ++m) {
    double t = g.time(m);
    CHECK(max_abs(v.values[m][0] - (0.5 * t * t) * c) <= 1e-13);
    CHECK(max_abs(v.derivs[m][0] - t * c) <= 1e-13);
  }
}

TEST_CASE("Duhamel quadrature is second order against a forced mode") {
  double e1 = forced_mode_error(16), e2 = forced_mode_error(32), e3 = forced_mode_error(64);
  double r1 = std::log2(e1 / e2), r2 = std::log2(e2 / e3);
  MESSAGE("forced-mode errors " << e1 << " " << e2 << " " << e3 << ", rates " << r1 << " " << r2);
  CHECK(r1 >= 1.9);
  CHECK(r2 >= 1.9);
}

TEST_CASE("Duhamel solve is linear in data and forcing") {
  Grid g = grid_of(2, 16, 12, 0.5);
  std::mt19937_64 rng(3);
  auto f1 = random_field(g, rng, 5.0, 1.0), f2 = random_field(g, rng, 5.0, 1.0);
  auto h1 = random_field(g, rng, 5.0, 1.0), h2 = random_field(g, rng, 5.0, 1.0);
  auto s1 = random_field(g, rng, 5.0, 1.0), s2 = random_field(g, rng, 5.0, 1.0);
  auto F1 = forcing_of(g, [&](double t) { return std::sin(7.0 * t) * s1; });
  auto F2 = forcing_of(g, [&](double t) { return (t * t) * s2; });
  auto F12 = forcing_of(g, [&](double t) { return 2.0 * std::sin(7.0 * t) * s1 - 3.0 * (t * t) * s2; });
  auto v1 = duhamel_solve(f1, h1, F1), v2 = duhamel_solve(f2, h2, F2);
  auto v = duhamel_solve(2.0 * f1 - 3.0 * f2, 2.0 * h1 - 3.0 * h2, F12);
  double worst = 0.0;
  for (int m = 0; m <= g.M; ++m) {
    worst = std::max(worst, max_abs(v.values[m][0] - (2.0 * v1.values[m][0] - 3.0 * v2.values[m][0])));
    worst = std::max(worst, max_abs(v.derivs[m][0] - (2.0 * v1.derivs[m][0] - 3.0 * v2.derivs[m][0])));
  }
  CHECK(worst <= 1e-11);
}

TEST_CASE("wave residual shrinks with the time step") {
  auto residual = [](int M) {
    Grid g = grid_of(2, 8, M, 1.0);
    auto e = cos_mode(g, {1, 1}, {0, 1, 0});
    auto F = forcing_of(g, [&](double t) { return std::cos(3.0 * t) * e; });
    auto v = duhamel_solve(e, LieAlgebraField(g), F);
    return wave_residual(v, F);
  };
  double a = residual(16), b = residual(32);
  CHECK(std::isfinite(a));
  CHECK(b < a / 3.0);
}

TEST_CASE("Hodge initial data layout") {
  Grid g = grid_of(3, 8);
  OneForm zero(g);
  auto d0 = hodge_initial_data(zero);
  CHECK(max_abs(d0.phi0) == 0.0);
  CHECK(max_abs(d0.phi1) == 0.0);
  for (const auto& f : d0.psi0.e) CHECK(max_abs(f) == 0.0);
  for (const auto& f : d0.psi1.e) CHECK(max_abs(f) == 0.0);

  auto x1 = LieAlgebraField::constant(g, {1, 0, 0});
  auto x2 = LieAlgebraField::constant(g, {0, 1, 0});
  OneForm t(g);
  t[0] = x1;
  auto dt = hodge_initial_data(t);
  CHECK(max_abs(dt.phi1 - x1) == 0.0);
  for (const auto& f : dt.psi1.e) CHECK(max_abs(f) == 0.0);

  OneForm s(g);
  s[1] = x2;
  auto ds = hodge_initial_data(s);
  CHECK(max_abs(ds.phi1) == 0.0);
  CHECK(max_abs(ds.psi1.get(0, 1) - x2) == 0.0);
  for (int mu = 0; mu <= 3; ++mu)
    for (int nu = mu + 1; nu <= 3; ++nu)
      if (!(mu == 0 && nu == 1)) CHECK(max_abs(ds.psi1.get(mu, nu)) == 0.0);
  CHECK(potential_channels(3) == 7);
  CHECK(potential_channels(4) == 11);
}

TEST_CASE("assemble b from simple potentials") {
  Grid g = grid_of(2, 8, 4, 1.0);
  const int np = TwoForm::count(2);
  auto phi = SpaceTimeField::zeros(g, 1, true);
  auto psi = SpaceTimeField::zeros(g, np, true);
  auto b = assemble_b(phi, psi);
  CHECK(b.channels == 3);
  for (const auto& s : b.values)
    for (const auto& f : s) CHECK(max_abs(f) == 0.0);

  auto x1 = LieAlgebraField::constant(g, {1, 0, 0});
  for (int m = 0; m <= g.M; ++m) {
    phi.values[m][0] = g.time(m) * x1;
    phi.derivs[m][0] = x1;
  }
  b = assemble_b(phi, psi);
  for (int m = 0; m <= g.M; ++m) {
    CHECK(max_abs(b.values[m][0] - x1) <= 1e-15);
    CHECK(max_abs(b.values[m][1]) <= 1e-15);
    CHECK(max_abs(b.values[m][2]) <= 1e-15);
  }
  auto bare = SpaceTimeField::zeros(g, 1, false);
  CHECK_THROWS_AS(assemble_b(bare, psi), ContractError);
}

TEST_CASE("b assembled from free potentials is the free wave of b") {
  // a = 0: phi and Psi evolve freely from the Hodge data, so b is a free wave
  // with b(0) = b0 and d_t b(0) = (sum_j d_j b_j, d_j b_0).
  const int n = 3;
  Grid g = grid_of(n, 8, 8, 0.6);
  std::mt19937_64 rng(4);
  OneForm b0(g);
  for (auto& f : b0.e) f = random_field(g, rng, 3.0, 1.0);
  auto data = hodge_initial_data(b0);
  auto phi = free_solve({data.phi0}, {data.phi1}, g);
  auto psi = free_solve(data.psi0.e, data.psi1.e, g);
  auto b = assemble_b(phi, psi);

  std::vector<LieAlgebraField> rate(n + 1, LieAlgebraField(g));
  for (int j = 1; j <= n; ++j) {
    rate[0] = rate[0] + differentiate(b0[j], j);
    rate[j] = differentiate(b0[0], j);
  }
  auto expect = free_solve(b0.e, rate, g);
  CHECK(series_diff(b, expect, false) <= 1e-11);
}

TEST_CASE("bilinear forms") {
  Grid g = grid_of(3, 8);
  const int n = 3;
  auto x1 = LieAlgebraField::constant(g, {1, 0, 0});
  auto x2 = LieAlgebraField::constant(g, {0, 1, 0});
  auto x3 = LieAlgebraField::constant(g, {0, 0, 1});
  auto phi_spec = BilinearSpec::make("mwm_phi", n);
  auto psi_spec = BilinearSpec::make("mwm_psi", n);
  auto all_spec = BilinearSpec::make("mwm", n);
  CHECK(all_spec.channels == potential_channels(n));

  OneForm zero(g), a(g), b(g);
  std::mt19937_64 rng(5);
  for (int mu = 0; mu <= n; ++mu) {
    a[mu] = random_field(g, rng, 2.0, 1.0);
    b[mu] = random_field(g, rng, 2.0, 1.0);
  }
  for (const auto& f : bilinear_B(all_spec, zero, b)) CHECK(max_abs(f) == 0.0);

  OneForm pa(g), pb(g);
  for (int mu = 0; mu <= n; ++mu) {
    pa[mu] = (0.5 + mu) * x1;
    pb[mu] = (2.0 - mu) * x1;
  }
  for (const auto& f : bilinear_B(all_spec, pa, pb)) CHECK(max_abs(f) == 0.0);

  OneForm ca(g), cb(g);
  ca[0] = x1;
  cb[0] = x2;
  auto phi = bilinear_B(phi_spec, ca, cb);
  REQUIRE(phi.size() == 1u);
  CHECK(max_abs(phi[0] - x3) == 0.0);
  for (const auto& f : bilinear_B(psi_spec, ca, cb)) CHECK(max_abs(f) == 0.0);

  // Lorentz contraction and wedge table against direct brackets
  auto ph = bilinear_B(phi_spec, a, b)[0];
  auto direct = bracket(a[0], b[0]);
  for (int j = 1; j <= n; ++j) direct = direct - bracket(a[j], b[j]);
  CHECK(max_abs(ph - direct) <= 1e-14);
  auto ps = bilinear_B(psi_spec, a, b);
  for (int mu = 0; mu <= n; ++mu)
    for (int nu = mu + 1; nu <= n; ++nu)
      CHECK(max_abs(ps[TwoForm::slot(n, mu, nu)] - (bracket(a[mu], b[nu]) - bracket(a[nu], b[mu]))) <= 1e-14);

  // bilinearity in each argument
  OneForm a2(g);
  for (int mu = 0; mu <= n; ++mu) a2[mu] = random_field(g, rng, 2.0, 1.0);
  auto lhs = bilinear_B(all_spec, 2.0 * a + (-0.5) * a2, b);
  auto r1 = bilinear_B(all_spec, a, b), r2 = bilinear_B(all_spec, a2, b);
  for (std::size_t c = 0; c < lhs.size(); ++c) CHECK(max_abs(lhs[c] - (2.0 * r1[c] - 0.5 * r2[c])) <= 1e-12);
  auto rhs = bilinear_B(all_spec, a, 3.0 * b);
  for (std::size_t c = 0; c < rhs.size(); ++c) CHECK(max_abs(rhs[c] - 3.0 * r1[c]) <= 1e-12);

  auto generic = BilinearSpec::generic(1, {{0, 1, 2, 2.0, Product::scalar}});
  auto gen = bilinear_B(generic, a, b);
  CHECK(max_abs(gen[0] - 2.0 * scalar_product(a[1], b[2])) <= 1e-15);
  CHECK_THROWS_AS(BilinearSpec::make("maxwell", n), ConfigError);
}

TEST_CASE("Strichartz constant is stable across shells and refinement") {
  // single-shell data and forcing at frequency 2^k, pair family of the grid
  auto constant = [](int N, int k) {
    const int n = 3;
    Grid g = grid_of(n, N, 32, 1.0);
    std::vector<int> xi{1 << k, 0, 0}, eta{0, 1 << k, 0};
    auto f = cos_mode(g, xi, {1, 0, 0});
    auto h = std::ldexp(2.0 * kPi, k) * cos_mode(g, eta, {0, 1, 0});
    auto s = cos_mode(g, xi, {0, 0, 1});
    const double nu = std::ldexp(3.0, k);
    auto F = forcing_of(g, [&](double t) { return std::ldexp(1.0, 2 * k) * std::cos(nu * t) * s; });
    auto v = duhamel_solve(f, h, F);
    auto fam = norms::enumerate_pairs(n, norms::PairVariant::admissible);
    double lhs = norms::strichartz_block_norm(v, k, 1, fam);
    double rhs = norms::sobolev_norm(f, n / 2.0 - 1.0) + norms::sobolev_norm(h, n / 2.0 - 2.0) +
                 std::pow(2.0, k * (n / 2.0 - 2.0)) * norms::mixed_norm(F, 1.0, 2.0);
    return lhs / rhs;
  };
  std::vector<double> cs{constant(16, 1), constant(16, 2), constant(32, 1), constant(32, 2), constant(32, 3)};
  double lo = *std::min_element(cs.begin(), cs.end()), hi = *std::max_element(cs.begin(), cs.end());
  MESSAGE("Strichartz constants: " << cs[0] << " " << cs[1] << " " << cs[2] << " " << cs[3] << " " << cs[4]);
  CHECK(lo > 0.0);
  CHECK(hi / lo <= 2.0);
}
