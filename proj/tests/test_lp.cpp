#include <doctest.h>

#include <cmath>
#include <numbers>

#include "test_support.hpp"
#include "wavemap/lp.hpp"
#include "wavemap/wave.hpp"

using namespace wavemap;
using namespace testsupport;

namespace {

// cos(2 pi xi.x) X1
LieAlgebraField mode(const Grid& g, std::vector<int> xi) {
  return two_mode(g, xi, {1, 0, 0}, std::vector<int>(g.n, 0), {0, 0, 0});
}

LieAlgebraField reconstruct(const LieAlgebraField& f) {
  auto ladder = lp::DyadicLadder::for_grid(f.grid());
  auto sum = lp::lumped_low(f);
  for (int k = ladder.k_min + 1; k <= ladder.k_max; ++k) sum = sum + lp::project_shell(f, k);
  return sum;
}

}  // namespace

TEST_CASE("profile support and values") {
  CHECK(lp::low_pass(0.0) == 1.0);
  CHECK(lp::low_pass(1.0) == 1.0);
  CHECK(lp::low_pass(2.0) == 0.0);
  CHECK(lp::low_pass(3.0) == 0.0);
  double prev = 1.0;
  for (double r = 0.0; r <= 2.5; r += 0.01) {
    double m = lp::low_pass(r);
    CHECK(m <= prev + 1e-15);
    CHECK(m >= 0.0);
    prev = m;
  }
  CHECK(lp::shell_profile(1.0) == 1.0);
  CHECK(lp::shell_profile(0.5) == 0.0);
  CHECK(lp::shell_profile(2.0) == 0.0);
  CHECK(lp::shell_profile(0.4) == 0.0);
  CHECK(lp::shell_profile(2.1) == 0.0);
}

TEST_CASE("shell profiles sum to one on a log grid") {
  double worst = 0.0;
  for (double e = -6.0; e <= 6.0; e += 0.013) {
    double r = std::pow(2.0, e), s = 0.0;
    for (int k = -12; k <= 12; ++k) s += lp::shell_profile(std::ldexp(r, -k));
    worst = std::max(worst, std::abs(s - 1.0));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("ladder partition of unity at every lattice frequency") {
  for (int N : {8, 16, 32}) {
    Grid g = grid_of(2, N);
    auto ladder = lp::DyadicLadder::for_grid(g);
    CHECK(ladder.k_min == 0);
    CHECK(ladder.k_max == static_cast<int>(std::log2(N / 2)));
    std::vector<double> total(g.spectral_points(), 0.0);
    for (int b = 0; b < ladder.blocks(); ++b) {
      const auto& t = lp::block_table(g, b);
      for (std::size_t i = 0; i < t.size(); ++i) total[i] += t[i];
    }
    auto eng = SpectralEngine::get(2, N);
    double worst = 0.0;
    for (std::size_t i = 0; i < total.size(); ++i) {
      // the ladder tops out at m(2^{-k_max} |xi|), which is 1 only up to |xi| = N/2
      if (eng->abs_xi(i) > N / 2) continue;
      worst = std::max(worst, std::abs(total[i] - 1.0));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("single modes under low and shell projections") {
  Grid g = grid_of(2, 32);
  auto f1 = mode(g, {1, 0});
  CHECK(max_abs(lp::project_low(f1, 3) - f1) <= 1e-14);
  auto f8 = mode(g, {8, 0});
  CHECK(max_abs(lp::project_low(f8, 1)) <= 1e-14);
  auto f4 = mode(g, {4, 0});
  CHECK(max_abs(lp::project_shell(f4, 2) - f4) <= 1e-14);
  CHECK(max_abs(lp::project_shell(f4, 1)) <= 1e-14);
  CHECK(max_abs(lp::project_shell(f4, 3)) <= 1e-14);
}

TEST_CASE("shell projection spectrum stays in its annulus") {
  Grid g = grid_of(3, 16);
  std::mt19937_64 rng(1);
  auto f = random_field(g, rng, 8.0, 1.0);
  for (int k = 1; k <= 3; ++k) {
    auto q = lp::project_shell(f, k);
    const auto& eng = q.engine();
    for (int c = 0; c < 3; ++c) {
      const auto& s = q.spectrum(c);
      for (std::size_t i = 0; i < s.size(); ++i) {
        double r = eng.abs_xi(i);
        if (r < std::ldexp(1.0, k - 1) || r > std::ldexp(1.0, k + 1)) CHECK(std::abs(s[i]) == 0.0);
      }
    }
  }
}

TEST_CASE("telescoping reconstruction on random fields") {
  std::mt19937_64 rng(2);
  for (int n : {2, 3, 4}) {
    Grid g = grid_of(n, n == 4 ? 16 : 32);
    for (int s = 0; s < 5; ++s) {
      auto f = random_field(g, rng, g.N / 2 - 1, 1.0);
      CHECK(max_abs(reconstruct(f) - f) <= 1e-11);
      CHECK(max_abs(lp::project_low(f, g.k_max() + 1) - f) <= 1e-12);
    }
  }
}

TEST_CASE("inverse gradient and inverse Laplacian") {
  Grid g = grid_of(2, 16);
  auto f4 = mode(g, {4, 0});
  CHECK(max_abs(lp::inverse_gradient(f4) - 0.25 * f4) <= 1e-14);
  auto c = LieAlgebraField::constant(g, {1, 2, 3});
  CHECK(max_abs(lp::inverse_gradient(c)) == 0.0);
  CHECK(max_abs(lp::inverse_laplacian(c)) == 0.0);

  std::mt19937_64 rng(3);
  auto f = random_field(g, rng, 6.0, 1.0) + c;
  auto m = mean(f);
  auto expect = f - LieAlgebraField::constant(g, m);
  CHECK(max_abs(lp::laplacian(lp::inverse_laplacian(f)) - expect) <= 1e-11);
  // |xi|^{-1} composed with itself is -Delta^{-1} up to the 2 pi / L scaling
  double s = 4.0 * std::numbers::pi * std::numbers::pi;
  CHECK(max_abs(lp::inverse_gradient(lp::inverse_gradient(f)) + s * lp::inverse_laplacian(f)) <= 1e-12);
}

TEST_CASE("Riesz transforms square to minus the mean-free identity") {
  Grid g = grid_of(3, 16);
  std::mt19937_64 rng(4);
  auto f = random_field(g, rng, 5.0, 1.0);
  LieAlgebraField sum(g);
  for (int a = 1; a <= 3; ++a) sum = sum + lp::riesz(lp::riesz(f, a), a);
  auto expect = f - LieAlgebraField::constant(g, mean(f));
  CHECK(max_abs(sum + expect) <= 1e-12);
}

TEST_CASE("projections commute with derivatives and the wave propagator") {
  Grid g = grid_of(3, 16);
  std::mt19937_64 rng(5);
  auto f = random_field(g, rng, 7.0, 1.0);
  auto h = random_field(g, rng, 7.0, 1.0);
  for (int k = 1; k <= 3; ++k) {
    for (int a = 1; a <= 3; ++a)
      CHECK(max_abs(lp::project_shell(differentiate(f, a), k) - differentiate(lp::project_shell(f, k), a)) <= 1e-12);
    auto [v, w] = wave::free_wave(f, h, 0.37);
    auto [vq, wq] = wave::free_wave(lp::project_shell(f, k), lp::project_shell(h, k), 0.37);
    CHECK(max_abs(lp::project_shell(v, k) - vq) <= 1e-12);
    CHECK(max_abs(lp::project_shell(w, k) - wq) <= 1e-12);
  }
}

TEST_CASE("projections do not increase the L2 norm") {
  Grid g = grid_of(2, 32);
  std::mt19937_64 rng(6);
  for (int s = 0; s < 10; ++s) {
    auto f = random_field(g, rng, 15.0, 1.0);
    for (int k = 0; k <= 4; ++k) {
      CHECK(l2_norm(lp::project_shell(f, k)) <= l2_norm(f) * (1.0 + 1e-14));
      CHECK(l2_norm(lp::project_low(f, k)) <= l2_norm(f) * (1.0 + 1e-14));
    }
  }
}

TEST_CASE("shell kernel L1 mass is independent of the shell away from the grid ends") {
  Grid g = grid_of(2, 1024);
  const int top = g.k_max();
  std::vector<double> mass;
  for (int k = 0; k <= top; ++k) mass.push_back(lp::shell_kernel_norm(g, k, 1.0));
  double lo = INFINITY, hi = 0.0;
  // interior: clear of the periodic images (k >= 3), and with the support
  // 2^{k+1} <= N/8 so the grid sum of |K| is resolved (k <= top - 3)
  for (int k = 3; k <= top - 3; ++k) {
    lo = std::min(lo, mass[k]);
    hi = std::max(hi, mass[k]);
  }
  CHECK(hi / lo - 1.0 <= 0.02);
  // Low shells see their own periodic images and the top shell loses the
  // frequencies past the Nyquist box; both reduce the mass.
  for (int k : {0, 1, 2, top}) CHECK(mass[k] < lo);
  for (double m : mass) CHECK(std::isfinite(m));

  // kernel samples sum to the multiplier at zero, which vanishes for a shell
  Grid h = grid_of(2, 64);
  auto ker = lp::shell_kernel(h, 2);
  double sum = 0.0;
  for (double x : ker) sum += x;
  CHECK(std::abs(sum * h.cell_volume()) <= 1e-12);
}
