#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "test_support.hpp"
#include "wavemap/errors.hpp"
#include "wavemap/mwm.hpp"

using namespace wavemap;
using namespace wavemap::mwm;
using namespace testsupport;

namespace {

Grid small_grid() { return grid_of(4, 8, 8, 1.0); }

PotentialData abelian_data(const Grid& g, std::uint64_t seed, double amp) {
  std::mt19937_64 rng(seed);
  OneForm b(g);
  for (auto& f : b.e) {
    auto s = random_field(g, rng, 2.0, amp);
    f = LieAlgebraField::from_physical(g, {s.component(0), RealArray(g.points(), 0.0), RealArray(g.points(), 0.0)});
  }
  return data_from_b0(b);
}

PotentialData zero_data(const Grid& g) {
  int C = wave::potential_channels(g.n);
  return {std::vector<LieAlgebraField>(C, LieAlgebraField(g)), std::vector<LieAlgebraField>(C, LieAlgebraField(g))};
}

}  // namespace

TEST_CASE("picard_solve: zero data converge in one iteration") {
  Grid g = small_grid();
  auto r = picard_solve(g, zero_data(g));
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  for (int m = 0; m < r.v.slices(); ++m)
    for (const auto& f : r.v.values[m]) CHECK(max_abs(f) == 0.0);
}

TEST_CASE("picard_solve: abelian data give the free wave in two iterations") {
  Grid g = small_grid();
  auto d = abelian_data(g, 3, 1e-2);
  auto r = picard_solve(g, d);
  CHECK(r.converged);
  CHECK(r.iterations == 2);
  for (int m = 0; m <= g.M; m += 4)
    for (int c = 0; c < r.v.channels; ++c) {
      auto [v, dv] = wave::free_wave(d.f[c], d.g[c], g.time(m));
      CHECK(max_abs(r.v.values[m][c] - v) <= 1e-15);
      CHECK(max_abs(r.v.derivs[m][c] - dv) <= 1e-15);
    }
}

TEST_CASE("picard_solve: small generic data contract with ratio at most one half") {
  Grid g = small_grid();
  auto r = picard_solve(g, random_potential_data(g, 7, 1e-2));
  CHECK(r.converged);
  CHECK(r.within_gate);
  REQUIRE(r.trace.records.size() >= 2);
  for (std::size_t i = 1; i < r.trace.records.size(); ++i) CHECK(r.trace.records[i].ratio <= 0.5);
  CHECK(static_cast<int>(r.trace.records.size()) <= PicardOptions{}.max_iter);
}

TEST_CASE("picard_solve: forcing estimate constant is finite and stable across iterations") {
  Grid g = small_grid();
  PicardOptions o;
  o.tol = 1e-13;
  auto r = picard_solve(g, random_potential_data(g, 11, 1e-2), o);
  double lo = 1e300, hi = 0.0;
  for (const auto& rec : r.trace.records) {
    CHECK(std::isfinite(rec.forcing_constant));
    CHECK(rec.forcing_constant > 0.0);
    CHECK(rec.forcing_constant < 1e3);
    lo = std::min(lo, rec.forcing_constant);
    hi = std::max(hi, rec.forcing_constant);
  }
  CHECK(hi / lo <= 2.0);
}

TEST_CASE("picard_solve is deterministic") {
  Grid g = small_grid();
  auto d = random_potential_data(g, 13, 1e-2);
  auto a = picard_solve(g, d), b = picard_solve(g, d);
  CHECK(trace_csv(a.trace) == trace_csv(b.trace));
}

TEST_CASE("picard_solve: configuration and budget errors") {
  Grid g = small_grid();
  auto d = random_potential_data(g, 17, 1e-2);
  PicardOptions o;
  o.preset = "mwm_phi";
  CHECK_THROWS_AS(picard_solve(g, d, o), ConfigError);
  o.preset = "nonsense";
  CHECK_THROWS_AS(picard_solve(g, d, o), ConfigError);
  PicardOptions one;
  one.max_iter = 2;
  one.tol = 1e-30;
  CHECK_THROWS_AS(picard_solve(g, d, one), NonConvergenceError);
  auto bad = d;
  bad.f.pop_back();
  CHECK_THROWS_AS(picard_solve(g, bad), ShapeError);
}

TEST_CASE("picard_solve: connection gate failures propagate") {
  Grid g = small_grid();
  CHECK_THROWS_AS(picard_solve(g, random_potential_data(g, 19, 5.0)), PreconditionError);
}

TEST_CASE("stability: identical data give zero energy") {
  Grid g = small_grid();
  auto d = random_potential_data(g, 23, 1e-2);
  auto rep = stability_experiment(g, d, d);
  CHECK(rep.max_energy <= 1e-12);
  CHECK(rep.energy.size() == static_cast<std::size_t>(g.M + 1));
  CHECK(rep.a1_l1_linf > 0.0);
  CHECK(rep.b1_l2_l2n > 0.0);
}

TEST_CASE("stability: linear response to scaled data") {
  Grid g = small_grid();
  auto d = random_potential_data(g, 29, 1e-2);
  std::vector<double> c;
  for (double delta : {1e-3, 1e-4, 1e-5}) {
    auto rep = stability_experiment(g, d, scaled(d, 1.0 + delta));
    c.push_back(rep.max_energy / delta);
  }
  double lo = *std::min_element(c.begin(), c.end()), hi = *std::max_element(c.begin(), c.end());
  CHECK(lo > 0.0);
  CHECK(hi / lo <= 2.0);
}

TEST_CASE("stability: abelian pair conserves the difference energy") {
  Grid g = small_grid();
  auto rep = stability_experiment(g, abelian_data(g, 31, 1e-2), abelian_data(g, 37, 1e-2));
  for (double e : rep.energy) CHECK(std::abs(e - rep.energy.front()) <= 1e-10 * rep.energy.front());
}

TEST_CASE("regularity: zero, free and generic data") {
  Grid g = small_grid();
  CHECK(regularity_track(g, zero_data(g)).ratio == 0.0);
  CHECK(regularity_track(g, abelian_data(g, 41, 1e-2)).ratio <= 1.0 + 1e-6);
  double lo = 1e300, hi = 0.0;
  for (int s = 0; s < 10; ++s) {
    double r = regularity_track(g, random_potential_data(g, 100 + s, 1e-2)).ratio;
    CHECK(std::isfinite(r));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(hi / lo <= 3.0);
}

TEST_CASE("spectral Sobolev norm matches the free-wave energy identity") {
  Grid g = grid_of(3, 8);
  std::mt19937_64 rng(43);
  std::vector<LieAlgebraField> v{random_field(g, rng, 3.0, 1.0)};
  std::vector<LieAlgebraField> zero{LieAlgebraField(g)};
  // int |grad v|^2 = ||v||^2_{H^1}
  double e = wave::free_energy(v, zero);
  CHECK(std::abs(spectral_sobolev_norm(v, 1.0) - std::sqrt(e)) <= 1e-12 * std::sqrt(e));
  CHECK(std::abs(spectral_sobolev_norm(v, 0.0) - l2_norm(v[0])) <= 1e-12 * l2_norm(v[0]));
}
