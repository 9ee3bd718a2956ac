#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "test_support.hpp"
#include "wavemap/errors.hpp"
#include "wavemap/lp.hpp"
#include "wavemap/norms.hpp"
#include "wavemap/wave.hpp"

using namespace wavemap;
using namespace wavemap::norms;
using namespace testsupport;

namespace {

// Time-independent series holding f on every slice, with zero derivative.
SpaceTimeField steady(const LieAlgebraField& f, const Grid& g) {
  auto F = SpaceTimeField::zeros(g, 1, true);
  for (auto& s : F.values) s[0] = f;
  return F;
}

// cos(2 pi xi.x) X1 scaled to unit L2 norm.
LieAlgebraField unit_mode(const Grid& g, const std::vector<int>& xi) {
  auto f = two_mode(g, xi, {1, 0, 0}, std::vector<int>(g.n, 0), {0, 0, 0});
  return (1.0 / l2_norm(f)) * f;
}

SpaceTimeField random_wave(const Grid& g, std::mt19937_64& rng, double radius) {
  auto f = random_field(g, rng, radius, 1.0);
  auto h = random_field(g, rng, radius, 3.0);
  return wave::free_solve({f}, {h}, g);
}

SpaceTimeField combine(double a, const SpaceTimeField& F, double b, const SpaceTimeField& G) {
  auto out = F;
  for (int m = 0; m < F.slices(); ++m) {
    out.values[m][0] = a * F.values[m][0] + b * G.values[m][0];
    out.derivs[m][0] = a * F.derivs[m][0] + b * G.derivs[m][0];
  }
  return out;
}

double l2_besov(const SpaceTimeField& F) { return besov_norm(F, F.grid.n / 2.0 - 0.5, 2.0, 2.0); }

}  // namespace

TEST_CASE("sharp pairs and certified families") {
  auto has = [](const std::vector<AdmissiblePair>& ps, AdmissiblePair p) {
    return std::find(ps.begin(), ps.end(), p) != ps.end();
  };
  CHECK(is_sharp_admissible(4, {2.0, 6.0}));
  CHECK(has(sharp_pairs(4), {2.0, 6.0}));
  CHECK(is_sharp_admissible(5, {2.0, 4.0}));
  CHECK(has(sharp_pairs(5), {2.0, 4.0}));
  for (int n = 2; n <= 5; ++n) {
    CHECK(is_sharp_admissible(n, {kInf, 2.0}));
    for (auto v : {PairVariant::admissible, PairVariant::admissible_subcritical, PairVariant::half_admissible,
                   PairVariant::half_admissible_time, PairVariant::holder_product, PairVariant::good_product,
                   PairVariant::good_product_time}) {
      auto fam = enumerate_pairs(n, v);
      for (const auto& p : fam.pairs) CHECK(contains(n, v, p));
    }
  }
  CHECK(!is_admissible(4, {2.0, 4.0}));
  // the families used by the proofs carry (2, inf) and (2, 2)
  CHECK(has(enumerate_pairs(4, PairVariant::admissible).pairs, {2.0, kInf}));
  CHECK(has(enumerate_pairs(4, PairVariant::good_product).pairs, {2.0, 2.0}));
  CHECK(has(enumerate_pairs(4, PairVariant::good_product_time).pairs, {2.0, 2.0}));
  CHECK_THROWS_AS(enumerate_pairs(1, PairVariant::admissible), DomainError);
}

TEST_CASE("mixed norms of simple fields") {
  Grid g = grid_of(2, 16, 8, 1.0);
  auto c = steady(LieAlgebraField::constant(g, {0.6, 0.0, 0.8}), g);
  for (double q : {1.0, 2.0, 4.0, kInf})
    for (double r : {1.0, 2.0, 6.0, kInf}) CHECK(mixed_norm(c, q, r) == doctest::Approx(1.0).epsilon(1e-13));
  auto cosine = steady(two_mode(g, {1, 0}, {1, 0, 0}, {0, 0}, {0, 0, 0}), g);
  CHECK(mixed_norm(cosine, kInf, 2.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(mixed_norm(cosine, 2.0, 2.0, true) == 0.0);
  CHECK_THROWS_AS(mixed_norm(c, 0.5, 2.0), DomainError);
  CHECK(time_norm({1.0, 1.0, 1.0}, 2.0, 0.5) == doctest::Approx(1.0));
  CHECK(time_norm({0.0, 1.0, 0.0}, 1.0, 0.5) == doctest::Approx(0.5));
  CHECK(time_norm({0.0, 3.0, 1.0}, kInf, 0.5) == 3.0);
}

TEST_CASE("mixed norm triangle inequality and homogeneity") {
  Grid g = grid_of(3, 8, 4, 0.5);
  std::mt19937_64 rng(1);
  for (int s = 0; s < 5; ++s) {
    auto F = random_wave(g, rng, 3.0);
    auto G = random_wave(g, rng, 3.0);
    for (auto [q, r] : {std::pair{2.0, 2.0}, std::pair{kInf, 2.0}, std::pair{4.0, 6.0}, std::pair{1.0, kInf}}) {
      CHECK(mixed_norm(combine(1, F, 1, G), q, r) <= mixed_norm(F, q, r) + mixed_norm(G, q, r) + 1e-10);
      CHECK(mixed_norm(combine(-2.5, F, 0, G), q, r) == doctest::Approx(2.5 * mixed_norm(F, q, r)).epsilon(1e-12));
    }
  }
}

TEST_CASE("Sobolev norms") {
  Grid g = grid_of(2, 32);
  auto f = unit_mode(g, {8, 0});
  CHECK(sobolev_norm(f, 1.5) == doctest::Approx(std::pow(2.0, 4.5)).epsilon(1e-12));
  CHECK(sobolev_norm(LieAlgebraField(g), 1.0) == 0.0);
  // sum_k psi_k^2 lies in [1/2, 1] for a partition of unity by two overlapping shells
  std::mt19937_64 rng(2);
  for (int s = 0; s < 10; ++s) {
    auto r = random_field(g, rng, 15.0, 1.0);
    auto mean_free = r - LieAlgebraField::constant(g, mean(r));
    double ratio = sobolev_norm(r, 0.0) / l2_norm(mean_free);
    CHECK(ratio <= 1.0 + 1e-12);
    CHECK(ratio >= std::sqrt(0.5) - 1e-12);
  }
}

TEST_CASE("homogeneous H^0 norm agrees with L2 within 3% on random band-limited fields") {
  Grid g = grid_of(2, 32);
  std::mt19937_64 rng(2);
  for (int s = 0; s < 10; ++s) {
    auto r = random_field(g, rng, 15.0, 1.0);
    auto mean_free = r - LieAlgebraField::constant(g, mean(r));
    CHECK(std::abs(sobolev_norm(r, 0.0) / l2_norm(mean_free) - 1.0) <= 0.03);
  }
}

TEST_CASE("Strichartz block norm weights") {
  Grid g = grid_of(4, 8, 2, 1.0);
  auto F = steady(unit_mode(g, {1, 0, 0, 0}), g);
  AdmissiblePairFamily energy{4, PairVariant::admissible, {{kInf, 2.0}}};
  CHECK(strichartz_block_norm(F, 3, 1, energy) == doctest::Approx(8.0).epsilon(1e-12));

  // sup over the three pairs equals the largest hand-weighted value
  std::mt19937_64 rng(3);
  auto W = random_wave(g, rng, 3.0);
  const int k = 2;
  std::vector<AdmissiblePair> pairs{{kInf, 2.0}, {2.0, 6.0}, {2.0, kInf}};
  double expect = 0.0;
  for (const auto& p : pairs) {
    double w = std::pow(2.0, k * ((std::isinf(p.q) ? 0.0 : 1.0 / p.q) + (std::isinf(p.r) ? 0.0 : 4.0 / p.r) - 1.0));
    expect = std::max(expect, w * (mixed_norm(W, p.q, p.r) + 0.25 * mixed_norm(W, p.q, p.r, true)));
  }
  AdmissiblePairFamily three{4, PairVariant::admissible, pairs};
  CHECK(strichartz_block_norm(W, k, 1, three) == doctest::Approx(expect).epsilon(1e-12));

  AdmissiblePairFamily empty{4, PairVariant::admissible, {}};
  CHECK_THROWS_AS(strichartz_block_norm(W, k, 1, empty), ConfigError);
  auto bare = SpaceTimeField::zeros(g, 1, false);
  CHECK_THROWS_AS(strichartz_block_norm(bare, k, 1, three), ContractError);
  CHECK_THROWS_AS(s_norm(bare, 1), ContractError);
}

TEST_CASE("global norms vanish on zero input") {
  Grid g = grid_of(3, 8, 4, 0.5);
  auto Z = SpaceTimeField::zeros(g, 2, true);
  CHECK(s_norm(Z, 0) == 0.0);
  CHECK(s_norm(Z, 1) == 0.0);
  CHECK(s_plus_norm(Z) == 0.0);
  CHECK(bp_norm(Z, 1.0) == 0.0);
  CHECK(bp_norm(Z, kInf) == 0.0);
}

TEST_CASE("single-shell input: global norm equals its block norm") {
  Grid g = grid_of(3, 16, 6, 0.5);
  auto f = unit_mode(g, {0, 4, 0});
  auto h = 2.0 * unit_mode(g, {0, 4, 0});
  auto F = wave::free_solve({f}, {h}, g);
  auto fam = enumerate_pairs(3, PairVariant::admissible);
  for (int j : {0, 1}) CHECK(s_norm(F, j) == doctest::Approx(strichartz_block_norm(F, 2, j, fam)).epsilon(1e-10));
  double b1 = bp_norm(F, 1.0);
  CHECK(b1 > 0.0);
  CHECK(bp_norm(F, 2.0) == doctest::Approx(b1).epsilon(1e-12));
  CHECK(bp_norm(F, kInf) == doctest::Approx(b1).epsilon(1e-12));
}

TEST_CASE("B_p decreases in p on multi-shell input") {
  Grid g = grid_of(3, 16, 4, 0.5);
  std::mt19937_64 rng(4);
  for (int s = 0; s < 5; ++s) {
    auto F = random_wave(g, rng, 7.0);
    double prev = INFINITY;
    for (double p : {1.0, 1.5, 2.0, 4.0, kInf}) {
      double v = bp_norm(F, p);
      CHECK(v <= prev * (1.0 + 1e-12));
      prev = v;
    }
  }
}

TEST_CASE("global norms are homogeneous and subadditive") {
  Grid g = grid_of(3, 8, 4, 0.5);
  std::mt19937_64 rng(5);
  for (int s = 0; s < 4; ++s) {
    auto F = random_wave(g, rng, 3.0);
    auto G = random_wave(g, rng, 3.0);
    auto sum = combine(1, F, 1, G);
    auto scaled = combine(-3.0, F, 0, G);
    CHECK(s_norm(sum, 1) <= s_norm(F, 1) + s_norm(G, 1) + 1e-10);
    CHECK(s_norm(scaled, 1) == doctest::Approx(3.0 * s_norm(F, 1)).epsilon(1e-10));
    CHECK(s_plus_norm(sum) <= s_plus_norm(F) + s_plus_norm(G) + 1e-10);
    CHECK(s_plus_norm(scaled) == doctest::Approx(3.0 * s_plus_norm(F)).epsilon(1e-10));
    CHECK(bp_norm(sum, 2.0) <= bp_norm(F, 2.0) + bp_norm(G, 2.0) + 1e-10);
    CHECK(bp_norm(scaled, 2.0) == doctest::Approx(3.0 * bp_norm(F, 2.0)).epsilon(1e-10));
    CHECK(l2_besov(sum) <= l2_besov(F) + l2_besov(G) + 1e-10);
    CHECK(l2_besov(scaled) == doctest::Approx(3.0 * l2_besov(F)).epsilon(1e-10));
  }
}

TEST_CASE("block weights for j = 0 and j = 1 differ by 2^-k") {
  Grid g = grid_of(3, 16, 4, 0.5);
  std::mt19937_64 rng(6);
  auto F = random_wave(g, rng, 7.0);
  auto fam = enumerate_pairs(3, PairVariant::admissible);
  auto acc = accumulate(F, exponents_for({fam}));
  auto r0 = s_norm_report(acc, 0, fam), r1 = s_norm_report(acc, 1, fam);
  REQUIRE(r0.blocks.size() == r1.blocks.size());
  for (std::size_t b = 0; b < r0.blocks.size(); ++b) {
    CHECK(r1.blocks[b].value == doctest::Approx(std::ldexp(r0.blocks[b].value, -r0.blocks[b].k)).epsilon(1e-13));
    CHECK(r1.blocks[b].pair == r0.blocks[b].pair);
  }
  double total = 0.0;
  for (const auto& b : r1.blocks) total += b.value * b.value;
  CHECK(r1.value == doctest::Approx(std::sqrt(total)).epsilon(1e-14));
}

TEST_CASE("block norm is invariant under the dyadic shift") {
  // frequency x2, amplitude x2, time span /2; spatial norms per period
  auto block = [](int shift) {
    Grid g = grid_of(3, 32, 8, 0.5 / (1 << shift));
    const int k = 1 + shift;
    std::vector<int> xi{1 << k, 0, 0};
    std::vector<int> eta{0, 1 << (k - 1), 1 << (k - 1)};
    double amp = std::ldexp(1.0, shift);
    auto f = amp * two_mode(g, xi, {1, 0, 0}, eta, {0, 0.5, 0});
    auto h = (amp * std::ldexp(1.0, shift)) * two_mode(g, eta, {0, 0, 2.0}, xi, {0, 0, 0});
    auto F = wave::free_solve({f}, {h}, g);
    auto fam = enumerate_pairs(3, PairVariant::admissible);
    auto acc = accumulate(F, exponents_for({fam}));
    acc.scale_measure(std::pow(2.0, -3 * shift));
    auto rep = s_norm_report(acc, 1, fam);
    return rep.value;
  };
  double v0 = block(0), v1 = block(1);
  CHECK(v0 > 0.0);
  CHECK(std::abs(v1 - v0) / v0 <= 0.05);
}

TEST_CASE("S+ dominates the embedded norms on a random ensemble") {
  Grid g = grid_of(4, 8, 4, 0.5);
  std::mt19937_64 rng(7);
  double c_s = 0.0, c_b = 0.0, c_l = 0.0;
  for (int s = 0; s < 100; ++s) {
    auto F = random_wave(g, rng, 3.0);
    double plus = s_plus_norm(F);
    REQUIRE(plus > 0.0);
    c_s = std::max(c_s, s_norm(F, 1) / plus);
    c_b = std::max(c_b, bp_norm(F, 1.0) / plus);
    c_l = std::max(c_l, l2_besov(F) / plus);
  }
  MESSAGE("embedding constants: S(-1) " << c_s << ", B_1 " << c_b << ", L2 B^{n/2-1/2} " << c_l);
  CHECK(std::isfinite(c_s));
  CHECK(std::isfinite(c_b));
  CHECK(std::isfinite(c_l));
}

TEST_CASE("norm report serialization") {
  Grid g = grid_of(3, 8, 2, 0.5);
  std::mt19937_64 rng(8);
  auto F = random_wave(g, rng, 3.0);
  auto fam = enumerate_pairs(3, PairVariant::admissible);
  auto rep = s_norm_report(accumulate(F, exponents_for({fam})), 1, fam);
  auto csv = to_csv(rep);
  CHECK(csv.rfind("norm,k,pair_q,pair_r,block_value,total\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + static_cast<long>(rep.blocks.size()));
  auto j = nlohmann::json::parse(to_json(rep));
  CHECK(j["value"].get<double>() == rep.value);
  CHECK(j["families"][0] == "admissible");
  CHECK(j["blocks"].size() == rep.blocks.size());
}
