#include "wavemap/lab.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "wavemap/errors.hpp"
#include "wavemap/lp.hpp"
#include "wavemap/norms.hpp"
#include "wavemap/wave.hpp"

namespace wavemap::lab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
using norms::AdmissiblePairFamily;
using norms::PairVariant;
using norms::ShellNormAccumulator;
using norms::kInf;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class Pass { product, forcing, insitu, strichartz };

Pass pass_of(const std::string& id) {
  if (id == "2.13") return Pass::forcing;
  if (id == "2.13i") return Pass::insitu;
  if (id == "2.4") return Pass::strichartz;
  for (const auto& known : estimate_ids())
    if (known == id) return Pass::product;
  throw ConfigError("lab: unknown estimate id '" + id + "'");
}

// Spectra (3 components) of one mode set on the grid.
struct Spectra {
  std::array<CplxArray, 3> value, rate;
};

Spectra spectra_of(const Grid& grid, const ModeSet& m) {
  auto v = place(grid, m, false), r = place(grid, m, true);
  return {{v.spectrum(0), v.spectrum(1), v.spectrum(2)}, {r.spectrum(0), r.spectrum(1), r.spectrum(2)}};
}

// Free evolution at time t: value and time derivative.
std::pair<LieAlgebraField, LieAlgebraField> evolve(const Grid& grid, const Spectra& s, double t) {
  std::array<CplxArray, 3> v, d;
  for (int i = 0; i < 3; ++i) wave::free_wave_spectrum(grid, s.value[i], s.rate[i], t, v[i], d[i]);
  return {LieAlgebraField::from_spectral(grid, std::move(v)), LieAlgebraField::from_spectral(grid, std::move(d))};
}

LieAlgebraField multiply(const LieAlgebraField& a, const LieAlgebraField& b, const std::string& kind) {
  return kind == "bracket" ? bracket(a, b) : scalar_product(a, b);
}

std::vector<LieAlgebraField> blocks_of(const LieAlgebraField& f) {
  const Grid& g = f.grid();
  std::vector<LieAlgebraField> out;
  for (int b = 0; b < lp::DyadicLadder::for_grid(g).blocks(); ++b) out.push_back(apply_multiplier(f, lp::block_table(g, b)));
  return out;
}

enum Case { high_low = 0, low_high = 1, high_high = 2 };
constexpr const char* kCaseNames[3] = {"high_low", "low_high", "high_high"};

Case case_of(int i, int j) {
  if (i >= j + 2) return high_low;
  if (j >= i + 2) return low_high;
  return high_high;
}

double besov_from(const ShellNormAccumulator& acc, double s, double p, double q) {
  auto ladder = lp::DyadicLadder::for_grid(acc.grid());
  double total = 0.0;
  for (int b = 0; b < acc.blocks(); ++b) {
    double v = acc.block_mixed(b, q, p, false);
    total += std::pow(2.0, 2.0 * ladder.block_k(b) * s) * v * v;
  }
  return std::sqrt(total);
}

// (sum_k 2^{2k(n/2-1)} ||Q_k F||^2_{L^1 L^2})^{1/2}
double forcing_lhs(const ShellNormAccumulator& acc) {
  return besov_from(acc, acc.grid().n / 2.0 - 1.0, 2.0, 1.0);
}

struct Families {
  AdmissiblePairFamily adm, good, good_t;
  explicit Families(int n)
      : adm(norms::enumerate_pairs(n, PairVariant::admissible)),
        good(norms::enumerate_pairs(n, PairVariant::good_product)),
        good_t(norms::enumerate_pairs(n, PairVariant::good_product_time)) {}
};

using SampleValues = std::map<std::string, std::pair<double, double>>;  // id -> (lhs, rhs)
using SampleExtras = std::map<std::string, double>;

ModeSet draw(const EnsembleSpec& spec, const std::vector<int>& shells, std::mt19937_64& rng) {
  auto m = random_modes(spec.grid.n, spec.grid.L, shells, spec.amplitude_law, spec.amplitude, rng);
  if (spec.abelian) {
    for (auto& c : m.value) c[1] = c[2] = cplx(0.0);
    for (auto& c : m.rate) c[1] = c[2] = cplx(0.0);
  }
  return m;
}

double measure_of(const EnsembleSpec& spec) { return std::pow(2.0, -spec.grid.n * spec.shift); }

const std::vector<int>& a_shells(const EnsembleSpec& spec) {
  return spec.a_shells.empty() ? spec.shells : spec.a_shells;
}

//----------------------------------------------------------------------------

void product_pass(const EnsembleSpec& spec, std::mt19937_64& rng, SampleValues& out, SampleExtras& extras) {
  const Grid& grid = spec.grid;
  const int n = grid.n;
  Families fam(n);
  auto fm = shift_modes(draw(spec, spec.shells, rng), spec.shift);
  auto gm = shift_modes(draw(spec, spec.shells, rng), spec.shift);
  auto fs = spectra_of(grid, fm), gs = spectra_of(grid, gm);

  auto rF = norms::exponents_for({fam.adm}, {2.0, 2.0 * n});
  auto rH = norms::exponents_for({fam.adm, fam.good, fam.good_t}, {kInf, spec.besov_p});
  ShellNormAccumulator accF(grid, rF, true), accG(grid, rF, true), accH(grid, rH, true);
  std::vector<ShellNormAccumulator> parts;
  if (spec.case_split)
    for (int c = 0; c < 3; ++c) parts.emplace_back(grid, norms::exponents_for({fam.good, fam.good_t}), true);

  for (int m = 0; m <= grid.M; ++m) {
    const double t = grid.time(m);
    auto [fv, fd] = evolve(grid, fs, t);
    auto [gv, gd] = evolve(grid, gs, t);
    accF.add_slice(std::vector<LieAlgebraField>{fv}, std::vector<LieAlgebraField>{fd});
    accG.add_slice(std::vector<LieAlgebraField>{gv}, std::vector<LieAlgebraField>{gd});
    auto h = lp::inverse_gradient(multiply(fv, gv, spec.product));
    auto dh = lp::inverse_gradient(multiply(fd, gv, spec.product) + multiply(fv, gd, spec.product));
    accH.add_slice(std::vector<LieAlgebraField>{h}, std::vector<LieAlgebraField>{dh});
    if (spec.case_split) {
      auto fb = blocks_of(fv), fdb = blocks_of(fd), gb = blocks_of(gv), gdb = blocks_of(gd);
      std::array<LieAlgebraField, 3> pv{LieAlgebraField(grid), LieAlgebraField(grid), LieAlgebraField(grid)};
      auto pd = pv;
      for (std::size_t i = 0; i < fb.size(); ++i)
        for (std::size_t j = 0; j < gb.size(); ++j) {
          if (max_abs(fb[i]) == 0.0 || max_abs(gb[j]) == 0.0) continue;
          Case c = case_of(static_cast<int>(i), static_cast<int>(j));
          pv[c] = pv[c] + multiply(fb[i], gb[j], spec.product);
          pd[c] = pd[c] + multiply(fdb[i], gb[j], spec.product) + multiply(fb[i], gdb[j], spec.product);
        }
      for (int c = 0; c < 3; ++c)
        parts[c].add_slice(std::vector<LieAlgebraField>{lp::inverse_gradient(pv[c])},
                           std::vector<LieAlgebraField>{lp::inverse_gradient(pd[c])});
    }
  }

  const double mu = measure_of(spec);
  accF.scale_measure(mu);
  accG.scale_measure(mu);
  accH.scale_measure(mu);
  const double Sf = norms::s_norm_report(accF, 1, fam.adm).value;
  const double Sg = norms::s_norm_report(accG, 1, fam.adm).value;
  const double Splus = norms::s_plus_report(accH, fam.good, fam.good_t).value;
  const double B1 = norms::bp_report(accH, 1.0).value;
  const double p = spec.besov_p;

  out["2.12"] = {Splus, Sf * Sg};
  out["2.11a"] = {norms::s_norm_report(accH, 1, fam.adm).value, Splus};
  out["2.11b"] = {B1, Splus};
  out["2.11c"] = {besov_from(accH, 0.5 + n / p - 1.0, p, 2.0), Splus};
  out["A.2"] = {besov_from(accH, n / p - 0.5, p, 2.0), Sf * Sg};
  out["A.3"] = {B1, Sf * Sg};
  out["A.1i"] = {besov_from(accF, 0.0, 2.0 * n, 2.0), Sf};
  out["A.1ii"] = {besov_from(accF, n / 2.0 - 1.0, 2.0, kInf), Sf};

  if (spec.case_split) {
    for (int c = 0; c < 3; ++c) {
      parts[c].scale_measure(mu);
      double v = norms::s_plus_report(parts[c], fam.good, fam.good_t).value;
      extras[std::string("2.12:") + kCaseNames[c]] = Sf * Sg > 0.0 ? v / (Sf * Sg) : 0.0;
    }
  }
}

void forcing_pass(const EnsembleSpec& spec, std::mt19937_64& rng, SampleValues& out, SampleExtras& extras) {
  const Grid& grid = spec.grid;
  const int n = grid.n;
  Families fam(n);
  auto am = shift_modes(draw(spec, a_shells(spec), rng), spec.shift);
  auto bm = shift_modes(draw(spec, spec.shells, rng), spec.shift);
  auto as = spectra_of(grid, am), bs = spectra_of(grid, bm);

  ShellNormAccumulator accA(grid, norms::exponents_for({fam.good, fam.good_t}), true);
  ShellNormAccumulator accB(grid, norms::exponents_for({fam.adm}), true);
  ShellNormAccumulator accP(grid, {2.0}, false);
  std::vector<ShellNormAccumulator> parts;
  if (spec.case_split)
    for (int c = 0; c < 3; ++c) parts.emplace_back(grid, std::vector<double>{2.0}, false);

  for (int m = 0; m <= grid.M; ++m) {
    const double t = grid.time(m);
    auto [av, ad] = evolve(grid, as, t);
    auto [bv, bd] = evolve(grid, bs, t);
    accA.add_slice(std::vector<LieAlgebraField>{av}, std::vector<LieAlgebraField>{ad});
    accB.add_slice(std::vector<LieAlgebraField>{bv}, std::vector<LieAlgebraField>{bd});
    accP.add_slice(std::vector<LieAlgebraField>{multiply(av, bv, spec.product)}, std::vector<LieAlgebraField>{});
    if (spec.case_split) {
      auto ab = blocks_of(av), bb = blocks_of(bv);
      std::array<LieAlgebraField, 3> pv{LieAlgebraField(grid), LieAlgebraField(grid), LieAlgebraField(grid)};
      for (std::size_t i = 0; i < ab.size(); ++i)
        for (std::size_t j = 0; j < bb.size(); ++j) {
          if (max_abs(ab[i]) == 0.0 || max_abs(bb[j]) == 0.0) continue;
          Case c = case_of(static_cast<int>(i), static_cast<int>(j));
          pv[c] = pv[c] + multiply(ab[i], bb[j], spec.product);
        }
      for (int c = 0; c < 3; ++c) parts[c].add_slice(std::vector<LieAlgebraField>{pv[c]}, std::vector<LieAlgebraField>{});
    }
  }
  const double mu = measure_of(spec);
  accA.scale_measure(mu);
  accB.scale_measure(mu);
  accP.scale_measure(mu);
  const double rhs = norms::s_plus_report(accA, fam.good, fam.good_t).value * norms::s_norm_report(accB, 1, fam.adm).value;
  out["2.13"] = {forcing_lhs(accP), rhs};
  if (spec.case_split) {
    for (int c = 0; c < 3; ++c) {
      parts[c].scale_measure(mu);
      extras[std::string("2.13:") + kCaseNames[c]] = rhs > 0.0 ? forcing_lhs(parts[c]) / rhs : 0.0;
    }
  }
}

void insitu_pass(const EnsembleSpec& spec, std::mt19937_64& rng, SampleValues& out, SampleExtras& extras) {
  const Grid& grid = spec.grid;
  const int n = grid.n;
  Families fam(n);
  std::vector<ModeSet> bm;
  for (int mu = 0; mu <= n; ++mu)
    bm.push_back(draw(spec, spec.shells, rng));

  // Normalize on the unshifted sample so that shifting stays a pure rescaling.
  {
    Grid base = grid;
    base.T = grid.T * std::ldexp(1.0, spec.shift);
    OneForm b0(base);
    for (int mu = 0; mu <= n; ++mu) b0[mu] = place(base, bm[mu], false);
    double proxy = connection::smallness_proxy(b0);
    if (proxy > 0.0) {
      double s = spec.insitu_proxy / proxy;
      for (auto& m : bm) {
        for (auto& c : m.value)
          for (auto& x : c) x *= s;
        for (auto& c : m.rate)
          for (auto& x : c) x *= s;
      }
    }
  }
  std::vector<Spectra> bs;
  for (auto& m : bm) bs.push_back(spectra_of(grid, shift_modes(m, spec.shift)));

  auto copts = spec.connection;
  // The smallness proxy is measured on the whole torus; per period it is
  // unchanged by the shift.
  copts.gate *= std::pow(2.0, spec.shift * n / 2.0);

  ShellNormAccumulator accA(grid, norms::exponents_for({fam.good, fam.good_t}), true);
  ShellNormAccumulator accB(grid, norms::exponents_for({fam.adm}), true);
  ShellNormAccumulator accP(grid, {2.0}, false);
  int iterations = 0;
  for (int m = 0; m <= grid.M; ++m) {
    const double t = grid.time(m);
    OneForm bv(grid), bd(grid);
    for (int mu = 0; mu <= n; ++mu) std::tie(bv[mu], bd[mu]) = evolve(grid, bs[mu], t);
    auto res = connection::solve_connection(bv, copts);
    iterations = std::max(iterations, res.iterations);
    auto ad = connection::solve_connection_rate(res.a, bv, bd, copts);
    accA.add_slice(res.a.e, ad.e);
    accB.add_slice(bv.e, bd.e);
    // Lorentz contraction [a_0, b_0] - sum_j [a_j, b_j]
    LieAlgebraField p = multiply(res.a[0], bv[0], spec.product);
    for (int j = 1; j <= n; ++j) p = p - multiply(res.a[j], bv[j], spec.product);
    accP.add_slice(std::vector<LieAlgebraField>{p}, std::vector<LieAlgebraField>{});
  }
  const double mu = measure_of(spec);
  accA.scale_measure(mu);
  accB.scale_measure(mu);
  accP.scale_measure(mu);
  out["2.13i"] = {forcing_lhs(accP), norms::s_plus_report(accA, fam.good, fam.good_t).value *
                                         norms::s_norm_report(accB, 1, fam.adm).value};
  extras["2.13i:connection_iterations"] = iterations;
}

void strichartz_pass(const EnsembleSpec& spec, std::mt19937_64& rng, SampleValues& out, SampleExtras&) {
  const Grid& grid = spec.grid;
  const int n = grid.n;
  const int k0 = spec.shells.front();
  auto fm = shift_modes(draw(spec, {k0}, rng), spec.shift);
  auto pm = shift_modes(draw(spec, {k0}, rng), spec.shift);
  StrichartzInput in;
  in.f0 = place(grid, fm, false);
  in.g0 = place(grid, fm, true);
  // box scales by 4 under the dyadic dilation
  in.forcing = (spec.forcing * std::pow(4.0, spec.shift) * kTwoPi * std::ldexp(1.0, k0) / grid.L) * place(grid, pm, false);
  in.freq = kTwoPi * std::ldexp(1.0, k0 + spec.shift) / grid.L;
  in.k = k0 + spec.shift;
  in.j = spec.strichartz_j;
  in.measure = measure_of(spec);
  std::vector<std::pair<double, double>> pairs;
  for (const auto& p : norms::enumerate_pairs(n, PairVariant::admissible).pairs) pairs.emplace_back(p.q, p.r);
  auto v = strichartz_ratio(grid, in, pairs);
  out["2.4"] = {v.lhs, v.rhs};
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

//----------------------------------------------------------------------------

const std::vector<std::string>& estimate_ids() {
  static const std::vector<std::string> ids{"2.12", "2.13", "2.13i", "2.4",  "2.11a", "2.11b",
                                            "2.11c", "A.1i", "A.1ii", "A.2", "A.3"};
  return ids;
}

void EnsembleSpec::validate() const {
  grid.validate();
  if (samples < 1) throw ConfigError("lab: samples must be >= 1");
  if (shells.empty()) throw ConfigError("lab: at least one shell is required");
  for (const auto* list : {&shells, &a_shells})
    for (int k : *list)
      if (k < 0 || k > grid.k_max()) throw ConfigError("lab: shell outside the ladder");
  if (amplitude_law != "critical" && amplitude_law != "flat") throw ConfigError("lab: unknown amplitude law");
  if (product != "bracket" && product != "scalar") throw ConfigError("lab: unknown product");
  if (shift < 0) throw ConfigError("lab: shift must be >= 0");
  if (!(besov_p >= 2.0 && besov_p < 2.0 * grid.n)) throw ConfigError("lab: besov_p must lie in [2, 2n)");
  if (strichartz_j < 0) throw ConfigError("lab: strichartz_j must be >= 0");
  if (!(amplitude >= 0.0) || !(insitu_proxy > 0.0) || !(forcing >= 0.0))
    throw ConfigError("lab: amplitudes must be nonnegative");
}

double EstimateReport::extra(const std::string& name) const {
  for (const auto& [k, v] : extras)
    if (k == name) return v;
  throw ConfigError("lab: report has no entry '" + name + "'");
}

void EstimateReport::finalize() {
  max_ratio = 0.0;
  worst_seed = seeds.empty() ? 0 : seeds.front();
  for (std::size_t i = 0; i < ratio.size(); ++i)
    if (ratio[i] > max_ratio || std::isnan(ratio[i])) {
      max_ratio = ratio[i];
      worst_seed = seeds[i];
    }
  median_ratio = median(ratio);
}

std::string to_csv(const EstimateReport& r) {
  std::ostringstream os;
  os << "sample,seed,lhs,rhs,ratio\n";
  for (std::size_t i = 0; i < r.ratio.size(); ++i)
    os << i << ',' << r.seeds[i] << ',' << fmt(r.lhs[i]) << ',' << fmt(r.rhs[i]) << ',' << fmt(r.ratio[i]) << '\n';
  return os.str();
}

std::string to_json(const EstimateReport& r, const std::string& config_json) {
  nlohmann::ordered_json j;
  j["estimate"] = r.id;
  j["samples"] = r.ratio.size();
  j["max_ratio"] = r.max_ratio;
  j["median_ratio"] = r.median_ratio;
  j["worst_seed"] = r.worst_seed;
  bool finite = true;
  for (double x : r.ratio) finite = finite && std::isfinite(x) && x >= 0.0;
  j["all_finite"] = finite;
  nlohmann::ordered_json ex = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.extras) ex[k] = v;
  j["extras"] = ex;
  j["config"] = nlohmann::ordered_json::parse(config_json);
  return j.dump(2);
}

std::vector<EstimateReport> run_estimates(const std::vector<std::string>& ids, const EnsembleSpec& spec) {
  spec.validate();
  std::vector<Pass> passes;
  for (const auto& id : ids) {
    Pass p = pass_of(id);
    if (std::find(passes.begin(), passes.end(), p) == passes.end()) passes.push_back(p);
  }
  std::map<std::string, EstimateReport> reports;
  std::map<std::string, double> extra_max;
  for (const auto& id : ids) reports[id].id = id;

  for (int i = 0; i < spec.samples; ++i) {
    const std::uint64_t seed = splitmix64(spec.seed + static_cast<std::uint64_t>(i));
    SampleValues values;
    SampleExtras extras;
    for (Pass p : passes) {
      std::mt19937_64 rng(seed);
      switch (p) {
        case Pass::product: product_pass(spec, rng, values, extras); break;
        case Pass::forcing: forcing_pass(spec, rng, values, extras); break;
        case Pass::insitu: insitu_pass(spec, rng, values, extras); break;
        case Pass::strichartz: strichartz_pass(spec, rng, values, extras); break;
      }
    }
    for (const auto& id : ids) {
      auto [lhs, rhs] = values.at(id);
      auto& r = reports[id];
      r.seeds.push_back(seed);
      r.lhs.push_back(lhs);
      r.rhs.push_back(rhs);
      r.ratio.push_back(lhs == 0.0 ? 0.0 : (rhs > 0.0 ? lhs / rhs : INFINITY));
    }
    for (const auto& [k, v] : extras) extra_max[k] = std::max(extra_max.count(k) ? extra_max[k] : 0.0, v);
  }

  std::vector<EstimateReport> out;
  for (const auto& id : ids) {
    auto r = reports[id];
    for (const auto& [k, v] : extra_max)
      if (k.rfind(id + ":", 0) == 0) r.extras.emplace_back("max_" + k.substr(id.size() + 1), v);
    r.finalize();
    out.push_back(std::move(r));
  }
  return out;
}

EstimateReport run_estimate(const std::string& id, const EnsembleSpec& spec) { return run_estimates({id}, spec).front(); }

EnsembleSpec shifted(const EnsembleSpec& spec) {
  EnsembleSpec s = spec;
  s.shift += 1;
  s.grid.T *= 0.5;
  return s;
}

EnsembleSpec refined(const EnsembleSpec& spec) {
  EnsembleSpec s = spec;
  s.grid.N *= 2;
  return s;
}

//----------------------------------------------------------------------------

ModeSet random_modes(int n, double L, const std::vector<int>& shells, const std::string& law, double amplitude,
                     std::mt19937_64& rng) {
  if (shells.empty()) throw ConfigError("random_modes: no shells");
  const int kmax = *std::max_element(shells.begin(), shells.end());
  const int R = 1 << (kmax + 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ModeSet m;
  std::vector<int> xi(n, -R);
  for (;;) {
    long r2 = 0;
    for (int v : xi) r2 += static_cast<long>(v) * v;
    int last = 0;
    for (int a = n - 1; a >= 0; --a)
      if (xi[a] != 0) {
        last = xi[a];
        break;
      }
    if (last > 0 && r2 < static_cast<long>(R) * R) {
      const double r = std::sqrt(static_cast<double>(r2));
      double w = 0.0;
      for (int k : shells) {
        double amp = law == "critical" ? std::pow(2.0, -k * (n - 1.0)) : 1.0;
        w += amp * lp::shell_profile(r / std::ldexp(1.0, k));
      }
      if (w > 0.0) {
        std::array<cplx, 3> v, d;
        const double om = kTwoPi * r / L;
        for (int i = 0; i < 3; ++i) v[i] = amplitude * w * cplx(gauss(rng), gauss(rng));
        for (int i = 0; i < 3; ++i) d[i] = amplitude * w * om * cplx(gauss(rng), gauss(rng));
        m.xi.push_back(xi);
        m.value.push_back(v);
        m.rate.push_back(d);
      }
    }
    int a = n - 1;
    while (a >= 0 && ++xi[a] > R) xi[a--] = -R;
    if (a < 0) break;
  }
  return m;
}

ModeSet shift_modes(const ModeSet& m, int d) {
  if (d == 0) return m;
  ModeSet out = m;
  const int f = 1 << d;
  const double sv = std::ldexp(1.0, d), sr = std::ldexp(1.0, 2 * d);
  for (auto& xi : out.xi)
    for (auto& v : xi) v *= f;
  for (auto& c : out.value)
    for (auto& x : c) x *= sv;
  for (auto& c : out.rate)
    for (auto& x : c) x *= sr;
  return out;
}

LieAlgebraField place(const Grid& grid, const ModeSet& m, bool rate) {
  const int n = grid.n, N = grid.N;
  auto eng = SpectralEngine::get(n, N);
  std::array<CplxArray, 3> c;
  for (auto& a : c) a.assign(eng->spec_size(), cplx(0.0));
  std::vector<std::size_t> stride(n, 1);
  for (int a = n - 2; a >= 0; --a) stride[a] = stride[a + 1] * (a == n - 2 ? N / 2 + 1 : N);
  auto index = [&](const std::vector<int>& xi) {
    std::size_t s = 0;
    for (int a = 0; a < n; ++a) s += static_cast<std::size_t>(((xi[a] % N) + N) % N) * stride[a];
    return s;
  };
  const auto& coeffs = rate ? m.rate : m.value;
  for (std::size_t q = 0; q < m.xi.size(); ++q) {
    const auto& xi = m.xi[q];
    if (static_cast<int>(xi.size()) != n) throw ShapeError("place: mode dimension mismatch");
    for (int v : xi)
      if (std::abs(v) >= N / 2) throw ConfigError("place: mode not resolved on the grid");
    std::vector<int> neg(xi);
    for (auto& v : neg) v = -v;
    if (xi[n - 1] >= 0) {
      std::size_t s = index(xi);
      for (int i = 0; i < 3; ++i) c[i][s] = coeffs[q][i];
    }
    if (xi[n - 1] <= 0) {
      std::size_t s = index(neg);
      for (int i = 0; i < 3; ++i) c[i][s] = std::conj(coeffs[q][i]);
    }
  }
  return LieAlgebraField::from_spectral(grid, std::move(c));
}

//----------------------------------------------------------------------------

StrichartzValue strichartz_ratio(const Grid& grid, const StrichartzInput& in,
                                 const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.empty()) throw ConfigError("strichartz_ratio: empty pair list");
  const int n = grid.n;
  std::vector<CplxArray> f0, g0, F;
  for (int i = 0; i < 3; ++i) {
    f0.push_back(in.f0.spectrum(i));
    g0.push_back(in.g0.spectrum(i));
    F.push_back(in.forcing.spectrum(i));
  }
  wave::DuhamelStepper stepper(grid, f0, g0);
  std::vector<double> rs;
  for (const auto& p : pairs) rs.push_back(p.second);
  std::sort(rs.begin(), rs.end());
  rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
  std::vector<std::vector<double>> val(rs.size()), der(rs.size());
  std::vector<double> force_l2;
  auto scale = [&](double r) { return std::isinf(r) ? 1.0 : std::pow(in.measure, 1.0 / r); };

  std::vector<CplxArray> Fm(3);
  for (int m = 0; m <= grid.M; ++m) {
    const double c = std::cos(in.freq * grid.time(m));
    for (int i = 0; i < 3; ++i) {
      Fm[i] = F[i];
      for (auto& x : Fm[i]) x *= c;
    }
    stepper.push({&Fm[0], &Fm[1], &Fm[2]});
    std::array<CplxArray, 3> v, d;
    for (int i = 0; i < 3; ++i) stepper.state(i, v[i], d[i]);
    std::vector<LieAlgebraField> vf{LieAlgebraField::from_spectral(grid, std::move(v))};
    std::vector<LieAlgebraField> df{LieAlgebraField::from_spectral(grid, std::move(d))};
    for (std::size_t i = 0; i < rs.size(); ++i) {
      val[i].push_back(norms::spatial_norm(vf, rs[i]) * scale(rs[i]));
      der[i].push_back(norms::spatial_norm(df, rs[i]) * scale(rs[i]));
    }
    force_l2.push_back(std::abs(c) * l2_norm(in.forcing) * std::sqrt(in.measure));
  }
  StrichartzValue out;
  const double down = std::ldexp(1.0, -in.k);
  for (const auto& [q, r] : pairs) {
    std::size_t i = std::find(rs.begin(), rs.end(), r) - rs.begin();
    double w = std::pow(2.0, in.k * (1.0 / q + (std::isinf(r) ? 0.0 : n / r) - in.j));
    double v = w * (norms::time_norm(val[i], q, grid.dt()) + down * norms::time_norm(der[i], q, grid.dt()));
    out.lhs = std::max(out.lhs, v);
  }
  const double sq = std::sqrt(in.measure);
  out.rhs = sq * norms::sobolev_norm(in.f0, n / 2.0 - in.j) + sq * norms::sobolev_norm(in.g0, n / 2.0 - in.j - 1.0) +
            std::pow(2.0, in.k * (n / 2.0 - in.j - 1.0)) * norms::time_norm(force_l2, 1.0, grid.dt());
  return out;
}

//----------------------------------------------------------------------------

DecayReport high_high_decay(const EnsembleSpec& spec) {
  spec.validate();
  const Grid& grid = spec.grid;
  const int n = grid.n;
  if (n < 4) throw ConfigError("high_high_decay: requires n >= 4");
  DecayReport rep;
  rep.k = grid.k_max();
  const double p = (n - 1.0) / (n - 3.0);
  // Young: ||K * (f g)||_inf <= ||K||_{p'} ||f||_{2p} ||g||_{2p}, p' = (n-1)/2
  const double kernel_exp = (n - 1.0) / 2.0;

  std::mt19937_64 rng(splitmix64(spec.seed));
  auto band = [&](ModeSet m) {
    ModeSet out;
    for (std::size_t q = 0; q < m.xi.size(); ++q) {
      bool ok = true;
      for (int v : m.xi[q]) ok = ok && std::abs(v) < grid.N / 2;
      if (!ok) continue;
      out.xi.push_back(m.xi[q]);
      out.value.push_back(m.value[q]);
      out.rate.push_back(m.rate[q]);
    }
    return out;
  };
  auto fs = spectra_of(grid, band(draw(spec, {rep.k}, rng)));
  auto gs = spectra_of(grid, band(draw(spec, {rep.k}, rng)));

  ShellNormAccumulator accF(grid, {2.0 * p}, false), accG(grid, {2.0 * p}, false), accP(grid, {kInf}, false);
  std::vector<double> fn, gn;
  for (int m = 0; m <= grid.M; ++m) {
    auto fv = lp::project_shell(evolve(grid, fs, grid.time(m)).first, rep.k);
    auto gv = lp::project_shell(evolve(grid, gs, grid.time(m)).first, rep.k);
    fn.push_back(norms::spatial_norm({fv}, 2.0 * p));
    gn.push_back(norms::spatial_norm({gv}, 2.0 * p));
    accP.add_slice(std::vector<LieAlgebraField>{multiply(fv, gv, spec.product)}, std::vector<LieAlgebraField>{});
  }
  const double F = norms::time_norm(fn, 2.0, grid.dt()), G = norms::time_norm(gn, 2.0, grid.dt());
  auto ladder = lp::DyadicLadder::for_grid(grid);
  std::vector<double> x, y;
  for (int b = 0; b < ladder.blocks(); ++b) {
    int l = ladder.block_k(b);
    if (l >= rep.k) break;
    double down = std::ldexp(1.0, -l);
    rep.l.push_back(l);
    rep.bound.push_back(down * lp::shell_kernel_norm(grid, l, kernel_exp) * F * G);
    rep.actual.push_back(down * accP.block_mixed(b, 1.0, kInf, false));
    x.push_back(l);
    y.push_back(std::log2(rep.bound.back()));
  }
  if (x.size() < 2) throw ConfigError("high_high_decay: need at least two output shells below k");
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= x.size();
  ym /= y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - xm) * (y[i] - ym);
    sxx += (x[i] - xm) * (x[i] - xm);
  }
  rep.measured = std::pow(2.0, -sxy / sxx);
  const double w = (n - 2.0) * (n - 2.0) - 3.0;
  rep.predicted = std::pow(2.0, -w / (n - 1.0));
  rep.relative_error = std::abs(rep.measured - rep.predicted) / rep.predicted;
  return rep;
}

}  // namespace wavemap::lab
