#include "wavemap/norms.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "wavemap/errors.hpp"
#include "wavemap/lp.hpp"

namespace wavemap::norms {

namespace {

constexpr double kSlack = 1e-12;

double recip(double v) { return std::isinf(v) ? 0.0 : 1.0 / v; }

bool admissible_recip(int n, double a, double b) {
  return a >= -kSlack && a <= 0.5 + kSlack && b >= -kSlack && b <= 0.5 + kSlack &&
         a + (n - 1) * b / 2.0 <= (n - 1) / 4.0 + kSlack;
}

bool subcritical_recip(int n, double a, double b) {
  return admissible_recip(n, a, b) && a + n * b <= 1.0 - kMargin + kSlack;
}

bool half_recip(int n, double a, double b) {
  return a >= -kSlack && a <= 1.0 + kSlack && b >= -kSlack && b <= 1.0 + kSlack &&
         a / 2.0 + (n - 1) * b / 4.0 <= (n - 1) / 4.0 - kMargin + kSlack;
}

// Search over a reciprocal lattice fine enough to contain every exponent the
// default families use (step 1/480 holds 1/2, 1/3, 1/4, 1/5, 1/6, 1/8, 3/8).
bool holder_recip(int n, double a, double b) {
  constexpr int steps = 240;
  for (int i = 0; i <= steps; ++i) {
    double a1 = 0.5 * i / steps;
    double a2 = a - a1;
    if (a2 < -kSlack) break;
    for (int j = 0; j <= steps; ++j) {
      double b1 = 0.5 * j / steps;
      double b2 = b - b1;
      if (b2 < -kSlack) break;
      if (admissible_recip(n, a1, b1) && subcritical_recip(n, a2, b2)) return true;
    }
  }
  return false;
}

}  // namespace

const char* variant_name(PairVariant v) {
  switch (v) {
    case PairVariant::admissible: return "admissible";
    case PairVariant::admissible_subcritical: return "admissible_subcritical";
    case PairVariant::half_admissible: return "half_admissible";
    case PairVariant::half_admissible_time: return "half_admissible_time";
    case PairVariant::holder_product: return "holder_product";
    case PairVariant::good_product: return "good_product";
    case PairVariant::good_product_time: return "good_product_time";
  }
  return "unknown";
}

bool is_admissible(int n, const AdmissiblePair& p) {
  return p.q >= 2.0 && p.r >= 2.0 && admissible_recip(n, recip(p.q), recip(p.r));
}

bool is_sharp_admissible(int n, const AdmissiblePair& p) {
  return is_admissible(n, p) && std::abs(recip(p.q) + (n - 1) * recip(p.r) / 2.0 - (n - 1) / 4.0) <= 1e-12;
}

bool contains(int n, PairVariant v, const AdmissiblePair& p) {
  if (!(p.q >= 1.0) || !(p.r >= 1.0)) return false;
  const double a = recip(p.q), b = recip(p.r);
  switch (v) {
    case PairVariant::admissible: return is_admissible(n, p);
    case PairVariant::admissible_subcritical: return is_admissible(n, p) && subcritical_recip(n, a, b);
    case PairVariant::half_admissible: return half_recip(n, a, b);
    case PairVariant::half_admissible_time: return p.q >= 2.0 && half_recip(n, a, b);
    case PairVariant::holder_product: return holder_recip(n, a, b);
    case PairVariant::good_product: return half_recip(n, a, b) && holder_recip(n, a, b);
    case PairVariant::good_product_time: return p.q >= 2.0 && half_recip(n, a, b) && holder_recip(n, a, b);
  }
  return false;
}

std::vector<AdmissiblePair> sharp_pairs(int n) {
  std::vector<AdmissiblePair> cand;
  cand.push_back({kInf, 2.0});
  cand.push_back({2.0, n > 3 ? 2.0 * (n - 1) / (n - 3) : kInf});
  // 1/4 + (n-1)/(2r) = (n-1)/4
  double rhs = (n - 1) / 4.0 - 0.25;
  cand.push_back({4.0, rhs > 0.0 ? (n - 1) / (2.0 * rhs) : kInf});
  std::vector<AdmissiblePair> out;
  for (const auto& p : cand)
    if (is_sharp_admissible(n, p) && std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  return out;
}

AdmissiblePairFamily enumerate_pairs(int n, PairVariant v) {
  if (n < 2) throw DomainError("enumerate_pairs: n must be >= 2");
  AdmissiblePairFamily fam;
  fam.n = n;
  fam.variant = v;
  std::vector<AdmissiblePair> cand = sharp_pairs(n);
  cand.push_back({2.0, kInf});
  switch (v) {
    case PairVariant::admissible:
      break;
    case PairVariant::good_product:
      cand.push_back({2.0, 2.0});
      cand.push_back({1.0, kInf});
      break;
    case PairVariant::good_product_time:
      cand.push_back({2.0, 2.0});
      break;
    default: {
      const double qs[] = {1.0, 4.0 / 3.0, 2.0, 4.0, kInf};
      std::vector<double> rs = {1.0, 2.0, 3.0, 4.0, 6.0, 8.0, kInf};
      for (const auto& p : sharp_pairs(n)) rs.push_back(p.r);
      for (double q : qs)
        for (double r : rs) cand.push_back({q, r});
      break;
    }
  }
  for (const auto& p : cand)
    if (contains(n, v, p) && std::find(fam.pairs.begin(), fam.pairs.end(), p) == fam.pairs.end())
      fam.pairs.push_back(p);
  return fam;
}

//============================================================================
// Lebesgue norms
//============================================================================

double time_norm(const std::vector<double>& s, double q, double dt) {
  if (!(q >= 1.0)) throw DomainError("time_norm: exponent must be >= 1");
  if (s.empty()) return 0.0;
  if (std::isinf(q)) return *std::max_element(s.begin(), s.end());
  if (s.size() == 1) return s[0];
  double acc = 0.0;
  for (std::size_t m = 0; m < s.size(); ++m) {
    double w = (m == 0 || m + 1 == s.size()) ? 0.5 : 1.0;
    acc += w * std::pow(s[m], q);
  }
  return std::pow(acc * dt, 1.0 / q);
}

namespace {

// sum over points of |v|^r from squared magnitudes (or the max for r = inf),
// with the common integer exponents special-cased.
double power_sum(const RealArray& sq, double r) {
  if (std::isinf(r)) {
    double m = 0.0;
    for (double v : sq) m = std::max(m, v);
    return std::sqrt(m);
  }
  double acc = 0.0;
  if (r == 2.0) {
    for (double v : sq) acc += v;
  } else if (r == 4.0) {
    for (double v : sq) acc += v * v;
  } else if (r == 6.0) {
    for (double v : sq) acc += v * v * v;
  } else if (r == 3.0) {
    for (double v : sq) acc += v * std::sqrt(v);
  } else if (r == 1.0) {
    for (double v : sq) acc += std::sqrt(v);
  } else if (r == 8.0) {
    for (double v : sq) acc += (v * v) * (v * v);
  } else {
    const double h = 0.5 * r;
    for (double v : sq) acc += std::pow(v, h);
  }
  return acc;
}

double finish_lr(double sum, double r, double cell) {
  if (std::isinf(r)) return sum;
  return std::pow(sum * cell, 1.0 / r);
}

}  // namespace

double spatial_norm(const std::vector<LieAlgebraField>& slice, double r) {
  if (!(r >= 1.0)) throw DomainError("spatial_norm: exponent must be >= 1");
  if (slice.empty()) return 0.0;
  RealArray sq(slice.front().points(), 0.0);
  for (const auto& f : slice)
    for (int i = 0; i < 3; ++i) {
      const auto& c = f.component(i);
      for (std::size_t p = 0; p < sq.size(); ++p) sq[p] += c[p] * c[p];
    }
  return finish_lr(power_sum(sq, r), r, slice.front().grid().cell_volume());
}

double mixed_norm(const SpaceTimeField& F, double q, double r, bool derivs) {
  if (!(q >= 1.0) || !(r >= 1.0)) throw DomainError("mixed_norm: exponents must lie in [1, inf]");
  if (derivs && !F.has_derivs()) throw ContractError("mixed_norm: no time-derivative channel");
  const auto& src = derivs ? F.derivs : F.values;
  std::vector<double> per;
  for (const auto& slice : src) per.push_back(spatial_norm(slice, r));
  return time_norm(per, q, F.grid.dt());
}

double sobolev_norm(const std::vector<LieAlgebraField>& channels, double s) {
  if (channels.empty()) return 0.0;
  const Grid& g = channels.front().grid();
  auto ladder = lp::DyadicLadder::for_grid(g);
  const auto& eng = channels.front().engine();
  double total = 0.0;
  for (int b = 0; b < ladder.blocks(); ++b) {
    const auto& t = lp::block_table(g, b);
    double e = 0.0;
    for (const auto& f : channels)
      for (int i = 0; i < 3; ++i) {
        const auto& c = f.spectrum(i);
        for (std::size_t x = 0; x < c.size(); ++x) e += eng.weight(x) * t[x] * t[x] * std::norm(c[x]);
      }
    e *= std::pow(g.L, g.n);
    total += std::pow(2.0, 2.0 * ladder.block_k(b) * s) * e;
  }
  return std::sqrt(total);
}

double sobolev_norm(const LieAlgebraField& f, double s) { return sobolev_norm(std::vector<LieAlgebraField>{f}, s); }

//============================================================================
// ShellNormAccumulator
//============================================================================

ShellNormAccumulator::ShellNormAccumulator(const Grid& grid, std::vector<double> r_values, bool with_derivs)
    : grid_(grid), r_(std::move(r_values)), with_derivs_(with_derivs) {
  for (double r : r_)
    if (!(r >= 1.0)) throw DomainError("accumulator: exponent must be >= 1");
  blocks_ = lp::DyadicLadder::for_grid(grid).blocks();
  val_.assign(blocks_, {});
  der_.assign(blocks_, {});
  support_.resize(blocks_);
  for (int b = 0; b < blocks_; ++b) {
    const auto& t = lp::block_table(grid_, b);
    for (std::size_t s = 0; s < t.size(); ++s)
      if (t[s] != 0.0) support_[b].push_back(static_cast<std::uint32_t>(s));
  }
}

int ShellNormAccumulator::r_index(double r) const {
  for (std::size_t i = 0; i < r_.size(); ++i)
    if (r_[i] == r) return static_cast<int>(i);
  throw DomainError("accumulator: exponent was not accumulated");
}

void ShellNormAccumulator::add_slice(const std::vector<const CplxArray*>& value,
                                     const std::vector<const CplxArray*>& deriv) {
  if (with_derivs_ && deriv.size() != value.size())
    throw ContractError("accumulator: derivative channel missing or mismatched");
  auto eng = SpectralEngine::get(grid_.n, grid_.N);
  const std::size_t S = eng->spec_size();
  const std::size_t P = eng->real_size();
  CplxArray work(S, cplx(0.0));
  RealArray phys(P), sq(P);
  const double cell = grid_.cell_volume();

  // work is zero off the block support, so only supported slots are written.
  auto process = [&](const std::vector<const CplxArray*>& arrays, int b, std::vector<double>& out) {
    const auto& t = lp::block_table(grid_, b);
    const auto& sup = support_[b];
    bool any = false;
    for (const CplxArray* c : arrays) {
      if (c->size() != S) throw ShapeError("accumulator: spectrum size mismatch");
      bool nz = false;
      for (std::uint32_t s : sup) {
        work[s] = (*c)[s] * t[s];
        if (work[s] != cplx(0.0)) nz = true;
      }
      if (!nz) continue;
      eng->backward(work.data(), phys.data());
      if (any) {
        for (std::size_t p = 0; p < P; ++p) sq[p] += phys[p] * phys[p];
      } else {
        for (std::size_t p = 0; p < P; ++p) sq[p] = phys[p] * phys[p];
      }
      any = true;
    }
    for (std::uint32_t s : sup) work[s] = cplx(0.0);
    if (!any) {
      out.insert(out.end(), r_.size(), 0.0);
      return;
    }
    for (double r : r_) out.push_back(finish_lr(power_sum(sq, r), r, cell));
  };

  for (int b = 0; b < blocks_; ++b) {
    process(value, b, val_[b]);
    if (with_derivs_) process(deriv, b, der_[b]);
  }
  ++slices_;
}

void ShellNormAccumulator::add_slice(const std::vector<LieAlgebraField>& value,
                                     const std::vector<LieAlgebraField>& deriv) {
  std::vector<const CplxArray*> v, d;
  for (const auto& f : value)
    for (int i = 0; i < 3; ++i) v.push_back(&f.spectrum(i));
  for (const auto& f : deriv)
    for (int i = 0; i < 3; ++i) d.push_back(&f.spectrum(i));
  add_slice(v, d);
}

double ShellNormAccumulator::block_mixed(int b, double q, double r, bool deriv) const {
  if (deriv && !with_derivs_) throw ContractError("accumulator: no time-derivative channel");
  const int ir = r_index(r);
  const auto& src = deriv ? der_.at(b) : val_.at(b);
  std::vector<double> per(slices_);
  for (int m = 0; m < slices_; ++m) per[m] = src[m * r_.size() + ir];
  return time_norm(per, q, grid_.dt());
}

void ShellNormAccumulator::scale_measure(double factor) {
  if (!(factor > 0.0)) throw DomainError("accumulator: measure factor must be positive");
  const std::size_t nr = r_.size();
  std::vector<double> mult(nr);
  for (std::size_t i = 0; i < nr; ++i) mult[i] = std::isinf(r_[i]) ? 1.0 : std::pow(factor, 1.0 / r_[i]);
  for (auto* store : {&val_, &der_})
    for (auto& block : *store)
      for (std::size_t x = 0; x < block.size(); ++x) block[x] *= mult[x % nr];
}

std::vector<double> exponents_for(const std::vector<AdmissiblePairFamily>& families, std::vector<double> extra) {
  std::vector<double> r = std::move(extra);
  for (const auto& f : families)
    for (const auto& p : f.pairs) r.push_back(p.r);
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

ShellNormAccumulator accumulate(const SpaceTimeField& F, const std::vector<double>& r_values) {
  F.validate();
  ShellNormAccumulator acc(F.grid, r_values, F.has_derivs());
  for (int m = 0; m < F.slices(); ++m)
    acc.add_slice(F.values[m], F.has_derivs() ? F.derivs[m] : std::vector<LieAlgebraField>{});
  return acc;
}

//============================================================================
// Strichartz-type norms
//============================================================================

namespace {

double weight(int n, int k, const AdmissiblePair& p, int j) {
  return std::pow(2.0, k * (recip(p.q) + n * recip(p.r) - j));
}

struct Sup {
  double value = -1.0;
  AdmissiblePair pair{};
  void offer(double v, const AdmissiblePair& p) {
    if (v > value) {
      value = v;
      pair = p;
    }
  }
};

}  // namespace

double strichartz_block_norm(const SpaceTimeField& F, int k, int j, const AdmissiblePairFamily& family) {
  if (family.pairs.empty()) throw ConfigError("strichartz_block_norm: empty pair family");
  if (!F.has_derivs()) throw ContractError("strichartz_block_norm: time-derivative channel required");
  double best = 0.0;
  const double down = std::ldexp(1.0, -k);
  for (const auto& p : family.pairs) {
    double v = weight(F.grid.n, k, p, j) * (mixed_norm(F, p.q, p.r, false) + down * mixed_norm(F, p.q, p.r, true));
    best = std::max(best, v);
  }
  return best;
}

NormReport s_norm_report(const ShellNormAccumulator& acc, int j, const AdmissiblePairFamily& family) {
  if (family.pairs.empty()) throw ConfigError("s_norm: empty pair family");
  if (!acc.has_derivs()) throw ContractError("s_norm: time-derivative channel required");
  auto ladder = lp::DyadicLadder::for_grid(acc.grid());
  NormReport rep;
  rep.name = "S(-" + std::to_string(j) + ")";
  rep.families.push_back(variant_name(family.variant));
  double total = 0.0;
  for (int b = 0; b < acc.blocks(); ++b) {
    const int k = ladder.block_k(b);
    const double down = std::ldexp(1.0, -k);
    Sup s;
    for (const auto& p : family.pairs) {
      double v = weight(acc.grid().n, k, p, j) *
                 (acc.block_mixed(b, p.q, p.r, false) + down * acc.block_mixed(b, p.q, p.r, true));
      s.offer(v, p);
    }
    rep.blocks.push_back({k, s.value, s.pair, s.pair});
    total += s.value * s.value;
  }
  rep.value = std::sqrt(total);
  return rep;
}

NormReport s_plus_report(const ShellNormAccumulator& acc, const AdmissiblePairFamily& good,
                         const AdmissiblePairFamily& good_time) {
  if (good.pairs.empty() || good_time.pairs.empty()) throw ConfigError("s_plus_norm: empty pair family");
  if (!acc.has_derivs()) throw ContractError("s_plus_norm: time-derivative channel required");
  auto ladder = lp::DyadicLadder::for_grid(acc.grid());
  NormReport rep;
  rep.name = "S+(-1)";
  rep.families = {variant_name(good.variant), variant_name(good_time.variant)};
  double total = 0.0;
  for (int b = 0; b < acc.blocks(); ++b) {
    const int k = ladder.block_k(b);
    const double down = std::ldexp(1.0, -k);
    Sup sv, sd;
    for (const auto& p : good.pairs) {
      double v = weight(acc.grid().n, k, p, 1) * acc.block_mixed(b, p.q, p.r, false);
      sv.offer(v, p);
    }
    for (const auto& p : good_time.pairs) {
      double v = weight(acc.grid().n, k, p, 1) * down * acc.block_mixed(b, p.q, p.r, true);
      sd.offer(v, p);
    }
    rep.blocks.push_back({k, sv.value + sd.value, sv.pair, sd.pair});
    total += sv.value + sd.value;
  }
  rep.value = total;
  return rep;
}

NormReport bp_report(const ShellNormAccumulator& acc, double p) {
  if (!(p >= 1.0)) throw DomainError("bp_norm: exponent must be >= 1");
  auto ladder = lp::DyadicLadder::for_grid(acc.grid());
  NormReport rep;
  rep.name = "B" + (std::isinf(p) ? std::string("inf") : std::to_string(p));
  std::vector<double> blocks;
  for (int b = 0; b < acc.blocks(); ++b) {
    double v = acc.block_mixed(b, 1.0, kInf, false);
    rep.blocks.push_back({ladder.block_k(b), v, {1.0, kInf}, {1.0, kInf}});
    blocks.push_back(v);
  }
  if (std::isinf(p)) {
    rep.value = blocks.empty() ? 0.0 : *std::max_element(blocks.begin(), blocks.end());
  } else {
    double acc_p = 0.0;
    for (double v : blocks) acc_p += std::pow(v, p);
    rep.value = std::pow(acc_p, 1.0 / p);
  }
  return rep;
}

double s_norm(const SpaceTimeField& F, int j) {
  auto fam = enumerate_pairs(F.grid.n, PairVariant::admissible);
  return s_norm_report(accumulate(F, exponents_for({fam})), j, fam).value;
}

double s_plus_norm(const SpaceTimeField& F) {
  auto g = enumerate_pairs(F.grid.n, PairVariant::good_product);
  auto gt = enumerate_pairs(F.grid.n, PairVariant::good_product_time);
  return s_plus_report(accumulate(F, exponents_for({g, gt})), g, gt).value;
}

double bp_norm(const SpaceTimeField& F, double p) {
  F.validate();
  ShellNormAccumulator acc(F.grid, {kInf}, false);
  for (int m = 0; m < F.slices(); ++m) acc.add_slice(F.values[m], {});
  return bp_report(acc, p).value;
}

double besov_norm(const SpaceTimeField& F, double s, double p, double q_t) {
  ShellNormAccumulator acc(F.grid, {p}, false);
  F.validate();
  for (int m = 0; m < F.slices(); ++m) acc.add_slice(F.values[m], {});
  auto ladder = lp::DyadicLadder::for_grid(F.grid);
  double total = 0.0;
  for (int b = 0; b < acc.blocks(); ++b) {
    double v = acc.block_mixed(b, q_t, p, false);
    total += std::pow(2.0, 2.0 * ladder.block_k(b) * s) * v * v;
  }
  return std::sqrt(total);
}

//============================================================================
// Serialization
//============================================================================

namespace {
std::string fmt(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}
nlohmann::json jnum(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}
}  // namespace

std::string to_csv(const NormReport& r) {
  std::ostringstream os;
  os << "norm,k,pair_q,pair_r,block_value,total\n";
  for (const auto& b : r.blocks)
    os << r.name << ',' << b.k << ',' << fmt(b.pair.q) << ',' << fmt(b.pair.r) << ',' << fmt(b.value) << ','
       << fmt(r.value) << '\n';
  return os.str();
}

std::string to_json(const NormReport& r) {
  nlohmann::json j;
  j["norm"] = r.name;
  j["value"] = r.value;
  j["families"] = r.families;
  j["blocks"] = nlohmann::json::array();
  for (const auto& b : r.blocks)
    j["blocks"].push_back({{"k", b.k},
                           {"value", b.value},
                           {"pair", {jnum(b.pair.q), jnum(b.pair.r)}},
                           {"pair_t", {jnum(b.pair_t.q), jnum(b.pair_t.r)}}});
  return j.dump(2);
}

}  // namespace wavemap::norms
