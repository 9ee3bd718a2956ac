#include "wavemap/gauge_return.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "wavemap/errors.hpp"
#include "wavemap/lp.hpp"
#include "wavemap/norms.hpp"

namespace wavemap::gauge {

namespace {

using su2::Quat;
using su2::Vec3;
using QuatArray = std::vector<Quat>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Quat scale(const Quat& q, double s) { return {s * q[0], s * q[1], s * q[2], s * q[3]}; }
Quat add(const Quat& a, const Quat& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]}; }

// -c y with c acting as the pure quaternion (0, c/2).
Quat flow(const Vec3& c, const Quat& y) {
  return scale(su2::mul(Quat{0.0, 0.5 * c[0], 0.5 * c[1], 0.5 * c[2]}, y), -1.0);
}

// One RK4 step of dg/ds = -c(s) g over length h.
Quat rk4(const Quat& g, const Vec3& c0, const Vec3& cm, const Vec3& c1, double h) {
  Quat k1 = flow(c0, g);
  Quat k2 = flow(cm, add(g, scale(k1, 0.5 * h)));
  Quat k3 = flow(cm, add(g, scale(k2, 0.5 * h)));
  Quat k4 = flow(c1, add(g, scale(k3, h)));
  Quat s = add(add(k1, scale(k2, 2.0)), add(scale(k3, 2.0), k4));
  return su2::normalized(add(g, scale(s, h / 6.0)));
}

Vec3 at(const std::array<const RealArray*, 3>& f, std::size_t p) { return {(*f[0])[p], (*f[1])[p], (*f[2])[p]}; }

std::array<const RealArray*, 3> comps(const LieAlgebraField& f) {
  return {&f.component(0), &f.component(1), &f.component(2)};
}

// f(x + dx/2 e_axis) on the grid points (trigonometric interpolant; the
// axis Nyquist term vanishes at half-cell points).
LieAlgebraField half_shift(const LieAlgebraField& f, int axis) {
  const Grid& grid = f.grid();
  auto eng = SpectralEngine::get(grid.n, grid.N);
  std::array<CplxArray, 3> c;
  const double h = 0.5 * grid.dx();
  for (int i = 0; i < 3; ++i) {
    c[i] = f.spectrum(i);
    for (std::size_t s = 0; s < c[i].size(); ++s) {
      if (eng->nyquist(s, axis - 1)) {
        c[i][s] = 0.0;
        continue;
      }
      double ph = kTwoPi * eng->xi(s, axis - 1) * h / grid.L;
      c[i][s] *= cplx(std::cos(ph), std::sin(ph));
    }
  }
  return LieAlgebraField::from_spectral(grid, std::move(c));
}

struct Strides {
  int n, N;
  std::vector<std::size_t> stride;
  Strides(int n_, int N_) : n(n_), N(N_), stride(n_) {
    std::size_t s = 1;
    for (int a = n - 1; a >= 0; --a) {
      stride[a] = s;
      s *= N;
    }
  }
  int coord(std::size_t p, int a) const { return static_cast<int>((p / stride[a]) % N); }
  std::size_t next(std::size_t p, int a) const {
    return coord(p, a) == N - 1 ? p - (N - 1) * stride[a] : p + stride[a];
  }
};

// Temporal midpoint of channel 0 between slices m and m+1.
LieAlgebraField time_mid(const SpaceTimeField& c, int m) {
  const auto& v0 = c.values[m][0];
  const auto& v1 = c.values[m + 1][0];
  auto mid = 0.5 * (v0 + v1);
  if (c.has_derivs()) mid = mid + (c.grid.dt() / 8.0) * (c.derivs[m][0] - c.derivs[m + 1][0]);
  return mid;
}

// Spatial edge transports of one slice: edges[a][p] carries p -> p + e_a.
std::vector<QuatArray> spatial_edges(const std::vector<LieAlgebraField>& slice, const Strides& st, double dx) {
  std::size_t P = slice.front().points();
  std::vector<QuatArray> e(st.n, QuatArray(P));
  for (int a = 0; a < st.n; ++a) {
    const auto& f = slice[a + 1];
    auto mid = half_shift(f, a + 1);
    auto cf = comps(f), cm = comps(mid);
    for (std::size_t p = 0; p < P; ++p) e[a][p] = rk4(su2::identity(), at(cf, p), at(cm, p), at(cf, st.next(p, a)), dx);
  }
  return e;
}

void check_connection_series(const SpaceTimeField& c, const char* op) {
  c.validate();
  if (c.channels != c.grid.n + 1) throw ShapeError(std::string(op) + ": expected n+1 channels");
}

OneForm oneform(const std::vector<LieAlgebraField>& e) {
  OneForm a;
  a.e = e;
  return a;
}

double sum_sq(const std::vector<LieAlgebraField>& fs) {
  double s = 0.0;
  for (const auto& f : fs) s += std::pow(l2_norm(f), 2);
  return s;
}

}  // namespace

//----------------------------------------------------------------------------

double spatial_constraint_residual(const OneForm& a, const OneForm& b) {
  int n = a.n();
  double s = 0.0;
  for (int j = 1; j <= n; ++j)
    for (int k = j + 1; k <= n; ++k) {
      auto r = differentiate(a[k], j) - differentiate(a[j], k) + bracket(a[j], a[k]) + bracket(b[j], b[k]);
      s += std::pow(l2_norm(r), 2);
    }
  return std::sqrt(s);
}

ConstraintParts constraint_parts(const OneForm& a, const OneForm& a_rate, const OneForm& b) {
  TwoForm F = connection::curvature_slice(a, a_rate);
  const int n = a.n();
  const double vol = std::pow(a.grid().L, n);
  double full = 0.0, zero = 0.0;
  for (int mu = 0; mu <= n; ++mu)
    for (int nu = mu + 1; nu <= n; ++nu) {
      auto r = F.get(mu, nu) + bracket(b[mu], b[nu]);
      auto m = mean(r);
      full += std::pow(l2_norm(r), 2);
      zero += vol * (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]);
    }
  ConstraintParts p;
  p.full = std::sqrt(full);
  p.zero_mode = std::sqrt(zero);
  p.mean_free = std::sqrt(std::max(0.0, full - zero));
  return p;
}

double constraint_residual(const OneForm& a, const OneForm& a_rate, const OneForm& b) {
  return constraint_parts(a, a_rate, b).full;
}

PreparedGauge prepare_initial_gauge(const GroupField& s0, const LieAlgebraField& v0, const PrepareOptions& opts) {
  const Grid& grid = s0.grid();
  if (!grid.same_space(v0.grid())) throw ShapeError("prepare_initial_gauge: grid mismatch");
  const int n = grid.n;
  std::vector<LieAlgebraField> u{v0};
  for (int j = 1; j <= n; ++j) u.push_back(left_pullback(s0, j));

  PreparedGauge out;
  out.pullback_norm = std::sqrt(sum_sq(u));
  double proxy = norms::sobolev_norm(std::vector<LieAlgebraField>(u.begin() + 1, u.end()), n / 2.0 - 1.0);
  if (opts.gate > 0.0 && proxy > opts.gate)
    throw PreconditionError("prepare_initial_gauge: pullback exceeds the smallness gate", proxy);

  std::vector<LieAlgebraField> half;
  for (int j = 1; j <= n; ++j) half.push_back(0.5 * u[j]);
  auto cres = connection::coulomb_fix_slice(half, opts.coulomb);
  out.coulomb_iterations = cres.iterations;

  // Normalize g(origin) = identity; a constant left factor keeps the gauge.
  Quat c = su2::conj(cres.g.at(0));
  out.g = left_multiply(c, cres.g);
  GroupField cg(grid);
  for (std::size_t p = 0; p < cg.points(); ++p) cg.set(p, c);

  out.b = OneForm(grid);
  out.a = OneForm(grid);
  for (int mu = 0; mu <= n; ++mu) out.b[mu] = 0.5 * adjoint(out.g, u[mu]);
  for (int j = 1; j <= n; ++j) out.a[j] = adjoint(cg, cres.a_tilde[j - 1]);

  // a_0: linear fixed point with the spatial part frozen.
  std::vector<double> history;
  for (int it = 0; it < opts.a0_max_iter; ++it) {
    auto next = connection::connection_map(out.a, out.b)[0];
    double nn = l2_norm(next);
    double upd = nn > 0.0 ? l2_norm(next - out.a[0]) / nn : 0.0;
    history.push_back(upd);
    out.a[0] = next;
    if (upd < opts.a0_tol) break;
    if (it + 1 == opts.a0_max_iter) throw NonConvergenceError("prepare_initial_gauge: a_0 solve", history);
  }

  std::vector<LieAlgebraField> sp(out.a.e.begin() + 1, out.a.e.end());
  out.divergence = l2_norm(connection::divergence(sp));
  out.constraint = spatial_constraint_residual(out.a, out.b);
  return out;
}

//----------------------------------------------------------------------------

FlatResult measure_plaquettes(const SpaceTimeField& c) {
  check_connection_series(c, "measure_plaquettes");
  const Grid& grid = c.grid;
  const int n = grid.n;
  Strides st(n, grid.N);
  const std::size_t P = grid.points();
  FlatResult r;

  std::vector<QuatArray> prev;
  for (int m = 0; m < c.slices(); ++m) {
    auto edges = spatial_edges(c.values[m], st, grid.dx());
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        for (std::size_t p = 0; p < P; ++p) {
          Quat u1 = su2::mul(edges[b][st.next(p, a)], edges[a][p]);
          Quat u2 = su2::mul(edges[a][st.next(p, b)], edges[b][p]);
          r.spatial_plaquette = std::max(r.spatial_plaquette, su2::distance(u1, u2));
        }
    if (m > 0) {
      auto mid = time_mid(c, m - 1);
      auto c0 = comps(c.values[m - 1][0]), c1 = comps(c.values[m][0]), cm = comps(mid);
      QuatArray te(P);
      for (std::size_t p = 0; p < P; ++p) te[p] = rk4(su2::identity(), at(c0, p), at(cm, p), at(c1, p), grid.dt());
      for (int a = 0; a < n; ++a)
        for (std::size_t p = 0; p < P; ++p) {
          Quat u1 = su2::mul(edges[a][p], te[p]);
          Quat u2 = su2::mul(te[st.next(p, a)], prev[a][p]);
          r.temporal_plaquette = std::max(r.temporal_plaquette, su2::distance(u1, u2));
        }
    }
    prev = std::move(edges);
  }
  r.plaquette = std::max(r.spatial_plaquette, r.temporal_plaquette);
  return r;
}

FlatResult integrate_flat(const SpaceTimeField& c, const FlatOptions& opts) {
  FlatResult r = measure_plaquettes(c);
  if (opts.gate > 0.0 && r.plaquette > opts.gate)
    throw PreconditionError("integrate_flat: plaquette residual " + std::to_string(r.plaquette) +
                                " exceeds the flatness gate",
                            r.plaquette);
  const Grid& grid = c.grid;
  const int n = grid.n;
  Strides st(n, grid.N);
  const std::size_t P = grid.points();

  // t = 0: axes in order from the origin.
  QuatArray g(P, su2::identity());
  for (int a = 0; a < n; ++a) {
    const auto& f = c.values[0][a + 1];
    auto mid = half_shift(f, a + 1);
    auto cf = comps(f), cm = comps(mid);
    for (std::size_t p = 0; p < P; ++p) {
      if (st.coord(p, a) == 0) continue;
      bool on_path = true;
      for (int b = a + 1; b < n; ++b) on_path = on_path && st.coord(p, b) == 0;
      if (!on_path) continue;
      std::size_t q = p - st.stride[a];
      g[p] = rk4(g[q], at(cf, q), at(cm, q), at(cf, p), grid.dx());
    }
  }

  auto to_field = [&](const QuatArray& q) {
    std::array<RealArray, 4> arr{RealArray(P), RealArray(P), RealArray(P), RealArray(P)};
    for (std::size_t p = 0; p < P; ++p)
      for (int i = 0; i < 4; ++i) arr[i][p] = q[p][i];
    return GroupField::from_arrays(grid, std::move(arr));
  };
  r.g.push_back(to_field(g));
  for (int m = 0; m + 1 < c.slices(); ++m) {
    auto mid = time_mid(c, m);
    auto c0 = comps(c.values[m][0]), c1 = comps(c.values[m + 1][0]), cm = comps(mid);
    for (std::size_t p = 0; p < P; ++p) g[p] = rk4(g[p], at(c0, p), at(cm, p), at(c1, p), grid.dt());
    r.g.push_back(to_field(g));
  }
  return r;
}

//----------------------------------------------------------------------------

const char* composition_name(Composition c) {
  switch (c) {
    case Composition::plus_minus: return "g+ g-";
    case Composition::plus_inv_minus: return "g+ (g-)^-1";
    case Composition::inv_minus_plus: return "(g-)^-1 g+";
    case Composition::inv_plus_minus: return "(g+)^-1 g-";
    case Composition::minus_inv_plus: return "g- (g+)^-1";
    case Composition::inv_minus_inv_plus: return "(g-)^-1 (g+)^-1";
  }
  return "?";
}

Quat compose(Composition c, const Quat& plus, const Quat& minus) {
  using su2::conj;
  using su2::mul;
  switch (c) {
    case Composition::plus_minus: return mul(plus, minus);
    case Composition::plus_inv_minus: return mul(plus, conj(minus));
    case Composition::inv_minus_plus: return mul(conj(minus), plus);
    case Composition::inv_plus_minus: return mul(conj(plus), minus);
    case Composition::minus_inv_plus: return mul(minus, conj(plus));
    case Composition::inv_minus_inv_plus: return mul(conj(minus), conj(plus));
  }
  return su2::identity();
}

std::vector<Composition> calibrate_composition(double tol) {
  Grid grid;
  grid.n = 2;
  grid.N = 4;
  grid.M = 128;
  grid.T = 1.0;
  const Vec3 half{0.5, 0.0, 0.0};
  auto plus = SpaceTimeField::zeros(grid, 3, true), minus = SpaceTimeField::zeros(grid, 3, true);
  for (int m = 0; m <= grid.M; ++m) {
    plus.values[m][0] = LieAlgebraField::constant(grid, half);
    minus.values[m][0] = LieAlgebraField::constant(grid, {-0.5, 0.0, 0.0});
  }
  auto gp = integrate_flat(plus).g, gm = integrate_flat(minus).g;
  std::vector<Composition> out;
  for (auto c : {Composition::plus_minus, Composition::plus_inv_minus, Composition::inv_minus_plus,
                 Composition::inv_plus_minus, Composition::minus_inv_plus, Composition::inv_minus_inv_plus}) {
    double err = 0.0;
    for (int m = 0; m <= grid.M; ++m) {
      Quat want = su2::exp({grid.time(m), 0.0, 0.0});
      for (std::size_t p = 0; p < grid.points(); ++p)
        err = std::max(err, su2::distance(compose(c, gp[m].at(p), gm[m].at(p)), want));
    }
    if (err <= tol) out.push_back(c);
  }
  return out;
}

Reconstruction reconstruct_map(const SpaceTimeField& a, const SpaceTimeField& b, const Quat& anchor,
                               const FlatOptions& opts) {
  static std::once_flag once;
  static bool calibrated = false;
  std::call_once(once, [] {
    auto ok = calibrate_composition();
    calibrated = std::find(ok.begin(), ok.end(), kComposition) != ok.end();
  });
  if (!calibrated) throw ReconstructionError("reconstruct_map: calibrated composition fails the geodesic oracle");

  check_connection_series(a, "reconstruct_map");
  check_connection_series(b, "reconstruct_map");
  if (!a.grid.same_space(b.grid) || !a.grid.same_time(b.grid)) throw ShapeError("reconstruct_map: grid mismatch");
  const bool derivs = a.has_derivs() && b.has_derivs();
  auto plus = SpaceTimeField::zeros(a.grid, a.channels, derivs), minus = plus;
  for (int m = 0; m < a.slices(); ++m)
    for (int c = 0; c < a.channels; ++c) {
      plus.values[m][c] = a.values[m][c] + b.values[m][c];
      minus.values[m][c] = a.values[m][c] - b.values[m][c];
      if (derivs) {
        plus.derivs[m][c] = a.derivs[m][c] + b.derivs[m][c];
        minus.derivs[m][c] = a.derivs[m][c] - b.derivs[m][c];
      }
    }
  auto fp = integrate_flat(plus, opts);
  auto fm = integrate_flat(minus, opts);
  Reconstruction r;
  r.plaquette_plus = fp.plaquette;
  r.plaquette_minus = fm.plaquette;
  for (int m = 0; m < a.slices(); ++m) {
    GroupField s(a.grid);
    for (std::size_t p = 0; p < s.points(); ++p)
      s.set(p, su2::normalized(su2::mul(anchor, compose(kComposition, fp.g[m].at(p), fm.g[m].at(p)))));
    r.s.push_back(std::move(s));
  }
  return r;
}

//----------------------------------------------------------------------------

double sigma_energy(const GroupField& s, const LieAlgebraField& w) {
  double e = std::pow(l2_norm(w), 2);
  for (int j = 1; j <= s.grid().n; ++j) e += std::pow(l2_norm(left_pullback(s, j)), 2);
  return e;
}

DirectResult direct_integrate(const GroupField& s0, const LieAlgebraField& v0, const Grid& grid, int substeps) {
  grid.validate();
  if (!grid.same_space(s0.grid()) || !grid.same_space(v0.grid())) throw ShapeError("direct_integrate: grid mismatch");
  if (substeps < 1) throw ConfigError("direct_integrate: substeps must be >= 1");
  const double dt = grid.dt() / substeps;
  if (dt > 0.5 * grid.dx() * (1.0 + 1e-12))
    throw ConfigError("direct_integrate: time step violates dt <= dx/2");

  auto eng = SpectralEngine::get(grid.n, grid.N);
  std::vector<double> mask(eng->spec_size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = eng->abs_xi(i) <= grid.N / 2.0 ? 1.0 : 0.0;
  auto rhs = [&](const GroupField& s) {
    LieAlgebraField r(grid);
    for (int j = 1; j <= grid.n; ++j) r = r + differentiate(left_pullback(s, j), j);
    return apply_multiplier(r, mask);
  };

  // Energy with the leapfrog kinetic term <w_{k-1/2}, w_{k+1/2}>, which the
  // scheme conserves exactly for linear data.
  auto energy = [&](const GroupField& s, const LieAlgebraField& w_lo, const LieAlgebraField& w_hi) {
    double kin = 0.25 * (std::pow(l2_norm(w_lo + w_hi), 2) - std::pow(l2_norm(w_lo - w_hi), 2));
    return sigma_energy(s, LieAlgebraField(grid)) + kin;
  };

  DirectResult out;
  GroupField s = s0;
  auto r0 = rhs(s0);
  LieAlgebraField w = axpy(v0, 0.5 * dt, r0);
  out.s.push_back(s0);
  out.energy.push_back(energy(s0, axpy(v0, -0.5 * dt, r0), w));
  for (int m = 1; m <= grid.M; ++m) {
    LieAlgebraField w_prev;
    for (int k = 0; k < substeps; ++k) {
      s = group_mul(s, group_exp(dt * w));
      w_prev = w;
      w = axpy(w, dt, rhs(s));
    }
    out.s.push_back(s);
    out.energy.push_back(energy(s, w_prev, w));
  }
  return out;
}

//----------------------------------------------------------------------------

void round_trip_data(const RoundTripConfig& cfg, GroupField& s0, LieAlgebraField& v0) {
  std::mt19937_64 rng(cfg.seed);
  auto phi = random_band_limited(cfg.grid, rng, cfg.radius);
  double m = max_abs(phi);
  if (m > 0.0) phi = (cfg.amplitude / m) * phi;
  v0 = random_band_limited(cfg.grid, rng, cfg.radius);
  m = max_abs(v0);
  if (m > 0.0) v0 = (cfg.amplitude / m) * v0;
  s0 = group_exp(phi);
}

RoundTripResult round_trip(const RoundTripConfig& cfg) {
  cfg.grid.validate();
  GroupField s0;
  LieAlgebraField v0;
  round_trip_data(cfg, s0, v0);

  RoundTripResult res;
  auto prep = prepare_initial_gauge(s0, v0, cfg.prepare);
  res.prepare_divergence = prep.divergence;
  res.prepare_constraint = prep.constraint;

  auto popt = cfg.picard;
  popt.store_connection = true;
  popt.track_norms = true;
  auto pr = mwm::picard_solve(cfg.grid, mwm::data_from_b0(prep.b), popt);
  res.picard_iterations = pr.iterations;
  pr.v = SpaceTimeField{};

  for (int m = 0; m < pr.a.slices(); ++m) {
    auto p = constraint_parts(oneform(pr.a.values[m]), oneform(pr.a.derivs[m]), oneform(pr.b.values[m]));
    res.constraint.push_back(p.mean_free);
    res.constraint_zero_mode.push_back(p.zero_mode);
    res.constraint_full.push_back(p.full);
  }
  auto growth = [](const std::vector<double>& c) {
    double c0 = c.front(), cmax = *std::max_element(c.begin(), c.end());
    return c0 > 0.0 ? cmax / c0 : (cmax > 0.0 ? INFINITY : 1.0);
  };
  res.constraint_growth = growth(res.constraint);
  res.constraint_full_growth = growth(res.constraint_full);

  auto rec = reconstruct_map(pr.a, pr.b, s0.at(0), cfg.flat);
  res.plaquette_plus = rec.plaquette_plus;
  res.plaquette_minus = rec.plaquette_minus;
  pr.a = SpaceTimeField{};
  pr.b = SpaceTimeField{};

  auto direct = direct_integrate(s0, v0, cfg.grid, cfg.direct_substeps);
  for (std::size_t m = 0; m < rec.s.size(); ++m) {
    double e = sup_distance(rec.s[m], direct.s[m]);
    res.error.push_back(e);
    res.sup_error = std::max(res.sup_error, e);
    res.unit_defect = std::max(res.unit_defect, rec.s[m].max_unit_defect());
  }
  for (double e : direct.energy)
    res.energy_drift = std::max(res.energy_drift, std::abs(e - direct.energy.front()) / direct.energy.front());
  return res;
}

}  // namespace wavemap::gauge
