#include "wavemap/connection.hpp"

#include <cmath>
#include <numbers>

#include "wavemap/errors.hpp"
#include "wavemap/lp.hpp"
#include "wavemap/norms.hpp"

namespace wavemap::connection {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_full_oneform(const OneForm& a, const char* op) {
  if (a.e.size() < 2) throw ShapeError(std::string(op) + ": one-form needs n+1 components");
  for (const auto& f : a.e) {
    if (f.empty()) throw ShapeError(std::string(op) + ": empty component");
    require_same_grid(a.e.front(), f, op);
  }
}

// Brackets W_kj for spatial k and j = 0..n. Only (k,0) and spatial k < j are
// stored; W_jk = -W_kj.
struct PairTable {
  int n = 0;
  std::vector<LieAlgebraField> w;

  explicit PairTable(int n_) : n(n_) { w.resize(n + n * (n - 1) / 2); }
  int id(int k, int j) const {  // k < j spatial
    return n + (k - 1) * n - (k - 1) * k / 2 + (j - k - 1);
  }
  // Returns the stored index and sign for W_kj (k spatial, j != k).
  std::pair<int, double> lookup(int k, int j) const {
    if (j == 0) return {k - 1, 1.0};
    if (k < j) return {id(k, j), 1.0};
    return {id(j, k), -1.0};
  }
};

// [x_k, y_j] + [y_k, x_j] style symmetric bracket tables.
PairTable bracket_table(const OneForm& x, const OneForm& y, bool symmetrize) {
  int n = x.n();
  PairTable t(n);
  auto term = [&](int k, int j) {
    auto f = bracket(x[k], y[j]);
    if (symmetrize) f = f + bracket(y[k], x[j]);
    return f;
  };
  for (int k = 1; k <= n; ++k) t.w[k - 1] = term(k, 0);
  for (int k = 1; k <= n; ++k)
    for (int j = k + 1; j <= n; ++j) t.w[t.id(k, j)] = term(k, j);
  return t;
}

PairTable add(const PairTable& a, const PairTable& b) {
  PairTable t(a.n);
  for (std::size_t i = 0; i < a.w.size(); ++i) t.w[i] = a.w[i] + b.w[i];
  return t;
}

// -sum_k d_k Delta^{-1} W_kj = sum_k i xi_k L / (2 pi |xi|^2) W_kj, with the
// Nyquist plane of axis k zeroed.
OneForm contract(const Grid& grid, const PairTable& t) {
  auto eng = SpectralEngine::get(grid.n, grid.N);
  int n = grid.n;
  std::size_t S = eng->spec_size();
  OneForm out;
  out.e.resize(n + 1);
  for (int j = 0; j <= n; ++j) {
    std::array<CplxArray, 3> c{CplxArray(S), CplxArray(S), CplxArray(S)};
    for (int k = 1; k <= n; ++k) {
      if (k == j) continue;
      auto [id, sign] = t.lookup(k, j);
      const auto& w = t.w[id];
      for (int comp = 0; comp < 3; ++comp) {
        const auto& ws = w.spectrum(comp);
        auto& cc = c[comp];
        for (std::size_t s = 0; s < S; ++s) {
          long nn = eng->norm2(s);
          if (nn == 0 || eng->nyquist(s, k - 1)) continue;
          double m = sign * eng->xi(s, k - 1) * grid.L / (kTwoPi * static_cast<double>(nn));
          cc[s] += cplx(0.0, m) * ws[s];
        }
      }
    }
    out.e[j] = LieAlgebraField::from_spectral(grid, std::move(c));
  }
  return out;
}

// || Delta a_j + sum_k d_k W_kj ||_2 over j and components.
double elliptic_residual(const Grid& grid, const OneForm& a, const PairTable& t) {
  auto eng = SpectralEngine::get(grid.n, grid.N);
  int n = grid.n;
  std::size_t S = eng->spec_size();
  double vol = std::pow(grid.L, n);
  double total = 0.0;
  CplxArray r(S);
  for (int j = 0; j <= n; ++j) {
    for (int comp = 0; comp < 3; ++comp) {
      const auto& as = a[j].spectrum(comp);
      for (std::size_t s = 0; s < S; ++s)
        r[s] = -(kTwoPi * kTwoPi / (grid.L * grid.L)) * static_cast<double>(eng->norm2(s)) * as[s];
      for (int k = 1; k <= n; ++k) {
        if (k == j) continue;
        auto [id, sign] = t.lookup(k, j);
        const auto& ws = t.w[id].spectrum(comp);
        for (std::size_t s = 0; s < S; ++s) {
          if (eng->nyquist(s, k - 1)) continue;
          r[s] += cplx(0.0, sign * kTwoPi * eng->xi(s, k - 1) / grid.L) * ws[s];
        }
      }
      total += spectral_l2_squared(*eng, r, vol);
    }
  }
  return std::sqrt(total);
}

double oneform_l2(const OneForm& a) {
  double s = 0.0;
  for (const auto& f : a.e) {
    double v = l2_norm(f);
    s += v * v;
  }
  return std::sqrt(s);
}

double spatial_divergence_norm(const OneForm& a) {
  std::vector<LieAlgebraField> sp(a.e.begin() + 1, a.e.end());
  return l2_norm(divergence(sp));
}

bool zero_oneform(const OneForm& a) {
  for (const auto& f : a.e)
    if (max_abs(f) != 0.0) return false;
  return true;
}

constexpr double kRoundoff = 1e-14;

}  // namespace

//----------------------------------------------------------------------------

TwoForm curvature_slice(const OneForm& a, const OneForm& a_rate) {
  require_full_oneform(a, "curvature");
  if (a_rate.e.size() != a.e.size()) throw ContractError("curvature: time-derivative channels missing");
  int n = a.n();
  TwoForm F(a.grid());
  for (int mu = 0; mu <= n; ++mu) {
    for (int nu = mu + 1; nu <= n; ++nu) {
      LieAlgebraField dmu = mu == 0 ? a_rate[nu] : differentiate(a[nu], mu);
      LieAlgebraField dnu = differentiate(a[mu], nu);
      F.set(mu, nu, dmu - dnu + bracket(a[mu], a[nu]));
    }
  }
  return F;
}

std::vector<TwoForm> curvature(const SpaceTimeField& a) {
  a.validate();
  if (a.channels < 2) throw ShapeError("curvature: expected n+1 channels");
  if (a.channels != a.grid.n + 1) throw ShapeError("curvature: channel count must be n+1");
  if (!a.has_derivs()) throw ContractError("curvature: time-derivative channels missing");
  std::vector<TwoForm> out;
  out.reserve(a.slices());
  for (int m = 0; m < a.slices(); ++m) {
    OneForm A, R;
    A.e = a.values[m];
    R.e = a.derivs[m];
    out.push_back(curvature_slice(A, R));
  }
  return out;
}

std::vector<LieAlgebraField> spatial_curvature(const std::vector<LieAlgebraField>& a) {
  if (a.empty()) throw ShapeError("spatial_curvature: empty connection");
  int n = a.front().grid().n;
  if (static_cast<int>(a.size()) != n) throw ShapeError("spatial_curvature: expected n components");
  std::vector<LieAlgebraField> out;
  for (int j = 1; j <= n; ++j)
    for (int k = j + 1; k <= n; ++k)
      out.push_back(differentiate(a[k - 1], j) - differentiate(a[j - 1], k) + bracket(a[j - 1], a[k - 1]));
  return out;
}

double smallness_proxy(const OneForm& b) {
  return norms::sobolev_norm(b.e, b.grid().n / 2.0 - 1.0);
}

OneForm connection_map(const OneForm& a, const OneForm& b) {
  require_full_oneform(a, "connection_map");
  require_full_oneform(b, "connection_map");
  if (a.n() != b.n()) throw ShapeError("connection_map: component count mismatch");
  auto t = add(bracket_table(a, a, false), bracket_table(b, b, false));
  return contract(b.grid(), t);
}

ConnectionResult solve_connection(const OneForm& b, const ConnectionOptions& opts) {
  require_full_oneform(b, "solve_connection");
  const Grid& grid = b.grid();
  if (b.n() != grid.n) throw ShapeError("solve_connection: expected n+1 components");
  if (opts.max_iter < 1) throw ConfigError("solve_connection: max_iter must be >= 1");

  ConnectionResult res;
  res.gate_value = smallness_proxy(b);
  if (opts.gate > 0.0 && res.gate_value > opts.gate)
    throw PreconditionError("solve_connection: smallness gate violated (proxy " + std::to_string(res.gate_value) +
                                " > " + std::to_string(opts.gate) + ")",
                            res.gate_value);

  PairTable wb = bracket_table(b, b, false);
  // Source scale ||sum_k d_k [b_k, b_j]||_2.
  OneForm zero(grid);
  double source = elliptic_residual(grid, zero, wb);

  OneForm a = contract(grid, wb);
  if (source == 0.0) {
    res.a = a;
    return res;
  }

  double prev_update = -1.0;
  int bad = 0;
  std::vector<double> history;
  for (int it = 0; it < opts.max_iter; ++it) {
    PairTable w = add(bracket_table(a, a, false), wb);
    OneForm next = contract(grid, w);
    double resid = elliptic_residual(grid, a, w);
    double nn = oneform_l2(next);
    double update = nn > 0.0 ? oneform_l2(next - a) / nn : 0.0;

    IterationRecord rec;
    rec.iter = it;
    rec.update = update;
    rec.residual = resid / source;
    rec.ratio = prev_update > 0.0 ? update / prev_update : 0.0;
    res.trace.push_back(rec);
    history.push_back(update);
    if (opts.record_iterates) res.iterates.push_back(a);
    if (it > 0 && update > kRoundoff) res.contraction = std::max(res.contraction, rec.ratio);

    if (update < opts.tol && rec.residual < opts.tol) {
      res.a = a;
      res.iterations = it;
      res.residual = resid;
      res.relative_residual = rec.residual;
      res.divergence = spatial_divergence_norm(a);
      return res;
    }
    if (prev_update > 0.0 && update > kRoundoff && rec.ratio >= 1.0) {
      if (++bad >= 3) throw DivergenceError("solve_connection: iteration not contracting (ratio " +
                                                std::to_string(rec.ratio) + ")",
                                            rec.ratio);
    } else {
      bad = 0;
    }
    prev_update = update;
    a = next;
  }
  throw NonConvergenceError("solve_connection: max_iter exceeded", history);
}

OneForm solve_connection_rate(const OneForm& a, const OneForm& b, const OneForm& b_rate,
                              const ConnectionOptions& opts) {
  require_full_oneform(a, "solve_connection_rate");
  require_full_oneform(b, "solve_connection_rate");
  require_full_oneform(b_rate, "solve_connection_rate");
  const Grid& grid = b.grid();
  PairTable src = bracket_table(b_rate, b, true);
  OneForm r = contract(grid, src);
  if (zero_oneform(r) && zero_oneform(a)) return r;
  std::vector<double> history;
  for (int it = 0; it < opts.max_iter; ++it) {
    OneForm next = contract(grid, add(bracket_table(r, a, true), src));
    double nn = oneform_l2(next);
    double update = nn > 0.0 ? oneform_l2(next - r) / nn : 0.0;
    history.push_back(update);
    r = next;
    if (update < std::max(opts.tol, kRoundoff)) return r;
  }
  throw NonConvergenceError("solve_connection_rate: max_iter exceeded", history);
}

//----------------------------------------------------------------------------

std::vector<LieAlgebraField> gauge_transform(const GroupField& g, const std::vector<LieAlgebraField>& a) {
  std::vector<LieAlgebraField> out;
  out.reserve(a.size());
  for (std::size_t j = 0; j < a.size(); ++j)
    out.push_back(adjoint(g, a[j]) - right_derivative(g, static_cast<int>(j) + 1));
  return out;
}

LieAlgebraField divergence(const std::vector<LieAlgebraField>& a) {
  if (a.empty()) throw ShapeError("divergence: empty connection");
  LieAlgebraField d = differentiate(a[0], 1);
  for (std::size_t j = 1; j < a.size(); ++j) d = d + differentiate(a[j], static_cast<int>(j) + 1);
  return d;
}

CoulombResult coulomb_fix_slice(const std::vector<LieAlgebraField>& a, const CoulombOptions& opts) {
  if (a.empty()) throw ShapeError("coulomb_fix_slice: empty connection");
  const Grid& grid = a.front().grid();
  if (static_cast<int>(a.size()) != grid.n) throw ShapeError("coulomb_fix_slice: expected n spatial components");
  for (const auto& f : a) require_same_grid(a.front(), f, "coulomb_fix_slice");

  CoulombResult res;
  double p = grid.n / 2.0;
  res.curvature_norm = norms::spatial_norm(spatial_curvature(a), p);
  if (opts.gate > 0.0 && res.curvature_norm > opts.gate)
    throw PreconditionError("coulomb_fix_slice: curvature gate violated (" + std::to_string(res.curvature_norm) +
                                " > " + std::to_string(opts.gate) + ")",
                            res.curvature_norm);

  res.g = GroupField(grid);
  res.a_tilde = a;
  LieAlgebraField div = divergence(a);
  res.divergence = l2_norm(div);
  res.history.push_back(res.divergence);
  while (res.divergence >= opts.tol) {
    if (res.iterations >= opts.max_iter)
      throw NonConvergenceError("coulomb_fix_slice: max_iter exceeded", res.history);
    // exp(-u) with u = -Delta^{-1} div
    res.g = group_mul(group_exp(lp::inverse_laplacian(div)), res.g);
    res.a_tilde = gauge_transform(res.g, a);
    div = divergence(res.a_tilde);
    res.divergence = l2_norm(div);
    res.history.push_back(res.divergence);
    ++res.iterations;
  }

  std::vector<LieAlgebraField> grad;
  for (int j = 0; j < grid.n; ++j)
    for (int k = 1; k <= grid.n; ++k) grad.push_back(differentiate(res.a_tilde[j], k));
  res.gradient_norm = norms::spatial_norm(grad, p);
  res.ratio = res.curvature_norm > 0.0 ? res.gradient_norm / res.curvature_norm : std::nan("");
  return res;
}

}  // namespace wavemap::connection
