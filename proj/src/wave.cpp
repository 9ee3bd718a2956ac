#include "wavemap/wave.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "wavemap/errors.hpp"
#include "wavemap/lp.hpp"
#include "wavemap/norms.hpp"

namespace wavemap::wave {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

const std::vector<double>& omega_table(const Grid& grid) {
  static std::map<std::tuple<int, int, double>, std::vector<double>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(grid.n, grid.N, grid.L);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto eng = SpectralEngine::get(grid.n, grid.N);
  std::vector<double> w(eng->spec_size());
  for (std::size_t s = 0; s < w.size(); ++s) w[s] = kTwoPi * eng->abs_xi(s) / grid.L;
  return cache.emplace(key, std::move(w)).first->second;
}

void free_wave_spectrum(const Grid& grid, const CplxArray& f0, const CplxArray& g0, double t, CplxArray& value,
                        CplxArray& deriv) {
  const auto& w = omega_table(grid);
  value.resize(f0.size());
  deriv.resize(f0.size());
  for (std::size_t s = 0; s < f0.size(); ++s) {
    if (w[s] == 0.0) {
      value[s] = f0[s] + t * g0[s];
      deriv[s] = g0[s];
      continue;
    }
    const double c = std::cos(w[s] * t), sn = std::sin(w[s] * t);
    value[s] = c * f0[s] + (sn / w[s]) * g0[s];
    deriv[s] = -w[s] * sn * f0[s] + c * g0[s];
  }
}

std::pair<LieAlgebraField, LieAlgebraField> free_wave(const LieAlgebraField& f0, const LieAlgebraField& g0,
                                                      double t) {
  require_same_grid(f0, g0, "free_wave");
  std::array<CplxArray, 3> v, d;
  for (int i = 0; i < 3; ++i) free_wave_spectrum(f0.grid(), f0.spectrum(i), g0.spectrum(i), t, v[i], d[i]);
  return {LieAlgebraField::from_spectral(f0.grid(), std::move(v)),
          LieAlgebraField::from_spectral(f0.grid(), std::move(d))};
}

//============================================================================
// DuhamelStepper
//============================================================================

DuhamelStepper::DuhamelStepper(const Grid& grid, std::vector<CplxArray> f0, std::vector<CplxArray> g0)
    : grid_(grid), f0_(std::move(f0)), g0_(std::move(g0)) {
  if (f0_.size() != g0_.size()) throw ShapeError("duhamel: initial value/rate count mismatch");
  const std::size_t S = grid.spectral_points();
  for (std::size_t a = 0; a < f0_.size(); ++a)
    if (f0_[a].size() != S || g0_[a].size() != S) throw ShapeError("duhamel: spectrum size mismatch");
  C_.assign(f0_.size(), CplxArray(S, 0.0));
  S_.assign(f0_.size(), CplxArray(S, 0.0));
  prev_.assign(f0_.size(), CplxArray());
  have_prev_.assign(f0_.size(), 0);
}

void DuhamelStepper::push_zero() { push(std::vector<const CplxArray*>(f0_.size(), nullptr)); }

void DuhamelStepper::push(const std::vector<const CplxArray*>& forcing) {
  if (forcing.size() != f0_.size()) throw ShapeError("duhamel: forcing count mismatch");
  if (next_ > grid_.M) throw ContractError("duhamel: time lattice exhausted");
  const auto& w = omega_table(grid_);
  const std::size_t S = w.size();
  const double t = grid_.time(next_);
  const double tp = next_ > 0 ? grid_.time(next_ - 1) : 0.0;
  const double h = 0.5 * grid_.dt();
  // phases at the previous and current lattice times, shared by all arrays
  cos_prev_.swap(cos_t_);
  sin_prev_.swap(sin_t_);
  cos_t_.resize(S);
  sin_t_.resize(S);
  for (std::size_t s = 0; s < S; ++s) {
    cos_t_[s] = std::cos(w[s] * t);
    sin_t_[s] = std::sin(w[s] * t);
  }
  for (std::size_t a = 0; a < f0_.size(); ++a) {
    const CplxArray* F = forcing[a];
    if (F && F->size() != S) throw ShapeError("duhamel: forcing spectrum size mismatch");
    if (next_ > 0 && (F || have_prev_[a])) {
      auto& C = C_[a];
      auto& Sn = S_[a];
      const CplxArray* P = have_prev_[a] ? &prev_[a] : nullptr;
      for (std::size_t s = 0; s < S; ++s) {
        const cplx fp = P ? (*P)[s] : cplx(0.0);
        const cplx fc = F ? (*F)[s] : cplx(0.0);
        if (w[s] == 0.0) {
          // zero mode: C holds int F, S holds int s F
          C[s] += h * (fp + fc);
          Sn[s] += h * (tp * fp + t * fc);
        } else {
          C[s] += h * (cos_prev_[s] * fp + cos_t_[s] * fc);
          Sn[s] += h * (sin_prev_[s] * fp + sin_t_[s] * fc);
        }
      }
    }
    if (F) {
      prev_[a] = *F;
      have_prev_[a] = 1;
    } else {
      have_prev_[a] = 0;
    }
  }
  t_ = t;
  ++next_;
}

void DuhamelStepper::state(int array, CplxArray& value, CplxArray& deriv) const {
  if (next_ == 0) throw ContractError("duhamel: no slice pushed yet");
  const auto& w = omega_table(grid_);
  const auto& f = f0_.at(array);
  const auto& g = g0_.at(array);
  const auto& C = C_[array];
  const auto& Sn = S_[array];
  const double t = t_;
  value.resize(f.size());
  deriv.resize(f.size());
  for (std::size_t s = 0; s < f.size(); ++s) {
    if (w[s] == 0.0) {
      value[s] = f[s] + t * g[s] + t * C[s] - Sn[s];
      deriv[s] = g[s] + C[s];
      continue;
    }
    const double c = cos_t_[s], sn = sin_t_[s];
    value[s] = c * f[s] + (sn / w[s]) * g[s] + (sn * C[s] - c * Sn[s]) / w[s];
    deriv[s] = -w[s] * sn * f[s] + c * g[s] + c * C[s] + sn * Sn[s];
  }
}

SpaceTimeField duhamel_solve(const std::vector<LieAlgebraField>& f0, const std::vector<LieAlgebraField>& g0,
                             const SpaceTimeField& forcing) {
  forcing.validate();
  if (static_cast<int>(f0.size()) != forcing.channels || g0.size() != f0.size())
    throw ShapeError("duhamel_solve: channel count mismatch");
  const Grid& grid = forcing.grid;
  std::vector<CplxArray> fs, gs;
  for (std::size_t c = 0; c < f0.size(); ++c) {
    require_same_grid(f0[c], forcing.values[0][0], "duhamel_solve");
    require_same_grid(g0[c], forcing.values[0][0], "duhamel_solve");
    for (int i = 0; i < 3; ++i) {
      fs.push_back(f0[c].spectrum(i));
      gs.push_back(g0[c].spectrum(i));
    }
  }
  DuhamelStepper stepper(grid, std::move(fs), std::move(gs));
  SpaceTimeField out;
  out.grid = grid;
  out.channels = forcing.channels;
  for (int m = 0; m <= grid.M; ++m) {
    std::vector<const CplxArray*> F;
    for (const auto& f : forcing.values[m])
      for (int i = 0; i < 3; ++i) F.push_back(&f.spectrum(i));
    stepper.push(F);
    std::vector<LieAlgebraField> vs, ds;
    for (int c = 0; c < forcing.channels; ++c) {
      std::array<CplxArray, 3> v, d;
      for (int i = 0; i < 3; ++i) stepper.state(c * 3 + i, v[i], d[i]);
      vs.push_back(LieAlgebraField::from_spectral(grid, std::move(v)));
      ds.push_back(LieAlgebraField::from_spectral(grid, std::move(d)));
    }
    out.values.push_back(std::move(vs));
    out.derivs.push_back(std::move(ds));
  }
  return out;
}

SpaceTimeField duhamel_solve(const LieAlgebraField& f0, const LieAlgebraField& g0, const SpaceTimeField& forcing) {
  return duhamel_solve(std::vector<LieAlgebraField>{f0}, std::vector<LieAlgebraField>{g0}, forcing);
}

SpaceTimeField free_solve(const std::vector<LieAlgebraField>& f0, const std::vector<LieAlgebraField>& g0,
                          const Grid& grid) {
  if (f0.size() != g0.size() || f0.empty()) throw ShapeError("free_solve: channel count mismatch");
  SpaceTimeField out;
  out.grid = grid;
  out.channels = static_cast<int>(f0.size());
  for (int m = 0; m <= grid.M; ++m) {
    std::vector<LieAlgebraField> vs, ds;
    for (std::size_t c = 0; c < f0.size(); ++c) {
      auto [v, d] = free_wave(f0[c], g0[c], grid.time(m));
      vs.push_back(v);
      ds.push_back(d);
    }
    out.values.push_back(std::move(vs));
    out.derivs.push_back(std::move(ds));
  }
  return out;
}

double wave_residual(const SpaceTimeField& v, const SpaceTimeField& forcing) {
  if (!v.has_derivs()) throw ContractError("wave_residual: derivative channel required");
  if (v.channels != forcing.channels || v.slices() != forcing.slices())
    throw ShapeError("wave_residual: shape mismatch");
  const double dt = v.grid.dt();
  double total = 0.0;
  for (int m = 1; m + 1 < v.slices(); ++m) {
    std::vector<LieAlgebraField> r;
    for (int c = 0; c < v.channels; ++c) {
      auto dtt = (0.5 / dt) * (v.derivs[m + 1][c] - v.derivs[m - 1][c]);
      r.push_back(dtt - lp::laplacian(v.values[m][c]) - forcing.values[m][c]);
    }
    total += dt * norms::spatial_norm(r, 2.0);
  }
  return total;
}

double free_energy(const std::vector<LieAlgebraField>& value, const std::vector<LieAlgebraField>& deriv) {
  if (value.size() != deriv.size()) throw ShapeError("free_energy: channel count mismatch");
  if (value.empty()) return 0.0;
  const Grid& g = value.front().grid();
  const auto& eng = value.front().engine();
  const auto& w = omega_table(g);
  double e = 0.0;
  for (std::size_t c = 0; c < value.size(); ++c) {
    require_same_grid(value[c], deriv[c], "free_energy");
    for (int i = 0; i < 3; ++i) {
      const auto& v = value[c].spectrum(i);
      const auto& d = deriv[c].spectrum(i);
      for (std::size_t s = 0; s < v.size(); ++s) e += eng.weight(s) * (w[s] * w[s] * std::norm(v[s]) + std::norm(d[s]));
    }
  }
  return e * std::pow(g.L, g.n);
}

//============================================================================
// Hodge potentials
//============================================================================

int potential_channels(int n) { return 1 + TwoForm::count(n); }

HodgeData hodge_initial_data(const OneForm& b0) {
  const Grid& grid = b0.grid();
  const int n = b0.n();
  HodgeData h;
  h.phi0 = LieAlgebraField(grid);
  h.phi1 = b0[0];
  h.psi0 = TwoForm(grid);
  h.psi1 = TwoForm(grid);
  for (int j = 1; j <= n; ++j) h.psi1.set(0, j, b0[j]);
  return h;
}

std::vector<CplxArray> assemble_b_spectra(const Grid& grid, const std::vector<const CplxArray*>& value,
                                          const std::vector<const CplxArray*>& rate) {
  const int n = grid.n;
  const int C = potential_channels(n);
  if (static_cast<int>(value.size()) != 3 * C || static_cast<int>(rate.size()) != 3 * C)
    throw ContractError("assemble_b: potential value and rate channels required");
  auto eng = SpectralEngine::get(grid.n, grid.N);
  const std::size_t S = eng->spec_size();
  std::vector<CplxArray> b((n + 1) * 3, CplxArray(S, 0.0));
  const double k = kTwoPi / grid.L;
  // Psi_{mu nu} (signed) component i at slot s
  auto psi = [&](int mu, int nu, int i, std::size_t s) -> cplx {
    if (mu == nu) return 0.0;
    if (mu < nu) return (*value[3 * (1 + TwoForm::slot(n, mu, nu)) + i])[s];
    return -(*value[3 * (1 + TwoForm::slot(n, nu, mu)) + i])[s];
  };
  std::vector<cplx> ik(n);
  for (std::size_t s = 0; s < S; ++s) {
    for (int a = 0; a < n; ++a) ik[a] = eng->nyquist(s, a) ? cplx(0.0) : cplx(0.0, k * eng->xi(s, a));
    for (int i = 0; i < 3; ++i) {
      cplx b0 = (*rate[i])[s];
      for (int j = 1; j <= n; ++j) b0 -= ik[j - 1] * psi(j, 0, i, s);
      b[i][s] = b0;
      for (int j = 1; j <= n; ++j) {
        cplx bj = ik[j - 1] * (*value[i])[s] + (*rate[3 * (1 + TwoForm::slot(n, 0, j)) + i])[s];
        for (int kk = 1; kk <= n; ++kk) bj -= ik[kk - 1] * psi(kk, j, i, s);
        b[3 * j + i][s] = bj;
      }
    }
  }
  return b;
}

SpaceTimeField assemble_b(const SpaceTimeField& phi, const SpaceTimeField& psi) {
  if (!phi.has_derivs() || !psi.has_derivs()) throw ContractError("assemble_b: derivative channels required");
  const int n = phi.grid.n;
  if (phi.channels != 1 || psi.channels != TwoForm::count(n)) throw ShapeError("assemble_b: channel layout");
  if (phi.slices() != psi.slices()) throw ShapeError("assemble_b: time lattices differ");
  SpaceTimeField b;
  b.grid = phi.grid;
  b.channels = n + 1;
  for (int m = 0; m < phi.slices(); ++m) {
    std::vector<const CplxArray*> v, r;
    auto add = [&](const LieAlgebraField& val, const LieAlgebraField& rt) {
      for (int i = 0; i < 3; ++i) {
        v.push_back(&val.spectrum(i));
        r.push_back(&rt.spectrum(i));
      }
    };
    add(phi.values[m][0], phi.derivs[m][0]);
    for (int c = 0; c < psi.channels; ++c) add(psi.values[m][c], psi.derivs[m][c]);
    auto spec = assemble_b_spectra(phi.grid, v, r);
    std::vector<LieAlgebraField> slice;
    for (int mu = 0; mu <= n; ++mu)
      slice.push_back(LieAlgebraField::from_spectral(
          phi.grid, {std::move(spec[3 * mu]), std::move(spec[3 * mu + 1]), std::move(spec[3 * mu + 2])}));
    b.values.push_back(std::move(slice));
  }
  return b;
}

//============================================================================
// Bilinear forms
//============================================================================

BilinearSpec BilinearSpec::make(const std::string& preset, int n) {
  BilinearSpec s;
  s.preset = preset;
  auto add_phi = [&](int out) {
    s.terms.push_back({out, 0, 0, 1.0, Product::bracket});
    for (int j = 1; j <= n; ++j) s.terms.push_back({out, j, j, -1.0, Product::bracket});
  };
  auto add_psi = [&](int offset) {
    for (int mu = 0; mu <= n; ++mu)
      for (int nu = mu + 1; nu <= n; ++nu) {
        int out = offset + TwoForm::slot(n, mu, nu);
        s.terms.push_back({out, mu, nu, 1.0, Product::bracket});
        s.terms.push_back({out, nu, mu, -1.0, Product::bracket});
      }
  };
  if (preset == "mwm_phi") {
    s.channels = 1;
    add_phi(0);
  } else if (preset == "mwm_psi") {
    s.channels = TwoForm::count(n);
    add_psi(0);
  } else if (preset == "mwm") {
    s.channels = potential_channels(n);
    add_phi(0);
    add_psi(1);
  } else if (preset == "generic") {
    throw ConfigError("bilinear preset 'generic' needs explicit terms");
  } else {
    throw ConfigError("unknown bilinear preset '" + preset + "'");
  }
  return s;
}

BilinearSpec BilinearSpec::generic(int channels, std::vector<BilinearTerm> terms) {
  if (channels < 1) throw ConfigError("generic bilinear form needs at least one output channel");
  for (const auto& t : terms)
    if (t.out < 0 || t.out >= channels) throw ConfigError("generic bilinear term targets a missing channel");
  BilinearSpec s;
  s.preset = "generic";
  s.channels = channels;
  s.terms = std::move(terms);
  return s;
}

std::vector<LieAlgebraField> bilinear_B(const BilinearSpec& spec, const OneForm& a, const OneForm& b) {
  if (a.e.size() != b.e.size()) throw ShapeError("bilinear_B: one-form ranks differ");
  const Grid& grid = a.grid();
  std::vector<LieAlgebraField> out(spec.channels, LieAlgebraField(grid));
  for (const auto& t : spec.terms) {
    if (t.a_index >= static_cast<int>(a.e.size()) || t.b_index >= static_cast<int>(b.e.size()))
      throw ShapeError("bilinear_B: term index exceeds one-form rank");
    LieAlgebraField p = t.product == Product::bracket ? bracket(a[t.a_index], b[t.b_index])
                                                      : scalar_product(a[t.a_index], b[t.b_index]);
    out[t.out] = axpy(out[t.out], t.coeff, p);
  }
  return out;
}

}  // namespace wavemap::wave
