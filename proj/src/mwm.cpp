#include "wavemap/mwm.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>

#include "wavemap/errors.hpp"
#include "wavemap/lp.hpp"
#include "wavemap/norms.hpp"

namespace wavemap::mwm {

namespace {

using Spectra = std::vector<CplxArray>;

std::vector<const CplxArray*> ptrs(const Spectra& s) {
  std::vector<const CplxArray*> p;
  p.reserve(s.size());
  for (const auto& a : s) p.push_back(&a);
  return p;
}

Spectra spectra_of(const std::vector<LieAlgebraField>& fields) {
  Spectra s;
  s.reserve(3 * fields.size());
  for (const auto& f : fields)
    for (int i = 0; i < 3; ++i) s.push_back(f.spectrum(i));
  return s;
}

// Groups of three arrays become fields.
std::vector<LieAlgebraField> fields_of(const Grid& grid, const Spectra& s) {
  std::vector<LieAlgebraField> out;
  out.reserve(s.size() / 3);
  for (std::size_t c = 0; c + 2 < s.size(); c += 3)
    out.push_back(LieAlgebraField::from_spectral(grid, {s[c], s[c + 1], s[c + 2]}));
  return out;
}

std::vector<LieAlgebraField> take_fields(const Grid& grid, Spectra& s) {
  std::vector<LieAlgebraField> out;
  out.reserve(s.size() / 3);
  for (std::size_t c = 0; c + 2 < s.size(); c += 3)
    out.push_back(LieAlgebraField::from_spectral(grid, {std::move(s[c]), std::move(s[c + 1]), std::move(s[c + 2])}));
  return out;
}

OneForm oneform_of(const Grid& grid, const Spectra& s) {
  OneForm a;
  a.e = fields_of(grid, s);
  return a;
}

bool all_zero(const std::vector<LieAlgebraField>& fs) {
  for (const auto& f : fs)
    if (max_abs(f) != 0.0) return false;
  return true;
}

void check_data(const Grid& grid, const PotentialData& d) {
  const int C = wave::potential_channels(grid.n);
  if (static_cast<int>(d.f.size()) != C || static_cast<int>(d.g.size()) != C)
    throw ShapeError("picard_solve: data must carry one field per potential channel");
  for (const auto* set : {&d.f, &d.g})
    for (const auto& x : *set)
      if (x.empty() || !x.grid().same_space(grid)) throw ShapeError("picard_solve: data grid mismatch");
}

}  // namespace

PotentialData data_from_b0(const OneForm& b0) {
  auto h = wave::hodge_initial_data(b0);
  PotentialData d;
  d.f.push_back(h.phi0);
  d.g.push_back(h.phi1);
  for (const auto& x : h.psi0.e) d.f.push_back(x);
  for (const auto& x : h.psi1.e) d.g.push_back(x);
  return d;
}

OneForm random_b0(const Grid& grid, std::uint64_t seed, double amplitude, double radius) {
  std::mt19937_64 rng(seed);
  OneForm b(grid);
  for (auto& f : b.e) {
    f = random_band_limited(grid, rng, radius);
    double m = max_abs(f);
    if (m > 0.0) f = (amplitude / m) * f;
  }
  return b;
}

PotentialData random_potential_data(const Grid& grid, std::uint64_t seed, double amplitude, double radius) {
  return data_from_b0(random_b0(grid, seed, amplitude, radius));
}

PotentialData scaled(const PotentialData& d, double s) {
  PotentialData out;
  for (const auto& x : d.f) out.f.push_back(s * x);
  for (const auto& x : d.g) out.g.push_back(s * x);
  return out;
}

double spectral_sobolev_norm(const std::vector<LieAlgebraField>& fields, double s) {
  if (fields.empty()) return 0.0;
  const Grid& grid = fields.front().grid();
  auto eng = SpectralEngine::get(grid.n, grid.N);
  const double vol = std::pow(grid.L, grid.n);
  const double k = 2.0 * std::numbers::pi / grid.L;
  std::vector<double> w(eng->spec_size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    double a = k * eng->abs_xi(i);
    w[i] = a == 0.0 ? (s == 0.0 ? 1.0 : 0.0) : std::pow(a, 2.0 * s);
  }
  double total = 0.0;
  for (const auto& f : fields)
    for (int c = 0; c < 3; ++c) {
      const auto& sp = f.spectrum(c);
      for (std::size_t i = 0; i < sp.size(); ++i) total += eng->weight(i) * w[i] * std::norm(sp[i]);
    }
  return std::sqrt(total * vol);
}

double data_norm(const PotentialData& d, double s) {
  double a = spectral_sobolev_norm(d.f, s), b = spectral_sobolev_norm(d.g, s - 1.0);
  return std::sqrt(a * a + b * b);
}

//----------------------------------------------------------------------------

PicardResult picard_solve(const Grid& grid, const PotentialData& data, const PicardOptions& opts) {
  grid.validate();
  check_data(grid, data);
  if (opts.max_iter < 1) throw ConfigError("picard_solve: max_iter must be >= 1");
  if (opts.s_index != 0 && opts.s_index != 1) throw ConfigError("picard_solve: s_index must be 0 or 1");
  const int n = grid.n;
  const int C = wave::potential_channels(n);
  const int A = 3 * C;
  const int slices = grid.M + 1;
  auto spec = wave::BilinearSpec::make(opts.preset, n);
  if (spec.channels != C) throw ConfigError("picard_solve: preset must force every potential channel");

  auto eng = SpectralEngine::get(n, grid.N);
  const std::size_t S = eng->spec_size();
  const double vol = std::pow(grid.L, n);
  const auto& omega = wave::omega_table(grid);
  auto ladder = lp::DyadicLadder::for_grid(grid);
  const int blocks = ladder.blocks();

  PicardResult res;
  res.data_norm = data_norm(data, n / 2.0);
  res.within_gate = res.data_norm <= opts.data_gate;

  Spectra f0 = spectra_of(data.f), g0 = spectra_of(data.g);

  // v_0: free wave on the lattice.
  std::vector<Spectra> vs(slices, Spectra(A, CplxArray(S))), ds(slices, Spectra(A, CplxArray(S)));
  for (int m = 0; m < slices; ++m)
    for (int c = 0; c < A; ++c) wave::free_wave_spectrum(grid, f0[c], g0[c], grid.time(m), vs[m][c], ds[m][c]);
  res.iterations = 1;

  auto finish_v = [&]() {
    res.v.grid = grid;
    res.v.channels = C;
    res.v.values.resize(slices);
    res.v.derivs.resize(slices);
    for (int m = 0; m < slices; ++m) {
      res.v.values[m] = take_fields(grid, vs[m]);
      res.v.derivs[m] = take_fields(grid, ds[m]);
    }
  };

  if (all_zero(data.f) && all_zero(data.g)) {
    // v_0 = 0 gives b = a = 0 and zero forcing: already the fixed point.
    res.converged = true;
    res.trace.records.push_back({});
    res.a_linf.assign(slices, 0.0);
    res.b_l2n.assign(slices, 0.0);
    if (opts.store_connection) {
      res.a = SpaceTimeField::zeros(grid, n + 1, opts.track_norms);
      res.b = SpaceTimeField::zeros(grid, n + 1, opts.track_norms);
    }
    finish_v();
    return res;
  }

  auto adm = norms::enumerate_pairs(n, norms::PairVariant::admissible);
  auto good = norms::enumerate_pairs(n, norms::PairVariant::good_product);
  auto good_t = norms::enumerate_pairs(n, norms::PairVariant::good_product_time);
  auto r_diff = norms::exponents_for({adm});
  auto r_track = norms::exponents_for({adm, good, good_t}, {norms::kInf});

  // Forcing of the pass that produced the current v (for d_t^2 v).
  std::vector<Spectra> fprev;
  if (opts.track_norms) fprev.assign(slices, Spectra());

  double prev_diff = -1.0;
  int bad = 0;
  std::vector<double> history;
  Spectra nv(A, CplxArray(S)), nd(A, CplxArray(S)), dv(A, CplxArray(S)), dd(A, CplxArray(S)), F(A, CplxArray(S));
  Spectra v2(A, CplxArray(S));

  while (true) {
    if (res.iterations >= opts.max_iter) {
      finish_v();
      throw NonConvergenceError("picard_solve: max_iter exceeded", history);
    }
    wave::DuhamelStepper stepper(grid, f0, g0);
    norms::ShellNormAccumulator diff_acc(grid, r_diff, true);
    std::optional<norms::ShellNormAccumulator> acc_a, acc_b;
    if (opts.track_norms) {
      acc_a.emplace(grid, r_track, true);
      acc_b.emplace(grid, r_track, true);
    }
    std::vector<std::vector<double>> fblk(blocks, std::vector<double>(slices, 0.0));
    PicardRecord rec;
    rec.j = res.iterations;
    std::vector<double> a_linf(slices), b_l2n(slices);
    SpaceTimeField a_store, b_store;
    if (opts.store_connection) {
      a_store = SpaceTimeField::zeros(grid, n + 1, opts.track_norms);
      b_store = SpaceTimeField::zeros(grid, n + 1, opts.track_norms);
    }

    for (int m = 0; m < slices; ++m) {
      auto bsp = wave::assemble_b_spectra(grid, ptrs(vs[m]), ptrs(ds[m]));
      OneForm b = oneform_of(grid, bsp);
      auto cres = connection::solve_connection(b, opts.connection);
      const OneForm& a = cres.a;
      rec.connection_iterations = std::max(rec.connection_iterations, cres.iterations);

      auto B = wave::bilinear_B(spec, a, b);
      for (int c = 0; c < C; ++c)
        for (int i = 0; i < 3; ++i) {
          const auto& src = B[c].spectrum(i);
          auto& dst = F[3 * c + i];
          for (std::size_t s = 0; s < S; ++s) dst[s] = -src[s];
        }

      // Block L^2 norms of the forcing for the estimate's left side.
      for (int bl = 0; bl < blocks; ++bl) {
        const auto& t = lp::block_table(grid, bl);
        double sum = 0.0;
        for (int c = 0; c < A; ++c)
          for (std::size_t s = 0; s < S; ++s) sum += eng->weight(s) * t[s] * t[s] * std::norm(F[c][s]);
        fblk[bl][m] = std::sqrt(sum * vol);
      }

      a_linf[m] = norms::spatial_norm(a.e, norms::kInf);
      b_l2n[m] = norms::spatial_norm(b.e, 2.0 * n);
      rec.a_norm = std::max(rec.a_norm, norms::spatial_norm(a.e, 2.0));
      rec.b_norm = std::max(rec.b_norm, connection::smallness_proxy(b));

      OneForm adot, bdot;
      if (opts.track_norms) {
        // d_t^2 v = -omega^2 v + forcing of the pass that produced v.
        for (int c = 0; c < A; ++c)
          for (std::size_t s = 0; s < S; ++s)
            v2[c][s] = -omega[s] * omega[s] * vs[m][c][s] + (fprev[m].empty() ? cplx(0.0) : fprev[m][c][s]);
        bdot = oneform_of(grid, wave::assemble_b_spectra(grid, ptrs(ds[m]), ptrs(v2)));
        adot = connection::solve_connection_rate(a, b, bdot, opts.connection);
        acc_a->add_slice(a.e, adot.e);
        acc_b->add_slice(b.e, bdot.e);
        fprev[m] = F;
      }
      if (opts.store_connection) {
        a_store.values[m] = a.e;
        b_store.values[m] = b.e;
        if (opts.track_norms) {
          a_store.derivs[m] = adot.e;
          b_store.derivs[m] = bdot.e;
        }
      }

      stepper.push(ptrs(F));
      for (int c = 0; c < A; ++c) {
        stepper.state(c, nv[c], nd[c]);
        for (std::size_t s = 0; s < S; ++s) {
          dv[c][s] = nv[c][s] - vs[m][c][s];
          dd[c][s] = nd[c][s] - ds[m][c][s];
        }
      }
      diff_acc.add_slice(ptrs(dv), ptrs(dd));
      std::swap(vs[m], nv);
      std::swap(ds[m], nd);
    }
    ++res.iterations;

    rec.diff = norms::s_norm_report(diff_acc, opts.s_index, adm).value;
    rec.ratio = prev_diff > 0.0 ? rec.diff / prev_diff : 0.0;
    double lhs = 0.0;
    for (int bl = 0; bl < blocks; ++bl) {
      double l1 = norms::time_norm(fblk[bl], 1.0, grid.dt());
      lhs += std::pow(2.0, 2.0 * ladder.block_k(bl) * (n / 2.0 - 1.0)) * l1 * l1;
    }
    rec.forcing_lhs = std::sqrt(lhs);
    if (opts.track_norms) {
      rec.a_splus = norms::s_plus_report(*acc_a, good, good_t).value;
      rec.b_s1 = norms::s_norm_report(*acc_b, 1, adm).value;
      double rhs = rec.a_splus * rec.b_s1;
      rec.forcing_constant = rhs > 0.0 ? rec.forcing_lhs / rhs : 0.0;
      res.a_b1 = norms::bp_report(*acc_a, 1.0).value;
    }
    res.trace.records.push_back(rec);
    history.push_back(rec.diff);
    res.a_linf = a_linf;
    res.b_l2n = b_l2n;
    res.a_l1_linf = norms::time_norm(a_linf, 1.0, grid.dt());
    res.b_l2_l2n = norms::time_norm(b_l2n, 2.0, grid.dt());
    if (opts.store_connection) {
      res.a = std::move(a_store);
      res.b = std::move(b_store);
    }

    if (rec.diff < opts.tol) {
      res.converged = true;
      break;
    }
    if (prev_diff > 0.0 && rec.ratio >= 1.0) {
      if (++bad >= 2) {
        finish_v();
        throw DivergenceError("picard_solve: difference ratio " + std::to_string(rec.ratio) + " >= 1 twice",
                              rec.ratio);
      }
    } else {
      bad = 0;
    }
    prev_diff = rec.diff;
  }
  finish_v();
  return res;
}

std::string trace_csv(const PicardTrace& trace) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "j,diff,ratio,a_norm,b_norm,forcing_lhs,a_splus,b_s1,forcing_constant,connection_iterations\n";
  for (const auto& r : trace.records)
    os << r.j << ',' << r.diff << ',' << r.ratio << ',' << r.a_norm << ',' << r.b_norm << ',' << r.forcing_lhs
       << ',' << r.a_splus << ',' << r.b_s1 << ',' << r.forcing_constant << ',' << r.connection_iterations << '\n';
  return os.str();
}

//----------------------------------------------------------------------------

StabilityReport stability_experiment(const Grid& grid, const PotentialData& d1, const PotentialData& d2,
                                     const PicardOptions& opts) {
  auto r1 = picard_solve(grid, d1, opts);
  auto r2 = picard_solve(grid, d2, opts);
  StabilityReport rep;
  rep.iterations1 = r1.iterations;
  rep.iterations2 = r2.iterations;
  for (int m = 0; m < r1.v.slices(); ++m) {
    std::vector<LieAlgebraField> dv, dd;
    for (int c = 0; c < r1.v.channels; ++c) {
      dv.push_back(r1.v.values[m][c] - r2.v.values[m][c]);
      dd.push_back(r1.v.derivs[m][c] - r2.v.derivs[m][c]);
    }
    double e = std::sqrt(std::max(0.0, wave::free_energy(dv, dd)));
    rep.times.push_back(grid.time(m));
    rep.energy.push_back(e);
    rep.max_energy = std::max(rep.max_energy, e);
  }
  rep.a1_l1_linf = r1.a_l1_linf;
  rep.a1_b1 = r1.a_b1;
  rep.b1_l2_l2n = r1.b_l2_l2n;
  rep.b2_l2_l2n = r2.b_l2_l2n;
  return rep;
}

RegularityReport regularity_track(const Grid& grid, const PotentialData& data, const PicardOptions& opts) {
  auto r = picard_solve(grid, data, opts);
  RegularityReport rep;
  rep.iterations = r.iterations;
  const double s = grid.n / 2.0 + 1.0;
  rep.data_norm = data_norm(data, s);
  double sup = 0.0;
  for (int m = 0; m < r.v.slices(); ++m) {
    double h = spectral_sobolev_norm(r.v.values[m], s);
    rep.times.push_back(grid.time(m));
    rep.curve.push_back(h);
    sup = std::max(sup, h);
  }
  rep.ratio = rep.data_norm > 0.0 ? sup / rep.data_norm : 0.0;
  return rep;
}

}  // namespace wavemap::mwm
