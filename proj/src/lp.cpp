#include "wavemap/lp.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "wavemap/errors.hpp"

namespace wavemap::lp {

double low_pass(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  double u = (4.0 - r * r) / 3.0;
  return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}

double shell_profile(double r) { return low_pass(r) - low_pass(2.0 * r); }

DyadicLadder DyadicLadder::for_grid(const Grid& grid) {
  DyadicLadder d;
  d.k_min = 0;
  d.k_max = grid.k_max();
  d.base = 1.0;
  return d;
}

namespace {

enum class Kind { low, shell, inv_grad, inv_lap };

const std::vector<double>& table(const Grid& grid, Kind kind, int k) {
  static std::map<std::tuple<int, int, int, int, double>, std::vector<double>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(grid.n, grid.N, static_cast<int>(kind), k, kind == Kind::inv_lap ? grid.L : 1.0);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto eng = SpectralEngine::get(grid.n, grid.N);
  std::vector<double> t(eng->spec_size());
  const double scale = std::ldexp(1.0, -k);
  for (std::size_t s = 0; s < t.size(); ++s) {
    double r = eng->abs_xi(s);
    switch (kind) {
      case Kind::low: t[s] = low_pass(scale * r); break;
      case Kind::shell: t[s] = shell_profile(scale * r); break;
      case Kind::inv_grad: t[s] = r > 0.0 ? 1.0 / r : 0.0; break;
      case Kind::inv_lap: {
        double w = 2.0 * std::numbers::pi / grid.L;
        t[s] = r > 0.0 ? -1.0 / (w * w * eng->norm2(s)) : 0.0;
        break;
      }
    }
  }
  return cache.emplace(key, std::move(t)).first->second;
}

}  // namespace

const std::vector<double>& low_table(const Grid& grid, int k) { return table(grid, Kind::low, k); }
const std::vector<double>& shell_table(const Grid& grid, int k) { return table(grid, Kind::shell, k); }

const std::vector<double>& block_table(const Grid& grid, int b) {
  auto ladder = DyadicLadder::for_grid(grid);
  if (b < 0 || b >= ladder.blocks()) throw DomainError("block index outside the dyadic ladder");
  return b == 0 ? low_table(grid, ladder.k_min) : shell_table(grid, ladder.block_k(b));
}

const std::vector<double>& inverse_gradient_table(const Grid& grid) { return table(grid, Kind::inv_grad, 0); }
const std::vector<double>& inverse_laplacian_table(const Grid& grid) { return table(grid, Kind::inv_lap, 0); }

void multiply(CplxArray& c, const std::vector<double>& t) {
  if (c.size() != t.size()) throw ShapeError("multiplier: table size mismatch");
  for (std::size_t s = 0; s < c.size(); ++s) c[s] *= t[s];
}

LieAlgebraField project_low(const LieAlgebraField& f, int k) { return apply_multiplier(f, low_table(f.grid(), k)); }

LieAlgebraField project_shell(const LieAlgebraField& f, int k) {
  return apply_multiplier(f, shell_table(f.grid(), k));
}

LieAlgebraField lumped_low(const LieAlgebraField& f) {
  return project_low(f, DyadicLadder::for_grid(f.grid()).k_min);
}

LieAlgebraField inverse_gradient(const LieAlgebraField& f) {
  return apply_multiplier(f, inverse_gradient_table(f.grid()));
}

LieAlgebraField inverse_laplacian(const LieAlgebraField& f) {
  return apply_multiplier(f, inverse_laplacian_table(f.grid()));
}

LieAlgebraField laplacian(const LieAlgebraField& f) {
  const auto& eng = f.engine();
  std::vector<double> t(eng.spec_size());
  const double w = 2.0 * std::numbers::pi / f.grid().L;
  for (std::size_t s = 0; s < t.size(); ++s) t[s] = -w * w * eng.norm2(s);
  return apply_multiplier(f, t);
}

LieAlgebraField riesz(const LieAlgebraField& f, int axis) {
  const auto& eng = f.engine();
  if (axis < 1 || axis > eng.n()) throw DomainError("riesz: axis out of range");
  std::array<CplxArray, 3> out;
  for (int i = 0; i < 3; ++i) {
    const auto& c = f.spectrum(i);
    out[i].resize(c.size());
    for (std::size_t s = 0; s < c.size(); ++s) {
      int xi = eng.xi(s, axis - 1);
      double r = eng.abs_xi(s);
      out[i][s] = (r == 0.0 || eng.nyquist(s, axis - 1)) ? cplx(0.0) : c[s] * cplx(0.0, xi / r);
    }
  }
  return LieAlgebraField::from_spectral(f.grid(), std::move(out));
}

RealArray shell_kernel(const Grid& grid, int k) {
  auto eng = SpectralEngine::get(grid.n, grid.N);
  const auto& t = shell_table(grid, k);
  CplxArray c(t.begin(), t.end());
  // Q_k f = K * f on the torus, K(x) = L^{-n} sum_xi psi(2^-k |xi|) e^{2 pi i x.xi / L};
  // backward() is the unnormalized synthesis sum.
  RealArray K = eng->backward(c);
  const double inv_vol = 1.0 / std::pow(grid.L, grid.n);
  for (auto& v : K) v *= inv_vol;
  return K;
}

double shell_kernel_norm(const Grid& grid, int k, double p) {
  if (!(p >= 1.0)) throw DomainError("kernel norm exponent must be >= 1");
  RealArray K = shell_kernel(grid, k);
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : K) m = std::max(m, std::abs(v));
    return m;
  }
  double acc = 0.0;
  for (double v : K) acc += std::pow(std::abs(v), p);
  return std::pow(acc * grid.cell_volume(), 1.0 / p);
}

}  // namespace wavemap::lp
