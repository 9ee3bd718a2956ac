#include "wavemap/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wavemap/errors.hpp"

namespace wavemap {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::shared_ptr<SpectralEngine> engine_for(const Grid& g) { return SpectralEngine::get(g.n, g.N); }
}  // namespace

//============================================================================
// LieAlgebraField
//============================================================================

LieAlgebraField::LieAlgebraField(const Grid& grid) : grid_(grid) {
  if (!is_power_of_two(grid.N)) throw ConfigError("field grid: N must be a power of two");
  engine_ = engine_for(grid);
  store_ = std::make_shared<Store>();
  std::array<RealArray, 3> z;
  for (auto& c : z) c.assign(grid.points(), 0.0);
  store_->phys = std::move(z);
}

LieAlgebraField LieAlgebraField::from_physical(const Grid& grid, std::array<RealArray, 3> comps) {
  LieAlgebraField f(grid);
  for (const auto& c : comps)
    if (c.size() != grid.points()) throw ShapeError("from_physical: component size mismatch");
  f.store_->phys = std::move(comps);
  return f;
}

LieAlgebraField LieAlgebraField::from_spectral(const Grid& grid, std::array<CplxArray, 3> coeffs) {
  LieAlgebraField f(grid);
  for (const auto& c : coeffs)
    if (c.size() != grid.spectral_points()) throw ShapeError("from_spectral: coefficient size mismatch");
  f.store_->phys.reset();
  f.store_->spec = std::move(coeffs);
  return f;
}

LieAlgebraField LieAlgebraField::constant(const Grid& grid, const su2::Vec3& c) {
  LieAlgebraField f(grid);
  for (int i = 0; i < 3; ++i) std::fill(f.store_->phys->at(i).begin(), f.store_->phys->at(i).end(), c[i]);
  return f;
}

LieAlgebraField LieAlgebraField::sample(const Grid& grid,
                                        const std::function<su2::Vec3(const std::vector<double>&)>& fn) {
  LieAlgebraField f(grid);
  auto& ph = *f.store_->phys;
  std::vector<int> idx(grid.n, 0);
  std::vector<double> x(grid.n, 0.0);
  const double h = grid.dx();
  for (std::size_t p = 0; p < grid.points(); ++p) {
    for (int a = 0; a < grid.n; ++a) x[a] = idx[a] * h;
    su2::Vec3 v = fn(x);
    for (int i = 0; i < 3; ++i) ph[i][p] = v[i];
    for (int a = grid.n - 1; a >= 0; --a) {
      if (++idx[a] < grid.N) break;
      idx[a] = 0;
    }
  }
  return f;
}

bool LieAlgebraField::has_physical() const {
  std::lock_guard<std::mutex> lock(store_->mu);
  return store_->phys.has_value();
}

bool LieAlgebraField::has_spectral() const {
  std::lock_guard<std::mutex> lock(store_->mu);
  return store_->spec.has_value();
}

void LieAlgebraField::ensure_physical() const {
  std::lock_guard<std::mutex> lock(store_->mu);
  if (store_->phys) return;
  std::array<RealArray, 3> ph;
  for (int i = 0; i < 3; ++i) ph[i] = engine_->backward((*store_->spec)[i]);
  store_->phys = std::move(ph);
}

void LieAlgebraField::ensure_spectral() const {
  std::lock_guard<std::mutex> lock(store_->mu);
  if (store_->spec) return;
  std::array<CplxArray, 3> sp;
  for (int i = 0; i < 3; ++i) sp[i] = engine_->forward((*store_->phys)[i]);
  store_->spec = std::move(sp);
}

const RealArray& LieAlgebraField::component(int i) const {
  ensure_physical();
  return store_->phys->at(i);
}

const CplxArray& LieAlgebraField::spectrum(int i) const {
  ensure_spectral();
  return store_->spec->at(i);
}

su2::Vec3 LieAlgebraField::at(std::size_t p) const {
  ensure_physical();
  const auto& ph = *store_->phys;
  return {ph[0][p], ph[1][p], ph[2][p]};
}

void LieAlgebraField::detach() {
  if (store_.use_count() == 1) return;
  auto fresh = std::make_shared<Store>();
  {
    std::lock_guard<std::mutex> lock(store_->mu);
    fresh->phys = store_->phys;
    fresh->spec = store_->spec;
  }
  store_ = std::move(fresh);
}

RealArray& LieAlgebraField::mutable_component(int i) {
  ensure_physical();
  detach();
  store_->spec.reset();
  return store_->phys->at(i);
}

CplxArray& LieAlgebraField::mutable_spectrum(int i) {
  ensure_spectral();
  detach();
  store_->phys.reset();
  return store_->spec->at(i);
}

LieAlgebraField spectral_transform(const LieAlgebraField& f, Direction dir) {
  if (!is_power_of_two(f.grid().N)) throw ConfigError("spectral_transform: N must be a power of two");
  if (dir == Direction::forward) {
    std::array<CplxArray, 3> c{f.spectrum(0), f.spectrum(1), f.spectrum(2)};
    return LieAlgebraField::from_spectral(f.grid(), std::move(c));
  }
  std::array<RealArray, 3> r{f.component(0), f.component(1), f.component(2)};
  return LieAlgebraField::from_physical(f.grid(), std::move(r));
}

cplx spectral_coefficient(const LieAlgebraField& f, int comp, const std::vector<int>& xi) {
  bool conj = false;
  std::size_t s = f.engine().index_of(xi, &conj);
  cplx c = f.spectrum(comp)[s];
  return conj ? std::conj(c) : c;
}

//============================================================================
// Arithmetic
//============================================================================

void require_same_grid(const LieAlgebraField& a, const LieAlgebraField& b, const char* op) {
  if (a.empty() || b.empty()) throw ShapeError(std::string(op) + ": empty field");
  if (!a.grid().same_space(b.grid())) throw ShapeError(std::string(op) + ": grid mismatch");
}

namespace {

template <class Op>
LieAlgebraField combine(const LieAlgebraField& a, const LieAlgebraField& b, Op op, const char* name) {
  require_same_grid(a, b, name);
  if (a.has_spectral() && b.has_spectral() && !(a.has_physical() && b.has_physical())) {
    std::array<CplxArray, 3> out;
    for (int i = 0; i < 3; ++i) {
      const auto& x = a.spectrum(i);
      const auto& y = b.spectrum(i);
      out[i].resize(x.size());
      for (std::size_t s = 0; s < x.size(); ++s) out[i][s] = op(x[s], y[s]);
    }
    return LieAlgebraField::from_spectral(a.grid(), std::move(out));
  }
  std::array<RealArray, 3> out;
  for (int i = 0; i < 3; ++i) {
    const auto& x = a.component(i);
    const auto& y = b.component(i);
    out[i].resize(x.size());
    for (std::size_t p = 0; p < x.size(); ++p) out[i][p] = op(x[p], y[p]);
  }
  return LieAlgebraField::from_physical(a.grid(), std::move(out));
}

}  // namespace

LieAlgebraField operator+(const LieAlgebraField& a, const LieAlgebraField& b) {
  return combine(a, b, [](auto x, auto y) { return x + y; }, "add");
}

LieAlgebraField operator-(const LieAlgebraField& a, const LieAlgebraField& b) {
  return combine(a, b, [](auto x, auto y) { return x - y; }, "subtract");
}

LieAlgebraField operator-(const LieAlgebraField& a) { return -1.0 * a; }

LieAlgebraField axpy(const LieAlgebraField& a, double s, const LieAlgebraField& b) {
  return combine(a, b, [s](auto x, auto y) { return x + s * y; }, "axpy");
}

LieAlgebraField operator*(double s, const LieAlgebraField& a) {
  if (a.has_spectral() && !a.has_physical()) {
    std::array<CplxArray, 3> out;
    for (int i = 0; i < 3; ++i) {
      out[i] = a.spectrum(i);
      for (auto& v : out[i]) v *= s;
    }
    return LieAlgebraField::from_spectral(a.grid(), std::move(out));
  }
  std::array<RealArray, 3> out;
  for (int i = 0; i < 3; ++i) {
    out[i] = a.component(i);
    for (auto& v : out[i]) v *= s;
  }
  return LieAlgebraField::from_physical(a.grid(), std::move(out));
}

LieAlgebraField bracket(const LieAlgebraField& x, const LieAlgebraField& y) {
  require_same_grid(x, y, "bracket");
  const auto &x0 = x.component(0), &x1 = x.component(1), &x2 = x.component(2);
  const auto &y0 = y.component(0), &y1 = y.component(1), &y2 = y.component(2);
  const std::size_t P = x0.size();
  std::array<RealArray, 3> out{RealArray(P), RealArray(P), RealArray(P)};
  for (std::size_t p = 0; p < P; ++p) {
    out[0][p] = x1[p] * y2[p] - x2[p] * y1[p];
    out[1][p] = x2[p] * y0[p] - x0[p] * y2[p];
    out[2][p] = x0[p] * y1[p] - x1[p] * y0[p];
  }
  return LieAlgebraField::from_physical(x.grid(), std::move(out));
}

LieAlgebraField scalar_product(const LieAlgebraField& x, const LieAlgebraField& y) {
  require_same_grid(x, y, "scalar_product");
  std::array<RealArray, 3> out;
  for (int i = 0; i < 3; ++i) {
    const auto& a = x.component(i);
    const auto& b = y.component(i);
    out[i].resize(a.size());
    for (std::size_t p = 0; p < a.size(); ++p) out[i][p] = a[p] * b[p];
  }
  return LieAlgebraField::from_physical(x.grid(), std::move(out));
}

LieAlgebraField weight_by(const RealArray& w, const LieAlgebraField& x) {
  if (w.size() != x.points()) throw ShapeError("weight_by: size mismatch");
  std::array<RealArray, 3> out;
  for (int i = 0; i < 3; ++i) {
    out[i] = x.component(i);
    for (std::size_t p = 0; p < w.size(); ++p) out[i][p] *= w[p];
  }
  return LieAlgebraField::from_physical(x.grid(), std::move(out));
}

CplxArray differentiate_spectrum(const SpectralEngine& eng, const CplxArray& c, int axis, double L) {
  if (axis < 1 || axis > eng.n()) throw DomainError("differentiate: axis out of range");
  const int a = axis - 1;
  CplxArray out(c.size());
  const double k = kTwoPi / L;
  for (std::size_t s = 0; s < c.size(); ++s) {
    int xi = eng.xi(s, a);
    out[s] = (xi == -eng.N() / 2) ? cplx(0.0, 0.0) : c[s] * cplx(0.0, k * xi);
  }
  return out;
}

LieAlgebraField differentiate(const LieAlgebraField& f, int axis) {
  std::array<CplxArray, 3> out;
  for (int i = 0; i < 3; ++i) out[i] = differentiate_spectrum(f.engine(), f.spectrum(i), axis, f.grid().L);
  return LieAlgebraField::from_spectral(f.grid(), std::move(out));
}

LieAlgebraField apply_multiplier(const LieAlgebraField& f, const std::vector<double>& mult) {
  if (mult.size() != f.grid().spectral_points()) throw ShapeError("apply_multiplier: table size mismatch");
  std::array<CplxArray, 3> out;
  for (int i = 0; i < 3; ++i) {
    const auto& c = f.spectrum(i);
    out[i].resize(c.size());
    for (std::size_t s = 0; s < c.size(); ++s) out[i][s] = c[s] * mult[s];
  }
  return LieAlgebraField::from_spectral(f.grid(), std::move(out));
}

RealArray pointwise_norm(const LieAlgebraField& f) {
  const auto &x0 = f.component(0), &x1 = f.component(1), &x2 = f.component(2);
  RealArray out(x0.size());
  for (std::size_t p = 0; p < x0.size(); ++p) out[p] = std::sqrt(x0[p] * x0[p] + x1[p] * x1[p] + x2[p] * x2[p]);
  return out;
}

double l2_norm(const LieAlgebraField& f) { return lr_norm(f, 2.0); }

double max_abs(const LieAlgebraField& f) {
  return lr_norm(f, std::numeric_limits<double>::infinity());
}

double lr_norm(const LieAlgebraField& f, double r) {
  if (!(r >= 1.0)) throw DomainError("lr_norm: exponent must be >= 1");
  RealArray a = pointwise_norm(f);
  if (std::isinf(r)) return a.empty() ? 0.0 : *std::max_element(a.begin(), a.end());
  double acc = 0.0;
  for (double v : a) acc += std::pow(v, r);
  return std::pow(acc * f.grid().cell_volume(), 1.0 / r);
}

su2::Vec3 mean(const LieAlgebraField& f) {
  su2::Vec3 m{};
  for (int i = 0; i < 3; ++i) {
    const auto& c = f.component(i);
    double acc = 0.0;
    for (double v : c) acc += v;
    m[i] = acc / static_cast<double>(c.size());
  }
  return m;
}

//============================================================================
// Forms
//============================================================================

OneForm::OneForm(const Grid& grid) : e(grid.n + 1, LieAlgebraField(grid)) {}

OneForm operator+(const OneForm& a, const OneForm& b) {
  if (a.e.size() != b.e.size()) throw ShapeError("one-form add: rank mismatch");
  OneForm r;
  for (std::size_t m = 0; m < a.e.size(); ++m) r.e.push_back(a.e[m] + b.e[m]);
  return r;
}

OneForm operator-(const OneForm& a, const OneForm& b) {
  if (a.e.size() != b.e.size()) throw ShapeError("one-form subtract: rank mismatch");
  OneForm r;
  for (std::size_t m = 0; m < a.e.size(); ++m) r.e.push_back(a.e[m] - b.e[m]);
  return r;
}

OneForm operator*(double s, const OneForm& a) {
  OneForm r;
  for (const auto& f : a.e) r.e.push_back(s * f);
  return r;
}

TwoForm::TwoForm(const Grid& grid) : n(grid.n), e(count(grid.n), LieAlgebraField(grid)) {}

int TwoForm::slot(int n, int mu, int nu) {
  if (!(0 <= mu && mu < nu && nu <= n)) throw DomainError("two-form slot requires mu < nu");
  // rows before mu contribute (n - r) entries each
  return mu * n - mu * (mu - 1) / 2 + (nu - mu - 1);
}

LieAlgebraField TwoForm::get(int mu, int nu) const {
  if (mu == nu) return LieAlgebraField(grid());
  if (mu < nu) return e.at(slot(n, mu, nu));
  return -e.at(slot(n, nu, mu));
}

void TwoForm::set(int mu, int nu, const LieAlgebraField& f) {
  if (mu == nu) throw DomainError("two-form diagonal is identically zero");
  if (mu < nu)
    e.at(slot(n, mu, nu)) = f;
  else
    e.at(slot(n, nu, mu)) = -f;
}

//============================================================================
// Group fields
//============================================================================

GroupField::GroupField(const Grid& grid) : grid_(grid) {
  for (auto& c : q_) c.assign(grid.points(), 0.0);
  std::fill(q_[0].begin(), q_[0].end(), 1.0);
}

GroupField GroupField::from_arrays(const Grid& grid, std::array<RealArray, 4> q) {
  for (const auto& c : q)
    if (c.size() != grid.points()) throw ShapeError("group field: component size mismatch");
  GroupField g;
  g.grid_ = grid;
  g.q_ = std::move(q);
  g.renormalize();
  return g;
}

void GroupField::renormalize() {
  for (std::size_t p = 0; p < points(); ++p) set(p, su2::normalized(at(p)));
}

double GroupField::max_unit_defect() const {
  double worst = 0.0;
  for (std::size_t p = 0; p < points(); ++p) {
    auto q = at(p);
    double s = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

GroupField group_exp(const LieAlgebraField& x) {
  GroupField g(x.grid());
  for (std::size_t p = 0; p < x.points(); ++p) g.set(p, su2::exp(x.at(p)));
  return g;
}

GroupField group_mul(const GroupField& g, const GroupField& h) {
  if (!g.grid().same_space(h.grid())) throw ShapeError("group_mul: grid mismatch");
  GroupField r(g.grid());
  for (std::size_t p = 0; p < g.points(); ++p) r.set(p, su2::normalized(su2::mul(g.at(p), h.at(p))));
  return r;
}

GroupField group_inv(const GroupField& g) {
  GroupField r(g.grid());
  for (std::size_t p = 0; p < g.points(); ++p) r.set(p, su2::conj(g.at(p)));
  return r;
}

GroupField right_multiply(const GroupField& g, const su2::Quat& c) {
  GroupField r(g.grid());
  for (std::size_t p = 0; p < g.points(); ++p) r.set(p, su2::normalized(su2::mul(g.at(p), c)));
  return r;
}

GroupField left_multiply(const su2::Quat& c, const GroupField& g) {
  GroupField r(g.grid());
  for (std::size_t p = 0; p < g.points(); ++p) r.set(p, su2::normalized(su2::mul(c, g.at(p))));
  return r;
}

LieAlgebraField adjoint(const GroupField& g, const LieAlgebraField& x) {
  if (!g.grid().same_space(x.grid())) throw ShapeError("adjoint: grid mismatch");
  std::array<RealArray, 3> out{RealArray(x.points()), RealArray(x.points()), RealArray(x.points())};
  for (std::size_t p = 0; p < x.points(); ++p) {
    su2::Vec3 v = su2::adjoint(g.at(p), x.at(p));
    for (int i = 0; i < 3; ++i) out[i][p] = v[i];
  }
  return LieAlgebraField::from_physical(x.grid(), std::move(out));
}

namespace {

std::array<RealArray, 4> quaternion_derivative(const GroupField& s, int axis) {
  auto eng = engine_for(s.grid());
  std::array<RealArray, 4> d;
  for (int i = 0; i < 4; ++i) {
    CplxArray c = eng->forward(s.component(i));
    d[i] = eng->backward(differentiate_spectrum(*eng, c, axis, s.grid().L));
  }
  return d;
}

}  // namespace

LieAlgebraField left_pullback(const GroupField& s, int axis) {
  auto d = quaternion_derivative(s, axis);
  std::array<RealArray, 3> out{RealArray(s.points()), RealArray(s.points()), RealArray(s.points())};
  for (std::size_t p = 0; p < s.points(); ++p) {
    su2::Quat dq{d[0][p], d[1][p], d[2][p], d[3][p]};
    su2::Vec3 v = su2::algebra_part(su2::mul(su2::conj(s.at(p)), dq));
    for (int i = 0; i < 3; ++i) out[i][p] = v[i];
  }
  return LieAlgebraField::from_physical(s.grid(), std::move(out));
}

LieAlgebraField right_derivative(const GroupField& g, int axis) {
  auto d = quaternion_derivative(g, axis);
  std::array<RealArray, 3> out{RealArray(g.points()), RealArray(g.points()), RealArray(g.points())};
  for (std::size_t p = 0; p < g.points(); ++p) {
    su2::Quat dq{d[0][p], d[1][p], d[2][p], d[3][p]};
    su2::Vec3 v = su2::algebra_part(su2::mul(dq, su2::conj(g.at(p))));
    for (int i = 0; i < 3; ++i) out[i][p] = v[i];
  }
  return LieAlgebraField::from_physical(g.grid(), std::move(out));
}

double sup_distance(const GroupField& g, const GroupField& h) {
  if (!g.grid().same_space(h.grid())) throw ShapeError("sup_distance: grid mismatch");
  double worst = 0.0;
  for (std::size_t p = 0; p < g.points(); ++p) worst = std::max(worst, su2::distance(g.at(p), h.at(p)));
  return worst;
}

//============================================================================
// Space-time series
//============================================================================

SpaceTimeField SpaceTimeField::zeros(const Grid& grid, int channels, bool with_derivs) {
  SpaceTimeField f;
  f.grid = grid;
  f.channels = channels;
  LieAlgebraField z(grid);
  f.values.assign(grid.M + 1, std::vector<LieAlgebraField>(channels, z));
  if (with_derivs) f.derivs = f.values;
  return f;
}

void SpaceTimeField::validate() const {
  if (static_cast<int>(values.size()) != grid.M + 1) throw ShapeError("space-time field: slice count must be M+1");
  auto check = [this](const std::vector<std::vector<LieAlgebraField>>& s) {
    for (const auto& slice : s) {
      if (static_cast<int>(slice.size()) != channels) throw ShapeError("space-time field: channel count mismatch");
      for (const auto& f : slice)
        if (f.empty() || !f.grid().same_space(grid)) throw ShapeError("space-time field: grid mismatch");
    }
  };
  check(values);
  if (has_derivs()) {
    if (derivs.size() != values.size()) throw ShapeError("space-time field: derivative slice count mismatch");
    check(derivs);
  }
}

//============================================================================
// Random fields
//============================================================================

LieAlgebraField random_band_limited(const Grid& grid, std::mt19937_64& rng, double radius) {
  auto eng = engine_for(grid);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::array<CplxArray, 3> c;
  for (int i = 0; i < 3; ++i) {
    RealArray noise(grid.points());
    for (auto& v : noise) v = gauss(rng);
    c[i] = eng->forward(noise);
    for (std::size_t s = 0; s < c[i].size(); ++s)
      if (eng->abs_xi(s) > radius || eng->any_nyquist(s)) c[i][s] = 0.0;
  }
  return LieAlgebraField::from_spectral(grid, std::move(c));
}

}  // namespace wavemap
