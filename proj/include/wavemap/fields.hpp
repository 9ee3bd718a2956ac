#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <vector>

#include "wavemap/spectral.hpp"
#include "wavemap/su2.hpp"

namespace wavemap {

// su(2)-valued field on the periodic grid, held in physical space, spectral
// space, or both. Copies share storage; mutation detaches first, and the
// missing representation is filled lazily (the fill is guarded, so shared
// copies may be read concurrently).
class LieAlgebraField {
 public:
  LieAlgebraField() = default;
  explicit LieAlgebraField(const Grid& grid);  // zero field

  static LieAlgebraField from_physical(const Grid& grid, std::array<RealArray, 3> comps);
  static LieAlgebraField from_spectral(const Grid& grid, std::array<CplxArray, 3> coeffs);
  static LieAlgebraField constant(const Grid& grid, const su2::Vec3& c);
  // f(x) sampled at grid points x_a = i_a L / N (axis order 1..n).
  static LieAlgebraField sample(const Grid& grid,
                                const std::function<su2::Vec3(const std::vector<double>&)>& f);

  bool empty() const { return !store_; }
  const Grid& grid() const { return grid_; }
  SpectralEngine& engine() const { return *engine_; }
  std::size_t points() const { return grid_.points(); }

  bool has_physical() const;
  bool has_spectral() const;
  const RealArray& component(int i) const;
  const CplxArray& spectrum(int i) const;
  su2::Vec3 at(std::size_t p) const;

  // Writable views; the other representation is dropped.
  RealArray& mutable_component(int i);
  CplxArray& mutable_spectrum(int i);

 private:
  struct Store {
    std::optional<std::array<RealArray, 3>> phys;
    std::optional<std::array<CplxArray, 3>> spec;
    std::mutex mu;
  };
  void detach();
  void ensure_physical() const;
  void ensure_spectral() const;

  Grid grid_{};
  std::shared_ptr<Store> store_;
  std::shared_ptr<SpectralEngine> engine_;
};

enum class Direction { forward, backward };

// forward materializes the spectral representation, backward the physical
// one; the represented function is unchanged.
LieAlgebraField spectral_transform(const LieAlgebraField& f, Direction dir);

// Coefficient of frequency xi (entries in -N/2..N/2-1) of component comp.
cplx spectral_coefficient(const LieAlgebraField& f, int comp, const std::vector<int>& xi);

void require_same_grid(const LieAlgebraField& a, const LieAlgebraField& b, const char* op);

LieAlgebraField operator+(const LieAlgebraField& a, const LieAlgebraField& b);
LieAlgebraField operator-(const LieAlgebraField& a, const LieAlgebraField& b);
LieAlgebraField operator-(const LieAlgebraField& a);
LieAlgebraField operator*(double s, const LieAlgebraField& a);
// a + s*b
LieAlgebraField axpy(const LieAlgebraField& a, double s, const LieAlgebraField& b);

// Pointwise su(2) bracket (cross product of coefficient vectors).
LieAlgebraField bracket(const LieAlgebraField& x, const LieAlgebraField& y);
// Componentwise pointwise product, the generic (non-Lie) bilinear product.
LieAlgebraField scalar_product(const LieAlgebraField& x, const LieAlgebraField& y);
// Multiply every component by the real scalar field w.
LieAlgebraField weight_by(const RealArray& w, const LieAlgebraField& x);

// Spectral derivative along axis 1..n: multiplier 2 pi i xi_axis / L, with the
// Nyquist plane of that axis zeroed.
LieAlgebraField differentiate(const LieAlgebraField& f, int axis);
CplxArray differentiate_spectrum(const SpectralEngine& eng, const CplxArray& c, int axis, double L);

// Real per-frequency multiplier (indexed by half-spectrum slot).
LieAlgebraField apply_multiplier(const LieAlgebraField& f, const std::vector<double>& mult);

// Pointwise Euclidean norm |f(x)|.
RealArray pointwise_norm(const LieAlgebraField& f);
double l2_norm(const LieAlgebraField& f);
double max_abs(const LieAlgebraField& f);
// Riemann-sum L^r norm (r = infinity allowed).
double lr_norm(const LieAlgebraField& f, double r);
su2::Vec3 mean(const LieAlgebraField& f);

// (n+1) fields indexed mu = 0..n; entry 0 is the time component.
struct OneForm {
  std::vector<LieAlgebraField> e;
  OneForm() = default;
  explicit OneForm(const Grid& grid);
  int n() const { return static_cast<int>(e.size()) - 1; }
  LieAlgebraField& operator[](int mu) { return e.at(mu); }
  const LieAlgebraField& operator[](int mu) const { return e.at(mu); }
  const Grid& grid() const { return e.front().grid(); }
};

OneForm operator+(const OneForm& a, const OneForm& b);
OneForm operator-(const OneForm& a, const OneForm& b);
OneForm operator*(double s, const OneForm& a);

// Antisymmetric (n+1)x(n+1) table stored as the upper triangle in the order
// (0,1),(0,2),...,(0,n),(1,2),...,(n-1,n).
struct TwoForm {
  int n = 0;
  std::vector<LieAlgebraField> e;
  TwoForm() = default;
  explicit TwoForm(const Grid& grid);
  static int slot(int n, int mu, int nu);  // requires mu < nu
  static int count(int n) { return n * (n + 1) / 2; }
  // F_{mu nu} with the sign flipped for mu > nu and zero on the diagonal.
  LieAlgebraField get(int mu, int nu) const;
  void set(int mu, int nu, const LieAlgebraField& f);
  const Grid& grid() const { return e.front().grid(); }
};

// SU(2)-valued field: unit quaternion per point.
class GroupField {
 public:
  GroupField() = default;
  explicit GroupField(const Grid& grid);  // identity
  static GroupField from_arrays(const Grid& grid, std::array<RealArray, 4> q);

  const Grid& grid() const { return grid_; }
  std::size_t points() const { return q_[0].size(); }
  su2::Quat at(std::size_t p) const { return {q_[0][p], q_[1][p], q_[2][p], q_[3][p]}; }
  void set(std::size_t p, const su2::Quat& q) {
    for (int i = 0; i < 4; ++i) q_[i][p] = q[i];
  }
  const RealArray& component(int i) const { return q_[i]; }
  void renormalize();
  double max_unit_defect() const;

 private:
  Grid grid_{};
  std::array<RealArray, 4> q_;
};

GroupField group_exp(const LieAlgebraField& x);
GroupField group_mul(const GroupField& g, const GroupField& h);
GroupField group_inv(const GroupField& g);
// g X g^{-1}
LieAlgebraField adjoint(const GroupField& g, const LieAlgebraField& x);
// s^{-1} d_axis s (left pullback), axis 1..n, spectral derivative of the
// quaternion components.
LieAlgebraField left_pullback(const GroupField& s, int axis);
// (d_axis g) g^{-1}
LieAlgebraField right_derivative(const GroupField& g, int axis);
double sup_distance(const GroupField& g, const GroupField& h);
// g(x) * c for the constant c
GroupField right_multiply(const GroupField& g, const su2::Quat& c);
GroupField left_multiply(const su2::Quat& c, const GroupField& g);

// Uniformly sampled time series: values[m][c] for m = 0..M and c over the
// channels, optionally with co-stored exact time derivatives.
struct SpaceTimeField {
  Grid grid{};
  int channels = 1;
  std::vector<std::vector<LieAlgebraField>> values;
  std::vector<std::vector<LieAlgebraField>> derivs;

  static SpaceTimeField zeros(const Grid& grid, int channels, bool with_derivs);
  int slices() const { return static_cast<int>(values.size()); }
  bool has_derivs() const { return !derivs.empty(); }
  // Throws ShapeError unless there are M+1 slices of `channels` fields on
  // one grid (and likewise for the derivative channel when present).
  void validate() const;
};

// Random real field band-limited to |xi| <= radius (Nyquist planes excluded),
// built from white noise; deterministic for a given engine state.
LieAlgebraField random_band_limited(const Grid& grid, std::mt19937_64& rng, double radius);

}  // namespace wavemap
