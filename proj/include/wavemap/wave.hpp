#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wavemap/fields.hpp"

namespace wavemap::wave {

// Angular frequencies 2 pi |xi| / L over the half spectrum, cached per grid.
const std::vector<double>& omega_table(const Grid& grid);

// Exact free evolution of one mode set: value and time derivative at time t.
std::pair<LieAlgebraField, LieAlgebraField> free_wave(const LieAlgebraField& f0, const LieAlgebraField& g0,
                                                      double t);
void free_wave_spectrum(const Grid& grid, const CplxArray& f0, const CplxArray& g0, double t, CplxArray& value,
                        CplxArray& deriv);

// Streaming Duhamel integrator for box v = F on a set of half-spectrum
// arrays. Each mode is propagated exactly; the interaction-picture integrals
//   C(t) = int_0^t cos(w s) F ds,  S(t) = int_0^t sin(w s) F ds
// (and int F, int s F for the zero mode) use the trapezoid rule on the time
// lattice. Forcing must be pushed for t_0, t_1, ... in order; after pushing
// t_m the state at t_m is available.
class DuhamelStepper {
 public:
  DuhamelStepper(const Grid& grid, std::vector<CplxArray> f0, std::vector<CplxArray> g0);

  int arrays() const { return static_cast<int>(f0_.size()); }
  // Index of the next slice to push.
  int next_slice() const { return next_; }
  // Null entries mean zero forcing for that array.
  void push(const std::vector<const CplxArray*>& forcing);
  void push_zero();
  void state(int array, CplxArray& value, CplxArray& deriv) const;

 private:
  Grid grid_;
  std::vector<CplxArray> f0_, g0_, C_, S_, prev_;
  std::vector<char> have_prev_;
  std::vector<double> cos_t_, sin_t_, cos_prev_, sin_prev_;
  int next_ = 0;
  double t_ = 0.0;
};

// Solves box v = forcing channelwise with v(0) = f0, d_t v(0) = g0 on the
// forcing's time lattice. The result carries exact derivative channels.
SpaceTimeField duhamel_solve(const std::vector<LieAlgebraField>& f0, const std::vector<LieAlgebraField>& g0,
                             const SpaceTimeField& forcing);
SpaceTimeField duhamel_solve(const LieAlgebraField& f0, const LieAlgebraField& g0, const SpaceTimeField& forcing);
// Free evolution sampled on the grid's time lattice.
SpaceTimeField free_solve(const std::vector<LieAlgebraField>& f0, const std::vector<LieAlgebraField>& g0,
                          const Grid& grid);

// L^1_t L^2_x of box v - forcing on interior slices, with d_t^2 v by central
// differences of the exact derivative channel.
double wave_residual(const SpaceTimeField& v, const SpaceTimeField& forcing);

// int |d_t v|^2 + |grad v|^2 over the torus (Parseval), summed over channels.
double free_energy(const std::vector<LieAlgebraField>& value, const std::vector<LieAlgebraField>& deriv);

//----------------------------------------------------------------------------
// Hodge potentials. Channel layout of the potential vector v: channel 0 is
// phi, channel 1 + slot(mu, nu) is Psi_{mu nu} (mu < nu) in TwoForm order.

int potential_channels(int n);

struct HodgeData {
  LieAlgebraField phi0, phi1;  // phi(0), d_t phi(0)
  TwoForm psi0, psi1;          // Psi(0), d_t Psi(0)
};

// phi(0) = 0, d_t phi(0) = b_0; Psi(0) = 0, d_t Psi_{0j}(0) = b_j, d_t Psi_{jk}(0) = 0.
HodgeData hodge_initial_data(const OneForm& b0);

// b from the potentials on one slice:
//   b_0 = d_t phi - sum_j d_j Psi_{j0}
//   b_j = d_j phi + d_t Psi_{0j} - sum_k d_k Psi_{kj}
// (Lorentz codifferential with signature (+,-,...,-), consistent with the
// Hodge initial layout). `value` and `rate` are the potential spectra and
// their time derivatives, (channel, component) major; returns (n+1)*3 spectra.
std::vector<CplxArray> assemble_b_spectra(const Grid& grid, const std::vector<const CplxArray*>& value,
                                          const std::vector<const CplxArray*>& rate);

// b as a time series of (n+1)-channel slices from phi (1 channel) and Psi
// (n(n+1)/2 channels), both with derivative channels.
SpaceTimeField assemble_b(const SpaceTimeField& phi, const SpaceTimeField& psi);

//----------------------------------------------------------------------------
// Bilinear forms B(a, b)

enum class Product { bracket, scalar };

struct BilinearTerm {
  int out = 0;       // output channel
  int a_index = 0;   // component mu of a
  int b_index = 0;   // component nu of b
  double coeff = 1.0;
  Product product = Product::bracket;
};

// Presets: "mwm_phi" = [a_0,b_0] - sum_j [a_j,b_j]; "mwm_psi" = the table
// [a_mu,b_nu] - [a_nu,b_mu] over mu < nu; "mwm" = both, in potential channel
// order; "generic" = explicit terms.
struct BilinearSpec {
  std::string preset = "mwm";
  int channels = 0;
  std::vector<BilinearTerm> terms;

  static BilinearSpec make(const std::string& preset, int n);
  static BilinearSpec generic(int channels, std::vector<BilinearTerm> terms);
};

std::vector<LieAlgebraField> bilinear_B(const BilinearSpec& spec, const OneForm& a, const OneForm& b);

}  // namespace wavemap::wave
