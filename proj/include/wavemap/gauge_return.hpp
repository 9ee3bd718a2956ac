#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wavemap/connection.hpp"
#include "wavemap/mwm.hpp"

namespace wavemap::gauge {

//----------------------------------------------------------------------------
// Initial gauge

struct PrepareOptions {
  connection::CoulombOptions coulomb{};
  // Gate on the proxy ||s^{-1} ds||_{H^{n/2-1}} over the spatial
  // components; non-positive disables.
  double gate = 0.2;
  double a0_tol = 1e-13;
  int a0_max_iter = 100;
};

struct PreparedGauge {
  OneForm a, b;
  GroupField g;              // normalized to the identity at the origin
  double divergence = 0.0;   // ||sum_j d_j a_j||_2
  double constraint = 0.0;   // spatial ||da + [a,a] + [b,b]||_2
  double pullback_norm = 0.0;  // ||s^{-1} ds||_2 over all components
  int coulomb_iterations = 0;
};

// u = s^{-1} ds with u_0 = v0; Coulomb gauge g of u/2 (normalized at the
// origin); b = g (u/2) g^{-1}; spatial a = g (u/2) g^{-1} - (dg) g^{-1};
// a_0 from Delta a_0 + sum_j d_j([a_j, a_0] + [b_j, b_0]) = 0.
PreparedGauge prepare_initial_gauge(const GroupField& s0, const LieAlgebraField& v0, const PrepareOptions& opts = {});

// ||F(a) + [b, b]|| over all (mu < nu), with d_0 from the rate channels.
double constraint_residual(const OneForm& a, const OneForm& a_rate, const OneForm& b);

// The same residual split into its spatial mean (zero mode) and the rest.
// On the torus the Coulomb condition leaves the constant part of a_j free and
// the elliptic equations keep it at zero, so the zero mode of the temporal
// pairs, mean([a_0, a_j] + [b_0, b_j]), is not controlled by the system.
struct ConstraintParts {
  double full = 0.0, zero_mode = 0.0, mean_free = 0.0;
};
ConstraintParts constraint_parts(const OneForm& a, const OneForm& a_rate, const OneForm& b);
// Spatial pairs only.
double spatial_constraint_residual(const OneForm& a, const OneForm& b);

//----------------------------------------------------------------------------
// Flat connections

struct FlatOptions {
  // Precondition on the plaquette residual; non-positive disables.
  double gate = 1e-3;
};

struct FlatResult {
  std::vector<GroupField> g;   // one per time slice
  double plaquette = 0.0;      // max holonomy defect over all elementary plaquettes
  double spatial_plaquette = 0.0;
  double temporal_plaquette = 0.0;
};

// Max plaquette defect of c (n+1 channels), without integrating.
FlatResult measure_plaquettes(const SpaceTimeField& c);

// Solves dg = -c g with g = identity at the origin of the t = 0 slice: along
// axes 1..n from the origin at t = 0, then forward in time at every point.
// RK4 per segment; spatial midpoints by spectral half-cell shift, temporal
// midpoints by cubic Hermite from the derivative channels (linear when
// absent). Throws PreconditionError when the plaquette defect exceeds the gate.
FlatResult integrate_flat(const SpaceTimeField& c, const FlatOptions& opts = {});

//----------------------------------------------------------------------------
// Reconstruction

enum class Composition {
  plus_minus,        // g+ g-
  plus_inv_minus,    // g+ (g-)^{-1}
  inv_minus_plus,    // (g-)^{-1} g+
  inv_plus_minus,    // (g+)^{-1} g-
  minus_inv_plus,    // g- (g+)^{-1}
  inv_minus_inv_plus // (g-)^{-1} (g+)^{-1}
};

const char* composition_name(Composition c);
su2::Quat compose(Composition c, const su2::Quat& plus, const su2::Quat& minus);

// Composition used by reconstruct_map. With c = -(dG) G^{-1}, a + b is the
// gauge transform of s^{-1} ds and a - b that of 0, so g+ = g s^{-1} C1 and
// g- = g C2, and only (g+)^{-1} g- removes the gauge.
constexpr Composition kComposition = Composition::inv_plus_minus;

// Candidates reproducing the homogeneous geodesic s(t) = exp(t X_1) from
// a = 0, b_0 = X_1 / 2 within tol.
std::vector<Composition> calibrate_composition(double tol = 1e-10);

struct Reconstruction {
  std::vector<GroupField> s;
  double plaquette_plus = 0.0, plaquette_minus = 0.0;
};

// s = anchor * compose(g+, g-) with g+- = integrate_flat(a +- b). Throws
// ReconstructionError when the calibrated composition fails its oracle.
Reconstruction reconstruct_map(const SpaceTimeField& a, const SpaceTimeField& b, const su2::Quat& anchor,
                               const FlatOptions& opts = {});

//----------------------------------------------------------------------------
// Direct integrator

struct DirectResult {
  std::vector<GroupField> s;     // one per time slice
  // sum_j ||s^{-1} d_j s||^2 + <w_{k-1/2}, w_{k+1/2}> per slice
  std::vector<double> energy;
};

// Lie leapfrog for d_t(s^{-1} d_t s) = sum_j d_j(s^{-1} d_j s):
// w_{1/2} = v0 + dt/2 R(s_0), s_{k+1} = s_k exp(dt w_{k+1/2}),
// w_{k+3/2} = w_{k+1/2} + dt R(s_{k+1}), with R band-limited to |xi| <= N/2.
// The grid's time step is split into `substeps`; throws ConfigError unless
// the inner step satisfies dt <= dx / 2.
DirectResult direct_integrate(const GroupField& s0, const LieAlgebraField& v0, const Grid& grid, int substeps = 1);

double sigma_energy(const GroupField& s, const LieAlgebraField& w);

//----------------------------------------------------------------------------
// Round trip

struct RoundTripConfig {
  Grid grid{4, 8, 1.0, 8, 0.5};
  double amplitude = 0.02;
  double radius = 1.5;
  std::uint64_t seed = 1;
  mwm::PicardOptions picard{};
  PrepareOptions prepare{};
  FlatOptions flat{};
  int direct_substeps = 1;
};

struct RoundTripResult {
  double sup_error = 0.0;               // max over slices and points of |s_rt - s_direct|
  std::vector<double> error;            // per slice
  std::vector<double> constraint;       // mean-free (d)' residual per slice along the evolution
  double constraint_growth = 0.0;       // max_t constraint / constraint(0)
  std::vector<double> constraint_zero_mode, constraint_full;
  double constraint_full_growth = 0.0;
  double plaquette_plus = 0.0, plaquette_minus = 0.0;
  double unit_defect = 0.0;             // max | |s| - 1 | over reconstructed fields
  double prepare_divergence = 0.0, prepare_constraint = 0.0;
  int picard_iterations = 0;
  double energy_drift = 0.0;            // relative, direct integrator
};

// Random small s0 = exp(phi), v0 both band-limited with sup `amplitude`.
void round_trip_data(const RoundTripConfig& cfg, GroupField& s0, LieAlgebraField& v0);

RoundTripResult round_trip(const RoundTripConfig& cfg);

}  // namespace wavemap::gauge
