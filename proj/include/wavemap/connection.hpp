#pragma once

#include <string>
#include <vector>

#include "wavemap/fields.hpp"

namespace wavemap::connection {

// F_{mu nu} = d_mu A_nu - d_nu A_mu + [A_mu, A_nu] on one slice; d_0 comes
// from a_rate (the time-derivative channel).
TwoForm curvature_slice(const OneForm& a, const OneForm& a_rate);
// Curvature of a time series with n+1 channels and derivative channels.
std::vector<TwoForm> curvature(const SpaceTimeField& a);
// Spatial block F_{jk}, j < k in 1..n, of a spatial connection (entries
// indexed 0..n-1 for axes 1..n), in TwoForm-slot order restricted to j, k >= 1.
std::vector<LieAlgebraField> spatial_curvature(const std::vector<LieAlgebraField>& a);

struct ConnectionOptions {
  double tol = 1e-12;
  int max_iter = 60;
  // Smallness gate on the proxy ||b||_{H^{n/2-1}} (all n+1 components);
  // non-positive disables the gate.
  double gate = 0.1;
  bool record_iterates = false;
};

struct IterationRecord {
  int iter = 0;
  double update = 0.0;    // ||a_{m+1} - a_m||_2 / ||a_{m+1}||_2
  double residual = 0.0;  // elliptic residual of a_m, relative
  double ratio = 0.0;     // update_m / update_{m-1}
};

struct ConnectionResult {
  OneForm a;
  int iterations = 0;
  std::vector<IterationRecord> trace;
  double contraction = 0.0;        // max ratio over non-roundoff iterations
  double residual = 0.0;           // ||Delta a_j + sum_k d_k([a_k,a_j] + [b_k,b_j])||_2, absolute
  double relative_residual = 0.0;  // residual / ||sum_k d_k [b_k, b_j]||_2
  double divergence = 0.0;         // ||sum_j d_j a_j||_2
  double gate_value = 0.0;
  std::vector<OneForm> iterates;   // a^0, a^1, ... when recorded
};

// Fixed point a_j = -sum_k d_k Delta^{-1}([a_k, a_j] + [b_k, b_j]), j = 0..n,
// spatial k, started from the b-only term.
// Throws PreconditionError (gate), DivergenceError (update ratio >= 1 three
// times in a row) or NonConvergenceError (max_iter).
ConnectionResult solve_connection(const OneForm& b, const ConnectionOptions& opts = {});

// Time derivative of the fixed point: the linear equation
//   r_j = -sum_k d_k Delta^{-1}([r_k, a_j] + [a_k, r_j] + [bd_k, b_j] + [b_k, bd_j])
// solved by iteration, with bd = d_t b.
OneForm solve_connection_rate(const OneForm& a, const OneForm& b, const OneForm& b_rate,
                              const ConnectionOptions& opts = {});

// One application of the map a -> -sum_k d_k Delta^{-1}([a_k,a_j] + [b_k,b_j]).
OneForm connection_map(const OneForm& a, const OneForm& b);

// Proxy used by the smallness gate.
double smallness_proxy(const OneForm& b);

//----------------------------------------------------------------------------
// Coulomb gauge on one time slice

struct CoulombOptions {
  double tol = 1e-10;
  int max_iter = 200;
  // Gate on ||F_A||_{L^{n/2}}; non-positive disables.
  double gate = 0.5;
};

struct CoulombResult {
  GroupField g;
  std::vector<LieAlgebraField> a_tilde;  // axes 1..n
  int iterations = 0;
  std::vector<double> history;           // ||div A~||_2 per iteration
  double divergence = 0.0;
  double curvature_norm = 0.0;           // ||F_A||_{L^{n/2}}
  double gradient_norm = 0.0;            // ||grad A~||_{L^{n/2}}
  double ratio = 0.0;                    // gradient_norm / curvature_norm (NaN when F_A = 0)
};

// g A g^{-1} - (dg) g^{-1}, spatial axes.
std::vector<LieAlgebraField> gauge_transform(const GroupField& g, const std::vector<LieAlgebraField>& a);
LieAlgebraField divergence(const std::vector<LieAlgebraField>& a);

// Iterative gauge flow: u = -Delta^{-1} div A~, g <- exp(-u) g, with A~
// recomputed from A and the accumulated g, until ||div A~||_2 < tol.
CoulombResult coulomb_fix_slice(const std::vector<LieAlgebraField>& a, const CoulombOptions& opts = {});

}  // namespace wavemap::connection
