#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wavemap/connection.hpp"
#include "wavemap/wave.hpp"

namespace wavemap::mwm {

// Initial data of the potential vector v = (phi, Psi): value f and time
// derivative g, one field per potential channel.
struct PotentialData {
  std::vector<LieAlgebraField> f, g;
};

// Hodge layout from an initial differential b0.
PotentialData data_from_b0(const OneForm& b0);
// b0 with every component band-limited to |xi| <= radius and rescaled to sup
// norm `amplitude`; deterministic per seed.
OneForm random_b0(const Grid& grid, std::uint64_t seed, double amplitude, double radius = 2.0);
PotentialData random_potential_data(const Grid& grid, std::uint64_t seed, double amplitude, double radius = 2.0);
PotentialData scaled(const PotentialData& d, double s);

// Fourier-multiplier Sobolev norm (sum |2 pi xi / L|^{2s} |c|^2 L^n)^{1/2}
// over all fields; the zero mode is excluded for s != 0.
double spectral_sobolev_norm(const std::vector<LieAlgebraField>& fields, double s);
// (||f||^2_{H^{s}} + ||g||^2_{H^{s-1}})^{1/2}
double data_norm(const PotentialData& d, double s);

struct PicardOptions {
  double tol = 1e-9;
  int max_iter = 30;
  std::string preset = "mwm";
  // Stopping norm S^{(-j)}: 0 (default) or 1.
  int s_index = 0;
  connection::ConnectionOptions connection{};
  // Reported threshold on ||(f,g)||_{H^{n/2} x H^{n/2-1}}; not enforced.
  double data_gate = 0.1;
  // Per-iteration S+ / S norms of a and b and the forcing-estimate constant.
  bool track_norms = true;
  // Keep a and b (with time derivatives) of the final pass.
  bool store_connection = false;
};

struct PicardRecord {
  int j = 0;                   // iterate index of v_j; diff is ||v_j - v_{j-1}||
  double diff = 0.0;
  double ratio = 0.0;          // diff_j / diff_{j-1}, 0 when undefined
  double a_norm = 0.0;         // sup_t ||a_{j-1}(t)||_2
  double b_norm = 0.0;         // sup_t ||b_{j-1}(t)||_{H^{n/2-1}}
  double forcing_lhs = 0.0;    // (sum_k 2^{2k(n/2-1)} ||Q_k B||^2_{L1 L2})^{1/2}
  double a_splus = 0.0;        // S+ norm of a_{j-1} (tracked runs)
  double b_s1 = 0.0;           // S^{(-1)} norm of b_{j-1} (tracked runs)
  double forcing_constant = 0.0;  // forcing_lhs / (a_splus * b_s1), 0 when undefined
  int connection_iterations = 0;  // max over slices
};

struct PicardTrace {
  std::vector<PicardRecord> records;
};

struct PicardResult {
  SpaceTimeField v;  // potential channels with derivative channels
  SpaceTimeField a, b;  // final pass, when stored
  PicardTrace trace;
  int iterations = 0;   // number of wave solves, v_0 included
  bool converged = false;
  double data_norm = 0.0;
  bool within_gate = true;
  // Final-pass series for the energy budget.
  std::vector<double> a_linf;   // ||a(t)||_inf
  std::vector<double> b_l2n;    // ||b(t)||_{L^{2n}}
  double a_l1_linf = 0.0;       // ||a||_{L^1_t L^inf_x}
  double a_b1 = 0.0;            // l^1 over shells of ||Q_k a||_{L^1 L^inf} (tracked runs)
  double b_l2_l2n = 0.0;        // ||b||_{L^2_t L^{2n}_x}
};

// v_0 = free wave; v_{j+1} solves box v = -B(a_j, b_j) with the same data,
// b_j assembled from v_j and a_j from the elliptic fixed point, slice by
// slice. Stops when the S^{(-s_index)} difference norm drops below tol.
// Throws DivergenceError when the difference ratio is >= 1 twice in a row
// and NonConvergenceError at max_iter; connection errors propagate.
PicardResult picard_solve(const Grid& grid, const PotentialData& data, const PicardOptions& opts = {});

std::string trace_csv(const PicardTrace& trace);

struct StabilityReport {
  std::vector<double> times, energy;  // E(t)
  double max_energy = 0.0;
  double a1_l1_linf = 0.0, a1_b1 = 0.0;
  double b1_l2_l2n = 0.0, b2_l2_l2n = 0.0;
  int iterations1 = 0, iterations2 = 0;
};

// E(t) = (int |grad dv|^2 + |d_t dv|^2)^{1/2} for dv = v_1 - v_2 over all
// potential channels.
StabilityReport stability_experiment(const Grid& grid, const PotentialData& d1, const PotentialData& d2,
                                     const PicardOptions& opts = {});

struct RegularityReport {
  std::vector<double> times, curve;  // ||v(t)||_{H^{n/2+1}}
  double data_norm = 0.0;            // ||(f,g)||_{H^{n/2+1} x H^{n/2}}
  double ratio = 0.0;                // sup curve / data_norm, 0 for zero data
  int iterations = 0;
};

RegularityReport regularity_track(const Grid& grid, const PotentialData& data, const PicardOptions& opts = {});

}  // namespace wavemap::mwm
