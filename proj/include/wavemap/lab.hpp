#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wavemap/connection.hpp"
#include "wavemap/fields.hpp"

namespace wavemap::lab {

// Estimate identifiers:
//   "2.12"   P_{-1}(f g) in S+ against S(f) S(g)
//   "2.13"   forcing estimate, synthetic a and b
//   "2.13i"  forcing estimate with a solved from b (connection fixed point)
//   "2.4"    Strichartz bound for forced single-shell waves
//   "2.11a"  S+ into S^{(-1)};  "2.11b" S+ into B_1;  "2.11c" S+ into L^2 B^s_{p,2}
//   "A.1i"   (sum ||Q_k f||^2_{L^2 L^{2n}})^{1/2} against S(f)
//   "A.1ii"  (sum 2^{2k(n/2-1)} ||Q_k f||^2_{L^inf L^2})^{1/2} against S(f)
//   "A.2"    P_{-1}(f g) in L^2 B^{n/p-1/2}_{p,2} against S(f) S(g)
//   "A.3"    P_{-1}(f g) in B_1 against S(f) S(g)
const std::vector<std::string>& estimate_ids();

struct EnsembleSpec {
  std::uint64_t seed = 7;
  int samples = 100;
  // Shells carrying energy (ladder indices) for f, g and b.
  std::vector<int> shells{0};
  // Shells of the synthetic connection a; empty means `shells`.
  std::vector<int> a_shells{};
  // "critical": shell k weighted by 2^{-k(n-1)}; "flat": equal weights.
  std::string amplitude_law = "critical";
  double amplitude = 1.0;
  Grid grid{4, 16, 1.0, 2, 0.25};
  // Pointwise product: "bracket" (su(2) commutator) or "scalar" (componentwise).
  std::string product = "bracket";
  // Dyadic shell shift applied to every sample: xi -> 2^shift xi, amplitude
  // 2^shift, time window T (already in `grid`) read as the shifted window.
  // Spatial norms are taken per period of the compressed sample.
  int shift = 0;
  // Report the high-low / low-high / high-high partial sums.
  bool case_split = false;
  // Strichartz: forcing amplitude relative to the data and derivative index.
  double forcing = 1.0;
  int strichartz_j = 1;
  // Exponent p for the Besov targets of 2.11c and A.2.
  double besov_p = 4.0;
  // In-situ forcing: each b is rescaled so the connection smallness proxy
  // equals this value before shifting.
  double insitu_proxy = 0.05;
  // Restrict every sample to the first su(2) direction (commuting values).
  bool abelian = false;
  connection::ConnectionOptions connection{};

  void validate() const;
};

struct EstimateReport {
  std::string id;
  std::vector<std::uint64_t> seeds;
  std::vector<double> lhs, rhs, ratio;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  std::uint64_t worst_seed = 0;
  // Named scalar diagnostics (case-split maxima and similar).
  std::vector<std::pair<std::string, double>> extras;

  double extra(const std::string& name) const;
  void finalize();
};

std::string to_csv(const EstimateReport& r);
// `config` is embedded verbatim under "config".
std::string to_json(const EstimateReport& r, const std::string& config_json = "{}");

// Runs the given estimates on the ensemble; estimates sharing a streaming pass
// are evaluated together. Reports come back in the order of `ids`.
std::vector<EstimateReport> run_estimates(const std::vector<std::string>& ids, const EnsembleSpec& spec);
EstimateReport run_estimate(const std::string& id, const EnsembleSpec& spec);

// Spec with every sample shifted by one more dyadic shell (T halved).
EnsembleSpec shifted(const EnsembleSpec& spec);
// Spec on a grid refined by a factor 2 in space (same samples).
EnsembleSpec refined(const EnsembleSpec& spec);

//----------------------------------------------------------------------------
// Resolution-independent samples

// Finite set of lattice modes with value and time-derivative coefficients;
// coefficients of -xi are the conjugates.
struct ModeSet {
  std::vector<std::vector<int>> xi;
  std::vector<std::array<cplx, 3>> value, rate;
};

// Random shell-localized modes; rates carry the factor 2 pi |xi| / L.
ModeSet random_modes(int n, double L, const std::vector<int>& shells, const std::string& law, double amplitude,
                     std::mt19937_64& rng);
// xi -> 2^d xi, value * 2^d, rate * 4^d.
ModeSet shift_modes(const ModeSet& m, int d);
// Values (or rates) as a field on the grid; throws ConfigError when a mode
// is not resolved (|xi_a| >= N/2).
LieAlgebraField place(const Grid& grid, const ModeSet& m, bool rate);

//----------------------------------------------------------------------------
// Strichartz ratio for one forced wave

struct StrichartzInput {
  LieAlgebraField f0, g0;   // data localized to shell k
  LieAlgebraField forcing;  // spatial profile; box Phi = profile cos(freq t)
  double freq = 0.0;
  int k = 0;
  int j = 1;
  double measure = 1.0;     // spatial measure factor
};

struct StrichartzValue {
  double lhs = 0.0, rhs = 0.0;
};

// lhs = sup over `pairs` of 2^{k(1/q+n/r-j)} (||Phi|| + 2^{-k} ||d_t Phi||);
// rhs = ||f0||_{H^{n/2-j}} + ||g0||_{H^{n/2-j-1}} + 2^{k(n/2-j-1)} ||box Phi||_{L^1 L^2}.
StrichartzValue strichartz_ratio(const Grid& grid, const StrichartzInput& in, const std::vector<std::pair<double, double>>& pairs);

//----------------------------------------------------------------------------
// High-high geometric decay of the B_1 bound

struct DecayReport {
  int k = 0;                   // shell of f and g
  std::vector<int> l;          // output shells l < k
  std::vector<double> bound;   // 2^{-l} ||K_l||_{L^{p'}} ||f_k||_{L^2 L^{2p}} ||g_k||_{L^2 L^{2p}}
  std::vector<double> actual;  // 2^{-l} ||Q_l (f_k g_k)||_{L^1 L^inf}
  double measured = 0.0;       // least-squares decay factor per step of l
  double predicted = 0.0;      // 2^{-w/(n-1)}, w = (n-2)^2 - 3
  double relative_error = 0.0;
};

// Same-shell f, g at the top full shell of the grid; p = (n-1)/(n-3).
DecayReport high_high_decay(const EnsembleSpec& spec);

}  // namespace wavemap::lab
