#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "wavemap/fields.hpp"

namespace wavemap::norms {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Time/space exponent pair (q, r) with q, r in [1, infinity].
struct AdmissiblePair {
  double q = 2.0;
  double r = 2.0;
  bool operator==(const AdmissiblePair&) const = default;
};

enum class PairVariant {
  admissible,             // 1/q + (n-1)/(2r) <= (n-1)/4, q, r >= 2
  admissible_subcritical, // admissible and 1/q + n/r <= 1 - 1/100
  half_admissible,        // 1/(2q) + (n-1)/(4r) <= (n-1)/4 - 1/100, q, r >= 1
  half_admissible_time,   // half_admissible and q >= 2
  holder_product,         // reciprocal sum of an admissible and a subcritical pair
  good_product,           // half_admissible and holder_product
  good_product_time       // half_admissible_time and holder_product
};

const char* variant_name(PairVariant v);

struct AdmissiblePairFamily {
  int n = 4;
  PairVariant variant = PairVariant::admissible;
  std::vector<AdmissiblePair> pairs;
};

constexpr double kMargin = 0.01;

bool is_admissible(int n, const AdmissiblePair& p);
bool is_sharp_admissible(int n, const AdmissiblePair& p);
bool contains(int n, PairVariant v, const AdmissiblePair& p);

// The sharp lattice (infinity,2), (2, 2(n-1)/(n-3)), (4, r) with r solving the
// sharp equation; pairs that fail the admissibility test for small n are
// dropped.
std::vector<AdmissiblePair> sharp_pairs(int n);

// Default finite family for a variant; every returned pair is certified by
// contains().
AdmissiblePairFamily enumerate_pairs(int n, PairVariant v);

//----------------------------------------------------------------------------
// Lebesgue norms

// Composite trapezoid L^q over [0, T] of samples spaced dt (max for q = inf).
double time_norm(const std::vector<double>& samples, double q, double dt);

// Riemann-sum L^r of the pointwise Euclidean norm over all channels and
// components of one slice.
double spatial_norm(const std::vector<LieAlgebraField>& slice, double r);

// L^q_t L^r_x of F (derivs = true uses the time-derivative channel).
double mixed_norm(const SpaceTimeField& F, double q, double r, bool derivs = false);

// Homogeneous Sobolev norm via the ladder: (sum_b 2^{2ks} ||block_b f||_2^2)^{1/2}.
double sobolev_norm(const LieAlgebraField& f, double s);
double sobolev_norm(const std::vector<LieAlgebraField>& channels, double s);
// (sum_b 2^{2ks} ||block_b F||^2_{L^{q_t} L^p})^{1/2}.
double besov_norm(const SpaceTimeField& F, double s, double p, double q_t);

//----------------------------------------------------------------------------
// Shell norm accumulation
//
// Streams time slices and stores, per ladder block and slice, the spatial
// L^r norms of the block projection of the value and time-derivative
// channels, for a fixed list of r. Time norms are taken on demand.
class ShellNormAccumulator {
 public:
  ShellNormAccumulator(const Grid& grid, std::vector<double> r_values, bool with_derivs);

  // Spectra of every (channel, component) array of one slice.
  void add_slice(const std::vector<const CplxArray*>& value, const std::vector<const CplxArray*>& deriv);
  void add_slice(const std::vector<LieAlgebraField>& value, const std::vector<LieAlgebraField>& deriv);

  int slices() const { return slices_; }
  int blocks() const { return blocks_; }
  const Grid& grid() const { return grid_; }
  bool has_derivs() const { return with_derivs_; }
  // L^q_t L^r_x of block b; r must be one of the accumulated exponents.
  double block_mixed(int b, double q, double r, bool deriv) const;
  // Rescales the spatial measure by `factor` (each stored L^r norm by
  // factor^{1/r}); L^inf entries are unchanged.
  void scale_measure(double factor);

 private:
  int r_index(double r) const;
  Grid grid_;
  std::vector<double> r_;
  bool with_derivs_;
  int blocks_;
  int slices_ = 0;
  // [block][slice * nr + ir]
  std::vector<std::vector<double>> val_, der_;
  // nonzero slots of each block table
  std::vector<std::vector<std::uint32_t>> support_;
};

// Union of r exponents used by the given families plus extras.
std::vector<double> exponents_for(const std::vector<AdmissiblePairFamily>& families, std::vector<double> extra = {});

ShellNormAccumulator accumulate(const SpaceTimeField& F, const std::vector<double>& r_values);

//----------------------------------------------------------------------------
// Reports

struct BlockEntry {
  int k = 0;
  double value = 0.0;
  AdmissiblePair pair{};    // maximizer for the value part
  AdmissiblePair pair_t{};  // maximizer for the time-derivative part
};

struct NormReport {
  std::string name;
  double value = 0.0;
  std::vector<BlockEntry> blocks;
  std::vector<std::string> families;  // families used, for the log
};

std::string to_csv(const NormReport& r);
std::string to_json(const NormReport& r);

//----------------------------------------------------------------------------
// Strichartz-type norms

// sup over the family of 2^{k(1/q + n/r - j)} (||F|| + 2^{-k} ||d_t F||)
// in L^q_t L^r_x, for F already localized to shell k.
double strichartz_block_norm(const SpaceTimeField& F, int k, int j, const AdmissiblePairFamily& family);

// Per-block S_k^{(-j)} values from an accumulator (block b uses k = block_k(b)).
NormReport s_norm_report(const ShellNormAccumulator& acc, int j, const AdmissiblePairFamily& family);
// l^1 over blocks of [sup_good 2^{k(1/q+n/r-1)} ||.|| + sup_good_time ... 2^{-k} ||d_t .||].
NormReport s_plus_report(const ShellNormAccumulator& acc, const AdmissiblePairFamily& good,
                         const AdmissiblePairFamily& good_time);
// l^p over blocks of L^1_t L^inf_x.
NormReport bp_report(const ShellNormAccumulator& acc, double p);

double s_norm(const SpaceTimeField& F, int j);
double s_plus_norm(const SpaceTimeField& F);
double bp_norm(const SpaceTimeField& F, double p);

}  // namespace wavemap::norms
