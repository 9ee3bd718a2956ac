#pragma once

#include <vector>

#include "wavemap/fields.hpp"

namespace wavemap::lp {

// Radial low-pass profile: 1 on [0,1], smoothstep in r^2 on (1,2), 0 beyond.
double low_pass(double r);
// Shell profile low_pass(r) - low_pass(2r), supported in [1/2, 2].
double shell_profile(double r);

// Shells in integer lattice units |xi|. Block 0 is the lumped low projector
// P_{k_min}; block b >= 1 is Q_{k_min + b}, up to Q_{k_max}.
struct DyadicLadder {
  int k_min = 0;
  int k_max = 0;
  double base = 1.0;

  static DyadicLadder for_grid(const Grid& grid);
  int blocks() const { return k_max - k_min + 1; }
  int block_k(int b) const { return k_min + b; }
};

// Multiplier tables over the half spectrum, cached per (n, N, k).
const std::vector<double>& low_table(const Grid& grid, int k);
const std::vector<double>& shell_table(const Grid& grid, int k);
// Table of ladder block b (lumped low for b = 0).
const std::vector<double>& block_table(const Grid& grid, int b);
const std::vector<double>& inverse_gradient_table(const Grid& grid);
const std::vector<double>& inverse_laplacian_table(const Grid& grid);

LieAlgebraField project_low(const LieAlgebraField& f, int k);
LieAlgebraField project_shell(const LieAlgebraField& f, int k);
LieAlgebraField lumped_low(const LieAlgebraField& f);
// Multiplier 1/|xi|, zero mode to 0.
LieAlgebraField inverse_gradient(const LieAlgebraField& f);
// Multiplier -L^2/(4 pi^2 |xi|^2), zero mode to 0.
LieAlgebraField inverse_laplacian(const LieAlgebraField& f);
// Spectral Laplacian, multiplier -4 pi^2 |xi|^2 / L^2.
LieAlgebraField laplacian(const LieAlgebraField& f);
// Riesz transform i xi_axis / |xi| (axis 1..n), zero mode and the axis
// Nyquist plane to 0.
LieAlgebraField riesz(const LieAlgebraField& f, int axis);

// In-place variants on one half-spectrum array.
void multiply(CplxArray& c, const std::vector<double>& table);

// Samples of the periodic convolution kernel of Q_k on the grid, and its
// Riemann-sum L^p norm (p = infinity allowed).
RealArray shell_kernel(const Grid& grid, int k);
double shell_kernel_norm(const Grid& grid, int k, double p);

}  // namespace wavemap::lp
