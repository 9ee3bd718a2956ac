#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <vector>

namespace wavemap {

using cplx = std::complex<double>;
using RealArray = std::vector<double>;
using CplxArray = std::vector<cplx>;

// Periodic space grid [0,L)^n with N points per axis, plus the uniform time
// lattice t_m = m*T/M, m = 0..M.
struct Grid {
  int n = 4;
  int N = 16;
  double L = 1.0;
  int M = 1;
  double T = 1.0;

  double dt() const { return T / M; }
  double dx() const { return L / N; }
  std::size_t points() const;
  std::size_t spectral_points() const;
  double cell_volume() const;
  // Top dyadic shell: 2^k_max = N/2.
  int k_max() const;
  double time(int m) const { return m * dt(); }

  // Throws ConfigError unless 2 <= n <= 5, N is a power of two >= 4, L > 0,
  // M >= 1 and T > 0.
  void validate() const;
  bool same_space(const Grid& other) const {
    return n == other.n && N == other.N && L == other.L;
  }
  bool same_time(const Grid& other) const {
    return M == other.M && T == other.T;
  }
};

bool is_power_of_two(long v);

// Real-to-half-complex transforms on one (n, N) shape, with a frequency table
// for the half spectrum. Axis 0 is the slowest (row-major) axis; the last axis
// is halved, holding 0..N/2.
//
// Forward carries the 1/N^n factor so that coefficients are Fourier
// coefficients of the periodic function: f(x) = sum_xi c(xi) e^{2 pi i x.xi/L}.
class SpectralEngine {
 public:
  static std::shared_ptr<SpectralEngine> get(int n, int N);
  ~SpectralEngine();
  SpectralEngine(const SpectralEngine&) = delete;
  SpectralEngine& operator=(const SpectralEngine&) = delete;

  int n() const { return n_; }
  int N() const { return N_; }
  std::size_t real_size() const { return real_size_; }
  std::size_t spec_size() const { return spec_size_; }

  void forward(const double* in, cplx* out);
  void backward(const cplx* in, double* out);
  CplxArray forward(const RealArray& in);
  RealArray backward(const CplxArray& in);

  // Signed integer frequency of spectral index idx along axis a; the Nyquist
  // entry reports -N/2.
  int xi(std::size_t idx, int a) const { return xi_[idx * n_ + a]; }
  long norm2(std::size_t idx) const { return norm2_[idx]; }
  double abs_xi(std::size_t idx) const { return abs_xi_[idx]; }
  // Multiplicity of the entry in the full spectrum (1 on the self-conjugate
  // planes of the halved axis, 2 elsewhere).
  double weight(std::size_t idx) const { return weight_[idx]; }
  bool nyquist(std::size_t idx, int a) const { return xi(idx, a) == -N_ / 2; }
  bool any_nyquist(std::size_t idx) const { return any_nyq_[idx] != 0; }

  // Half-spectrum slot holding the coefficient of xi (or of -xi, in which
  // case *conjugate is set).
  std::size_t index_of(const std::vector<int>& xi, bool* conjugate) const;

 private:
  SpectralEngine(int n, int N);
  int n_, N_;
  std::size_t real_size_, spec_size_;
  std::vector<int> xi_;
  std::vector<long> norm2_;
  std::vector<double> abs_xi_;
  std::vector<double> weight_;
  std::vector<std::uint8_t> any_nyq_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
  std::mutex mu_;
};

// Parseval: integral of |f|^2 over the torus from the half spectrum.
double spectral_l2_squared(const SpectralEngine& eng, const CplxArray& c, double volume);

}  // namespace wavemap
