#include "wavemap/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <utility>

#include "wavemap/errors.hpp"

namespace wavemap {

bool is_power_of_two(long v) { return v > 0 && (v & (v - 1)) == 0; }

std::size_t Grid::points() const {
  std::size_t p = 1;
  for (int a = 0; a < n; ++a) p *= static_cast<std::size_t>(N);
  return p;
}

std::size_t Grid::spectral_points() const {
  return points() / static_cast<std::size_t>(N) * static_cast<std::size_t>(N / 2 + 1);
}

double Grid::cell_volume() const { return std::pow(L / N, n); }

int Grid::k_max() const {
  int k = 0;
  while ((1 << (k + 1)) <= N / 2) ++k;
  return k;
}

void Grid::validate() const {
  if (n < 2 || n > 5) throw ConfigError("grid dimension n must lie in [2,5]");
  if (!is_power_of_two(N) || N < 4) throw ConfigError("grid size N must be a power of two >= 4");
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("period L must be positive");
  if (M < 1) throw ConfigError("time steps M must be >= 1");
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("final time T must be positive");
}

//----------------------------------------------------------------------------
// FFTW plans on owned buffers; callers' arrays are copied in and out so that
// alignment never matters.

struct SpectralEngine::Plans {
  double* rbuf = nullptr;
  fftw_complex* cbuf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

namespace {
std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

std::shared_ptr<SpectralEngine> SpectralEngine::get(int n, int N) {
  if (n < 1 || n > 6) throw ConfigError("spectral engine: unsupported dimension");
  if (!is_power_of_two(N) || N < 2) throw ConfigError("spectral engine: N must be a power of two");
  static std::map<std::pair<int, int>, std::shared_ptr<SpectralEngine>> registry;
  std::lock_guard<std::mutex> lock(registry_mutex());
  auto& slot = registry[{n, N}];
  if (!slot) slot.reset(new SpectralEngine(n, N));
  return slot;
}

SpectralEngine::SpectralEngine(int n, int N) : n_(n), N_(N) {
  real_size_ = 1;
  for (int a = 0; a < n; ++a) real_size_ *= static_cast<std::size_t>(N);
  spec_size_ = real_size_ / N * (N / 2 + 1);

  xi_.resize(spec_size_ * n);
  norm2_.resize(spec_size_);
  abs_xi_.resize(spec_size_);
  weight_.resize(spec_size_);
  any_nyq_.resize(spec_size_);
  const int half = N / 2;
  std::vector<int> idx(n, 0);
  for (std::size_t s = 0; s < spec_size_; ++s) {
    long r2 = 0;
    bool nyq = false;
    for (int a = 0; a < n; ++a) {
      int v = idx[a];
      int f = (a == n - 1) ? (v == half ? -half : v) : (v < half ? v : v - N);
      xi_[s * n + a] = f;
      r2 += static_cast<long>(f) * f;
      if (f == -half) nyq = true;
    }
    norm2_[s] = r2;
    abs_xi_[s] = std::sqrt(static_cast<double>(r2));
    int last = idx[n - 1];
    weight_[s] = (last == 0 || last == half) ? 1.0 : 2.0;
    any_nyq_[s] = nyq ? 1 : 0;
    for (int a = n - 1; a >= 0; --a) {
      int extent = (a == n - 1) ? half + 1 : N;
      if (++idx[a] < extent) break;
      idx[a] = 0;
    }
  }

  plans_ = std::make_unique<Plans>();
  plans_->rbuf = fftw_alloc_real(real_size_);
  plans_->cbuf = fftw_alloc_complex(spec_size_);
  std::vector<int> dims(n, N);
  // FFTW planning is not thread-safe; the registry lock serializes it.
  plans_->fwd = fftw_plan_dft_r2c(n, dims.data(), plans_->rbuf, plans_->cbuf, FFTW_ESTIMATE);
  plans_->bwd = fftw_plan_dft_c2r(n, dims.data(), plans_->cbuf, plans_->rbuf, FFTW_ESTIMATE);
}

SpectralEngine::~SpectralEngine() {
  if (plans_) {
    fftw_destroy_plan(plans_->fwd);
    fftw_destroy_plan(plans_->bwd);
    fftw_free(plans_->rbuf);
    fftw_free(plans_->cbuf);
  }
}

void SpectralEngine::forward(const double* in, cplx* out) {
  std::lock_guard<std::mutex> lock(mu_);
  std::memcpy(plans_->rbuf, in, real_size_ * sizeof(double));
  fftw_execute(plans_->fwd);
  const double scale = 1.0 / static_cast<double>(real_size_);
  const auto* c = reinterpret_cast<const cplx*>(plans_->cbuf);
  for (std::size_t s = 0; s < spec_size_; ++s) out[s] = c[s] * scale;
}

void SpectralEngine::backward(const cplx* in, double* out) {
  std::lock_guard<std::mutex> lock(mu_);
  std::memcpy(plans_->cbuf, in, spec_size_ * sizeof(fftw_complex));
  fftw_execute(plans_->bwd);
  std::memcpy(out, plans_->rbuf, real_size_ * sizeof(double));
}

CplxArray SpectralEngine::forward(const RealArray& in) {
  if (in.size() != real_size_) throw ShapeError("forward transform: array size mismatch");
  CplxArray out(spec_size_);
  forward(in.data(), out.data());
  return out;
}

RealArray SpectralEngine::backward(const CplxArray& in) {
  if (in.size() != spec_size_) throw ShapeError("backward transform: array size mismatch");
  RealArray out(real_size_);
  backward(in.data(), out.data());
  return out;
}

std::size_t SpectralEngine::index_of(const std::vector<int>& xi, bool* conjugate) const {
  if (static_cast<int>(xi.size()) != n_) throw ShapeError("index_of: frequency rank mismatch");
  auto wrap = [this](int v) { return ((v % N_) + N_) % N_; };
  std::vector<int> w(n_);
  for (int a = 0; a < n_; ++a) w[a] = wrap(xi[a]);
  bool conj = false;
  if (w[n_ - 1] > N_ / 2) {
    conj = true;
    for (int a = 0; a < n_; ++a) w[a] = wrap(-xi[a]);
  }
  if (conjugate) *conjugate = conj;
  std::size_t s = 0;
  for (int a = 0; a < n_; ++a) {
    int extent = (a == n_ - 1) ? N_ / 2 + 1 : N_;
    s = s * extent + w[a];
  }
  return s;
}

double spectral_l2_squared(const SpectralEngine& eng, const CplxArray& c, double volume) {
  double acc = 0.0;
  for (std::size_t s = 0; s < c.size(); ++s) acc += eng.weight(s) * std::norm(c[s]);
  return acc * volume;
}

}  // namespace wavemap
