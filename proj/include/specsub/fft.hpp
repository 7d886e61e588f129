#ifndef SPECSUB_FFT_HPP
#define SPECSUB_FFT_HPP

// Thin RAII layer over FFTW's real-data transforms. Plans use FFTW_ESTIMATE
// so results never depend on planner timing.

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

namespace specsub::fft {

namespace detail {

// The FFTW planner is not reentrant.
inline std::mutex &planner_mutex() {
  static std::mutex m;
  return m;
}

struct FreeDeleter {
  void operator()(void *p) const { fftw_free(p); }
};

struct PlanDeleter {
  void operator()(fftw_plan p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};

using Plan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDeleter>;

template <class T> std::unique_ptr<T[], FreeDeleter> alloc(std::size_t n) {
  void *p = fftw_malloc(sizeof(T) * (n == 0 ? 1 : n));
  if (!p)
    throw std::bad_alloc();
  return std::unique_ptr<T[], FreeDeleter>(static_cast<T *>(p));
}

} // namespace detail

/// Unnormalized forward transform Y_k = sum_j x_j exp(-2 pi i j k / n),
/// returned for k = 0..n/2.
inline std::vector<std::complex<double>> forward(std::span<const double> x) {
  const std::size_t n = x.size();
  const std::size_t nc = n / 2 + 1;
  auto in = detail::alloc<double>(n);
  auto out = detail::alloc<fftw_complex>(nc);
  detail::Plan plan;
  {
    std::lock_guard lock(detail::planner_mutex());
    plan.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(),
                                    FFTW_ESTIMATE));
  }
  if (!plan)
    throw std::runtime_error("FFTW planning failed");
  std::memcpy(in.get(), x.data(), n * sizeof(double));
  fftw_execute(plan.get());
  std::vector<std::complex<double>> y(nc);
  for (std::size_t k = 0; k < nc; ++k)
    y[k] = {out[k][0], out[k][1]};
  return y;
}

/// Unnormalized inverse of `forward`: x_j = sum_k Y_k exp(2 pi i j k / n) over
/// the Hermitian extension of the half spectrum.
inline std::vector<double> inverse(std::span<const std::complex<double>> y,
                                   std::size_t n) {
  const std::size_t nc = n / 2 + 1;
  if (y.size() != nc)
    throw std::invalid_argument("half spectrum has wrong length");
  auto in = detail::alloc<fftw_complex>(nc);
  auto out = detail::alloc<double>(n);
  detail::Plan plan;
  {
    std::lock_guard lock(detail::planner_mutex());
    plan.reset(fftw_plan_dft_c2r_1d(static_cast<int>(n), in.get(), out.get(),
                                    FFTW_ESTIMATE));
  }
  if (!plan)
    throw std::runtime_error("FFTW planning failed");
  for (std::size_t k = 0; k < nc; ++k) {
    in[k][0] = y[k].real();
    in[k][1] = y[k].imag();
  }
  fftw_execute(plan.get());
  return std::vector<double>(out.get(), out.get() + n);
}

} // namespace specsub::fft

#endif
