#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>

namespace blab::fft {

namespace detail {

struct PlanPair {
  fftw_plan r2c;
  fftw_plan c2r;
};

// FFTW's planner is not thread-safe; execution of an existing plan on new
// arrays is. Plans are created once per size and live for the process.
inline const PlanPair& plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, PlanPair> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  const std::size_t real_size = static_cast<std::size_t>(n) * n;
  const std::size_t cplx_size = static_cast<std::size_t>(n) * (n / 2 + 1);
  double* real = fftw_alloc_real(real_size);
  fftw_complex* cplx = fftw_alloc_complex(cplx_size);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair plans{fftw_plan_dft_r2c_2d(n, n, real, cplx, flags),
                 fftw_plan_dft_c2r_2d(n, n, cplx, real, flags)};
  fftw_free(real);
  fftw_free(cplx);
  if (plans.r2c == nullptr || plans.c2r == nullptr) {
    throw std::runtime_error("FFTW planning failed");
  }
  return cache.emplace(n, plans).first->second;
}

}  // namespace detail

/// Unnormalized real-to-half-complex transform of an n x n array.
inline void forward(int n, std::span<const double> in, std::span<std::complex<double>> out) {
  const auto& p = detail::plans_for(n);
  // r2c does not modify its input.
  fftw_execute_dft_r2c(p.r2c, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

/// Unnormalized half-complex-to-real transform. Destroys `in`.
inline void inverse_destructive(int n, std::span<std::complex<double>> in, std::span<double> out) {
  const auto& p = detail::plans_for(n);
  fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(in.data()), out.data());
}

}  // namespace blab::fft
