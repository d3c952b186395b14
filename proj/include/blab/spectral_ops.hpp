#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "blab/field.hpp"

namespace blab {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// Multiply every stored mode by mult(k1, k2), with k1, k2 signed integer
/// wavenumbers.
template <class Mult>
SpectralField apply_multiplier(const SpectralField& in, Mult&& mult) {
  SpectralField out(in.grid);
  const int n = in.grid.n();
  const int h = in.grid.half();
  for (int j2 = 0; j2 < n; ++j2) {
    const int k2 = in.grid.k2_of(j2);
    for (int j1 = 0; j1 < h; ++j1) {
      const std::size_t idx = static_cast<std::size_t>(j2) * h + j1;
      out.coeffs[idx] = in.coeffs[idx] * mult(j1, k2);
    }
  }
  return out;
}

/// Zero every mode outside the dealiasing disk.
inline void dealias(SpectralField& s) {
  s.for_each_mode([&](int, int, int k1, int k2, Complex& c) {
    if (!s.grid.in_dealias_disk(k1, k2)) c = Complex{};
  });
}

inline bool is_dealiased(const SpectralField& s, double tol = 1e-13) {
  double total = 0.0, outside = 0.0;
  s.for_each_mode([&](int, int, int k1, int k2, const Complex& c) {
    total = std::max(total, std::abs(c));
    if (!s.grid.in_dealias_disk(k1, k2)) outside = std::max(outside, std::abs(c));
  });
  return outside <= tol * std::max(total, 1e-300);
}

namespace spectral {

/// |D|^s on spectral data for any s >= 0; the zero mode maps to 0.
inline SpectralField abs_derivative_power(const SpectralField& f, double s) {
  const double k0 = f.grid.k0();
  return apply_multiplier(f, [&](int k1, int k2) -> Complex {
    if (k1 == 0 && k2 == 0) return 0.0;
    return std::pow(k0 * std::sqrt(double(k1) * k1 + double(k2) * k2), s);
  });
}

/// d^a1/dx1^a1 d^a2/dx2^a2. Odd total order zeroes the Nyquist lines.
inline SpectralField derivative(const SpectralField& f, int a1, int a2) {
  const double k0 = f.grid.k0();
  const bool odd = ((a1 + a2) % 2) != 0;
  return apply_multiplier(f, [&](int k1, int k2) -> Complex {
    if (odd && f.grid.on_nyquist(k1, k2)) return 0.0;
    Complex m = 1.0;
    for (int i = 0; i < a1; ++i) m *= Complex(0.0, k0 * k1);
    for (int i = 0; i < a2; ++i) m *= Complex(0.0, k0 * k2);
    return m;
  });
}

inline SpectralField riesz(const SpectralField& f) {
  return apply_multiplier(f, [&](int k1, int k2) -> Complex {
    if ((k1 == 0 && k2 == 0) || f.grid.on_nyquist(k1, k2)) return 0.0;
    return Complex(0.0, k1 / std::sqrt(double(k1) * k1 + double(k2) * k2));
  });
}

/// Velocity components of the mean-free part of omega, v = grad^perp Delta^-1 omega.
inline std::pair<SpectralField, SpectralField> biot_savart(const SpectralField& omega) {
  const double k0 = omega.grid.k0();
  auto component = [&](int axis) {
    return apply_multiplier(omega, [&](int k1, int k2) -> Complex {
      if ((k1 == 0 && k2 == 0) || omega.grid.on_nyquist(k1, k2)) return 0.0;
      const double kk = k0 * k0 * (double(k1) * k1 + double(k2) * k2);
      // v1 = i k2 w / |k|^2, v2 = -i k1 w / |k|^2
      return axis == 1 ? Complex(0.0, k0 * k2 / kk) : Complex(0.0, -k0 * k1 / kk);
    });
  };
  return {component(1), component(2)};
}

inline SpectralField curl(const SpectralField& u1, const SpectralField& u2) {
  return derivative(u2, 1, 0) - derivative(u1, 0, 1);
}

inline SpectralField divergence(const SpectralField& u1, const SpectralField& u2) {
  return derivative(u1, 1, 0) + derivative(u2, 0, 1);
}

/// Sum over the full lattice of |coeff|^2, scaled to equal the squared L2 norm.
inline double parseval_l2_squared(const SpectralField& s) {
  double acc = 0.0;
  s.for_each_mode([&](int j1, int, int, int, const Complex& c) {
    acc += hermitian_weight(s.grid, j1) * std::norm(c);
  });
  return acc * s.grid.period() * s.grid.period();
}

/// Dealiased product of two spectral fields: truncate factors, multiply on
/// the grid, truncate the result.
inline SpectralField dealiased_product(SpectralField a, SpectralField b) {
  require_same_grid(a.grid, b.grid, "dealiased_product");
  dealias(a);
  dealias(b);
  SpectralField out = to_spectral(pointwise_product(to_physical(a), to_physical(b)));
  dealias(out);
  return out;
}

}  // namespace spectral

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw std::invalid_argument("alpha must lie in (0, 2] (got " + std::to_string(alpha) + ")");
  }
}

/// |D|^alpha f, the Fourier multiplier |k|^alpha.
inline Field fractional_laplacian(const Field& f, double alpha) {
  require_finite(f, "fractional_laplacian input");
  check_alpha(alpha);
  return to_physical(spectral::abs_derivative_power(to_spectral(f), alpha));
}

/// R f = d1 / |D| f, multiplier i k1 / |k|, zero mode sent to 0.
inline Field riesz_transform(const Field& f) {
  require_finite(f, "riesz_transform input");
  return to_physical(spectral::riesz(to_spectral(f)));
}

inline Field partial_derivative(const Field& f, int axis) {
  require_finite(f, "partial_derivative input");
  if (axis != 1 && axis != 2) throw std::invalid_argument("axis must be 1 or 2");
  return to_physical(spectral::derivative(to_spectral(f), axis == 1 ? 1 : 0, axis == 2 ? 1 : 0));
}

inline Field divergence(const VectorField& u) {
  return to_physical(spectral::divergence(to_spectral(u.u1), to_spectral(u.u2)));
}

inline Field curl(const VectorField& u) {
  return to_physical(spectral::curl(to_spectral(u.u1), to_spectral(u.u2)));
}

/// Sets the divergence-free flag when max|div u| <= 1e-10 max|u|.
inline bool certify_divergence_free(VectorField& u) {
  const double div = max_abs(divergence(u));
  const double scale = std::max(max_abs(u.u1), max_abs(u.u2));
  u.divergence_free = div <= 1e-10 * scale;
  return u.divergence_free;
}

inline VectorField biot_savart(const Field& omega) {
  require_finite(omega, "biot_savart input");
  auto [v1, v2] = spectral::biot_savart(to_spectral(omega));
  VectorField v(to_physical(v1), to_physical(v2));
  if (!certify_divergence_free(v)) {
    throw std::logic_error("biot_savart produced a field that fails certification");
  }
  return v;
}

/// Orthogonal projection onto divergence-free fields; the zero mode passes through.
inline VectorField leray_project(const VectorField& u) {
  require_finite(u.u1, "leray_project u1");
  require_finite(u.u2, "leray_project u2");
  const SpectralField a = to_spectral(u.u1);
  const SpectralField b = to_spectral(u.u2);
  SpectralField pa(a.grid), pb(b.grid);
  const int n = a.grid.n();
  const int h = a.grid.half();
  for (int j2 = 0; j2 < n; ++j2) {
    const int k2 = a.grid.k2_of(j2);
    for (int j1 = 0; j1 < h; ++j1) {
      const std::size_t idx = static_cast<std::size_t>(j2) * h + j1;
      const int k1 = j1;
      if (k1 == 0 && k2 == 0) {
        pa.coeffs[idx] = a.coeffs[idx];
        pb.coeffs[idx] = b.coeffs[idx];
        continue;
      }
      if (a.grid.on_nyquist(k1, k2)) continue;
      const double kk = double(k1) * k1 + double(k2) * k2;
      const Complex dot = (double(k1) * a.coeffs[idx] + double(k2) * b.coeffs[idx]) / kk;
      pa.coeffs[idx] = a.coeffs[idx] - double(k1) * dot;
      pb.coeffs[idx] = b.coeffs[idx] - double(k2) * dot;
    }
  }
  VectorField out(to_physical(pa), to_physical(pb));
  certify_divergence_free(out);
  return out;
}

/// Discrete L^p norm: (h^2 sum |f|^p)^(1/p), or the grid maximum for p = inf.
inline double lebesgue_norm(const Field& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lebesgue_norm: p must be >= 1");
  if (std::isinf(p)) return max_abs(f);
  double acc = 0.0;
  if (p == 2.0) {
    for (double v : f.values) acc += v * v;
    return std::sqrt(acc * f.grid.cell_area());
  }
  // Scale by the max to keep |f|^p representable.
  const double m = max_abs(f);
  if (m == 0.0) return 0.0;
  for (double v : f.values) acc += std::pow(std::abs(v) / m, p);
  return m * std::pow(acc * f.grid.cell_area(), 1.0 / p);
}

inline double mean(const Field& f) {
  double acc = 0.0;
  for (double v : f.values) acc += v;
  return acc / static_cast<double>(f.values.size());
}

/// Pointwise Frobenius norm |grad u| of a vector field.
inline Field gradient_magnitude(const VectorField& u) {
  const SpectralField a = to_spectral(u.u1);
  const SpectralField b = to_spectral(u.u2);
  const Field d11 = to_physical(spectral::derivative(a, 1, 0));
  const Field d21 = to_physical(spectral::derivative(a, 0, 1));
  const Field d12 = to_physical(spectral::derivative(b, 1, 0));
  const Field d22 = to_physical(spectral::derivative(b, 0, 1));
  Field out(u.grid());
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = std::sqrt(d11.values[i] * d11.values[i] + d21.values[i] * d21.values[i] +
                              d12.values[i] * d12.values[i] + d22.values[i] * d22.values[i]);
  }
  return out;
}

/// ||grad u||_{L^p} with the Frobenius pointwise norm.
inline double gradient_norm(const VectorField& u, double p) {
  return lebesgue_norm(gradient_magnitude(u), p);
}

/// Field-level dealiased product.
inline Field dealiased_product(const Field& a, const Field& b) {
  return to_physical(spectral::dealiased_product(to_spectral(a), to_spectral(b)));
}

inline Field dealiased(const Field& f) {
  SpectralField s = to_spectral(f);
  dealias(s);
  return to_physical(s);
}

/// v . grad theta with dealiased products, returned in spectral form.
inline SpectralField advection_spectral(const VectorField& v, const SpectralField& theta) {
  SpectralField v1 = to_spectral(v.u1);
  SpectralField v2 = to_spectral(v.u2);
  return spectral::dealiased_product(v1, spectral::derivative(theta, 1, 0)) +
         spectral::dealiased_product(v2, spectral::derivative(theta, 0, 1));
}

}  // namespace blab
