#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "blab/error.hpp"
#include "blab/fft.hpp"
#include "blab/grid.hpp"

namespace blab {

using Complex = std::complex<double>;

/// Real samples of a scalar function on a Grid.
struct Field {
  Grid grid;
  std::vector<double> values;

  explicit Field(const Grid& g) : grid(g), values(g.size(), 0.0) {}
  Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) {
      throw std::invalid_argument("Field: expected " + std::to_string(grid.size()) +
                                  " samples, got " + std::to_string(values.size()));
    }
  }

  template <class Fn>
  static Field from_function(const Grid& g, Fn&& fn) {
    Field f(g);
    const int n = g.n();
    for (int i2 = 0; i2 < n; ++i2) {
      for (int i1 = 0; i1 < n; ++i1) {
        f.values[static_cast<std::size_t>(i2) * n + i1] = fn(g.x(i1), g.x(i2));
      }
    }
    return f;
  }

  static Field constant(const Grid& g, double c) {
    Field f(g);
    std::fill(f.values.begin(), f.values.end(), c);
    return f;
  }

  double& at(int i1, int i2) { return values[static_cast<std::size_t>(i2) * grid.n() + i1]; }
  double at(int i1, int i2) const {
    return values[static_cast<std::size_t>(i2) * grid.n() + i1];
  }

  Field& operator+=(const Field& o) {
    require_same_grid(grid, o.grid, "Field +=");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    require_same_grid(grid, o.grid, "Field -=");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
  }
  Field& operator*=(double s) {
    for (double& v : values) v *= s;
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }
  friend Field operator*(Field a, double s) { return a *= s; }
};

/// Pointwise product on the grid (no dealiasing).
inline Field pointwise_product(const Field& a, const Field& b) {
  require_same_grid(a.grid, b.grid, "pointwise_product");
  Field out(a.grid);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = a.values[i] * b.values[i];
  return out;
}

inline double max_abs(const Field& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

inline void require_finite(const Field& f, const std::string& what) {
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (!std::isfinite(f.values[i])) throw NonFiniteError(what, i);
  }
}

/// Fourier-series coefficients on the half-spectrum k1 in [0, n/2].
///
/// coeff(k) = n^-2 sum_x f(x) exp(-i k.x), so f(x) = sum_k coeff(k) exp(i k.x).
/// Entry (j1, j2) is stored at j2 * (n/2 + 1) + j1; conjugate symmetry supplies
/// the k1 < 0 half.
struct SpectralField {
  Grid grid;
  std::vector<Complex> coeffs;

  explicit SpectralField(const Grid& g) : grid(g), coeffs(g.spectral_size(), Complex{}) {}

  Complex& at(int j1, int j2) {
    return coeffs[static_cast<std::size_t>(j2) * grid.half() + j1];
  }
  Complex at(int j1, int j2) const {
    return coeffs[static_cast<std::size_t>(j2) * grid.half() + j1];
  }

  /// Coefficient at signed integer wavenumber (k1, k2), using conjugate symmetry.
  Complex mode(int k1, int k2) const {
    const int n = grid.n();
    auto wrap = [n](int k) { return ((k % n) + n) % n; };
    if (k1 >= 0 && k1 <= n / 2) return at(k1, wrap(k2));
    return std::conj(at(-k1, wrap(-k2)));
  }

  /// Visit every stored mode as fn(j1, j2, k1, k2, coeff&).
  template <class Fn>
  void for_each_mode(Fn&& fn) {
    const int n = grid.n();
    const int h = grid.half();
    for (int j2 = 0; j2 < n; ++j2) {
      const int k2 = grid.k2_of(j2);
      for (int j1 = 0; j1 < h; ++j1) {
        fn(j1, j2, j1, k2, coeffs[static_cast<std::size_t>(j2) * h + j1]);
      }
    }
  }
  template <class Fn>
  void for_each_mode(Fn&& fn) const {
    const int n = grid.n();
    const int h = grid.half();
    for (int j2 = 0; j2 < n; ++j2) {
      const int k2 = grid.k2_of(j2);
      for (int j1 = 0; j1 < h; ++j1) {
        fn(j1, j2, j1, k2, coeffs[static_cast<std::size_t>(j2) * h + j1]);
      }
    }
  }

  SpectralField& operator+=(const SpectralField& o) {
    require_same_grid(grid, o.grid, "SpectralField +=");
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    require_same_grid(grid, o.grid, "SpectralField -=");
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] -= o.coeffs[i];
    return *this;
  }
  SpectralField& operator*=(double s) {
    for (auto& c : coeffs) c *= s;
    return *this;
  }
  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
};

/// Weight of half-spectrum column j1 when summing over the full lattice.
inline double hermitian_weight(const Grid& g, int j1) {
  return (j1 == 0 || j1 == g.n() / 2) ? 1.0 : 2.0;
}

inline SpectralField to_spectral(const Field& f) {
  SpectralField s(f.grid);
  fft::forward(f.grid.n(), f.values, s.coeffs);
  const double scale = 1.0 / static_cast<double>(f.grid.size());
  for (auto& c : s.coeffs) c *= scale;
  return s;
}

inline Field to_physical(const SpectralField& s) {
  std::vector<Complex> scratch = s.coeffs;
  Field f(s.grid);
  fft::inverse_destructive(s.grid.n(), scratch, f.values);
  return f;
}

/// Two-component vector field; `divergence_free` is only ever set by
/// certify_divergence_free().
struct VectorField {
  Field u1;
  Field u2;
  bool divergence_free = false;

  VectorField(Field a, Field b) : u1(std::move(a)), u2(std::move(b)) {
    require_same_grid(u1.grid, u2.grid, "VectorField");
  }
  static VectorField zero(const Grid& g) {
    VectorField v{Field(g), Field(g)};
    v.divergence_free = true;
    return v;
  }

  const Grid& grid() const { return u1.grid; }
};

inline double max_abs(const VectorField& v) {
  double m = 0.0;
  for (std::size_t i = 0; i < v.u1.values.size(); ++i) {
    m = std::max(m, std::hypot(v.u1.values[i], v.u2.values[i]));
  }
  return m;
}

}  // namespace blab
