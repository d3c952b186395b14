#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

namespace blab {

/// Uniform discretization of the periodic square [0, period)^2.
///
/// Grid point (i1, i2) sits at x = (i1 * h, i2 * h) and is stored at flat
/// index i2 * n + i1 (x1 runs fastest). The integer wavenumber lattice is
/// [-n/2, n/2)^2; physical wavenumbers are (2 pi / period) times those.
class Grid {
 public:
  static constexpr double default_dealias = 2.0 / 3.0;

  Grid(int n, double period, double dealias_fraction = default_dealias)
      : n_(n), period_(period), dealias_(dealias_fraction) {
    if (n < 8 || (n & (n - 1)) != 0) {
      throw std::invalid_argument("n must be a power of two >= 8 (got " +
                                  std::to_string(n) + ")");
    }
    if (!(period > 0.0) || !std::isfinite(period)) {
      throw std::invalid_argument("period must be positive and finite");
    }
    if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0)) {
      throw std::invalid_argument("dealias_fraction must lie in (0, 1]");
    }
  }

  int n() const noexcept { return n_; }
  double period() const noexcept { return period_; }
  double dealias_fraction() const noexcept { return dealias_; }

  double spacing() const noexcept { return period_ / n_; }
  double cell_area() const noexcept { return spacing() * spacing(); }
  /// Physical length of the unit integer wavenumber.
  double k0() const noexcept { return 2.0 * std::numbers::pi / period_; }

  std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_; }
  /// Columns of the half-spectrum (k1 in [0, n/2]).
  int half() const noexcept { return n_ / 2 + 1; }
  std::size_t spectral_size() const noexcept {
    return static_cast<std::size_t>(n_) * static_cast<std::size_t>(half());
  }

  /// Signed integer wavenumber for row j2 of the spectrum, in [-n/2, n/2).
  int k2_of(int j2) const noexcept { return j2 < n_ / 2 ? j2 : j2 - n_; }

  /// Radius (in integer wavenumber units) of the dealiasing disk.
  double dealias_radius() const noexcept { return dealias_ * 0.5 * n_; }
  /// Physical Nyquist wavenumber.
  double nyquist() const noexcept { return k0() * 0.5 * n_; }

  /// True when (k1, k2) lies inside the closed dealiasing disk.
  bool in_dealias_disk(int k1, int k2) const noexcept {
    const double r = dealias_radius();
    return static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2 <= r * r * (1.0 + 1e-14);
  }

  /// Modes on the Nyquist line have no real-valued odd counterpart.
  bool on_nyquist(int k1, int k2) const noexcept {
    return k1 == n_ / 2 || k2 == -n_ / 2;
  }

  double x(int i) const noexcept { return i * spacing(); }

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.n_ == b.n_ && a.period_ == b.period_ && a.dealias_ == b.dealias_;
  }

 private:
  int n_;
  double period_;
  double dealias_;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) {
    throw std::invalid_argument(std::string(what) + ": fields live on different grids");
  }
}

}  // namespace blab
