#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <tuple>
#include <vector>

#include "blab/littlewood_paley.hpp"
#include "blab/spectral_ops.hpp"

namespace blab {

/// Power-law random field: |coeff(k)| = |k|^slope with uniform random phases,
/// on integer wavenumbers 0 < |k| <= min(k_max, dealias radius).
struct RandomFieldSpec {
  double slope = -2.0;
  std::uint64_t seed = 0;
  double k_max = infinity;
  /// Root-mean-square value of the generated field.
  double rms = 1.0;
};

namespace detail {

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
  return std::mt19937_64(seq);
}

inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Upper half-plane modes ordered by radius, so that a finer grid draws the
// same phases for the modes it shares with a coarser one.
inline std::vector<std::pair<int, int>> canonical_modes(double radius) {
  std::vector<std::pair<int, int>> modes;
  const int kmax = static_cast<int>(std::floor(radius));
  for (int k1 = 0; k1 <= kmax; ++k1) {
    for (int k2 = -kmax; k2 <= kmax; ++k2) {
      if (k1 == 0 && k2 <= 0) continue;
      if (double(k1) * k1 + double(k2) * k2 > radius * radius) continue;
      modes.emplace_back(k1, k2);
    }
  }
  std::sort(modes.begin(), modes.end(), [](const auto& a, const auto& b) {
    const long ra = long(a.first) * a.first + long(a.second) * a.second;
    const long rb = long(b.first) * b.first + long(b.second) * b.second;
    return std::tie(ra, a.first, a.second) < std::tie(rb, b.first, b.second);
  });
  return modes;
}

inline SpectralField random_spectrum(const Grid& g, const RandomFieldSpec& spec, std::uint64_t salt) {
  SpectralField s(g);
  auto rng = make_rng(spec.seed, salt);
  const double radius = std::min(spec.k_max, g.dealias_radius() * (1.0 + 1e-14));
  const int n = g.n();
  double energy = 0.0;
  for (auto [k1, k2] : canonical_modes(radius)) {
    const double amp = std::pow(std::sqrt(double(k1) * k1 + double(k2) * k2), spec.slope);
    const double phase = 2.0 * std::numbers::pi * unit_uniform(rng);
    if (k1 >= n / 2 || std::abs(k2) >= n / 2) continue;
    const Complex c = std::polar(amp, phase);
    const int j2 = ((k2 % n) + n) % n;
    s.at(k1, j2) = c;
    if (k1 == 0) s.at(0, (n - j2) % n) = std::conj(c);
    energy += 2.0 * amp * amp;
  }
  if (energy > 0.0) s *= spec.rms / std::sqrt(energy);
  return s;
}

}  // namespace detail

inline Field random_field(const Grid& g, const RandomFieldSpec& spec) {
  return to_physical(detail::random_spectrum(g, spec, 0x7e7a));
}

/// Divergence-free random velocity: Leray projection of two independent draws,
/// rescaled so that max|v| = speed.
inline VectorField random_velocity(const Grid& g, const RandomFieldSpec& spec, double speed = 1.0) {
  VectorField raw(to_physical(detail::random_spectrum(g, spec, 0x1001)),
                  to_physical(detail::random_spectrum(g, spec, 0x1002)));
  VectorField v = leray_project(raw);
  const double m = max_abs(v);
  if (m > 0.0) {
    v.u1 *= speed / m;
    v.u2 *= speed / m;
  }
  certify_divergence_free(v);
  return v;
}

/// Delta_q applied to a random field.
inline Field random_shell_field(const DyadicPartition& part, int q, const RandomFieldSpec& spec) {
  return to_physical(part.block(detail::random_spectrum(part.grid(), spec, 0x5e11), q));
}

}  // namespace blab
