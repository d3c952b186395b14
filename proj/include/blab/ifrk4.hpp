#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "blab/field.hpp"

namespace blab {

/// Diagonal decay factors exp(-rate * tau) for a multi-component spectral state.
///
/// An empty rate vector marks an undamped component.
class IntegratingFactor {
 public:
  explicit IntegratingFactor(std::vector<std::vector<double>> rates) : rates_(std::move(rates)) {}

  void prepare(double dt) {
    if (dt == prepared_dt_) return;
    half_.assign(rates_.size(), {});
    full_.assign(rates_.size(), {});
    for (std::size_t c = 0; c < rates_.size(); ++c) {
      const auto& r = rates_[c];
      half_[c].resize(r.size());
      full_[c].resize(r.size());
      for (std::size_t i = 0; i < r.size(); ++i) {
        half_[c][i] = std::exp(-0.5 * dt * r[i]);
        full_[c][i] = std::exp(-dt * r[i]);
      }
    }
    prepared_dt_ = dt;
  }

  std::size_t components() const noexcept { return rates_.size(); }

  void apply_half(std::vector<SpectralField>& u) const { apply(u, half_); }
  void apply_full(std::vector<SpectralField>& u) const { apply(u, full_); }

 private:
  static void apply(std::vector<SpectralField>& u, const std::vector<std::vector<double>>& e) {
    for (std::size_t c = 0; c < u.size(); ++c) {
      if (e[c].empty()) continue;
      auto& coeffs = u[c].coeffs;
      for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] *= e[c][i];
    }
  }

  std::vector<std::vector<double>> rates_;
  std::vector<std::vector<double>> half_;
  std::vector<std::vector<double>> full_;
  double prepared_dt_ = -1.0;
};

namespace detail {
inline void axpy(std::vector<SpectralField>& y, double a, const std::vector<SpectralField>& x) {
  for (std::size_t c = 0; c < y.size(); ++c) {
    auto& yc = y[c].coeffs;
    const auto& xc = x[c].coeffs;
    for (std::size_t i = 0; i < yc.size(); ++i) yc[i] += a * xc[i];
  }
}
}  // namespace detail

/// One Lawson (integrating-factor) RK4 step for du/dt = -L u + N(t, u).
///
/// The diagonal linear part is integrated exactly; rhs(t, u) returns N.
template <class Rhs>
void ifrk4_step(std::vector<SpectralField>& u, double t, double dt, IntegratingFactor& factor, Rhs&& rhs) {
  if (u.size() != factor.components()) throw std::invalid_argument("ifrk4_step: component mismatch");
  factor.prepare(dt);

  const std::vector<SpectralField> a = rhs(t, u);

  std::vector<SpectralField> stage = u;
  detail::axpy(stage, 0.5 * dt, a);
  factor.apply_half(stage);
  const std::vector<SpectralField> b = rhs(t + 0.5 * dt, stage);

  std::vector<SpectralField> u_half = u;
  factor.apply_half(u_half);
  stage = u_half;
  detail::axpy(stage, 0.5 * dt, b);
  const std::vector<SpectralField> c = rhs(t + 0.5 * dt, stage);

  std::vector<SpectralField> c_half = c;
  factor.apply_half(c_half);
  stage = u;
  factor.apply_full(stage);
  detail::axpy(stage, dt, c_half);
  const std::vector<SpectralField> d = rhs(t + dt, stage);

  // u_new = E u + dt/6 (E a + 2 E_half (b + c) + d)
  std::vector<SpectralField> ea = a;
  factor.apply_full(ea);
  std::vector<SpectralField> bc = b;
  detail::axpy(bc, 1.0, c);
  factor.apply_half(bc);
  std::vector<SpectralField> sum = ea;
  detail::axpy(sum, 2.0, bc);
  detail::axpy(sum, 1.0, d);

  factor.apply_full(u);
  detail::axpy(u, dt / 6.0, sum);
}

}  // namespace blab
