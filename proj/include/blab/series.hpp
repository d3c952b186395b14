#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace blab {

/// l^r aggregation of non-negative terms (max for r = inf).
inline double lr_aggregate(std::span<const double> terms, double r) {
  if (!(r >= 1.0)) throw std::invalid_argument("summation exponent r must be >= 1");
  double m = 0.0;
  for (double t : terms) m = std::max(m, std::abs(t));
  if (std::isinf(r) || m == 0.0) return m;
  if (r == 1.0) {
    double acc = 0.0;
    for (double t : terms) acc += std::abs(t);
    return acc;
  }
  double acc = 0.0;
  for (double t : terms) acc += std::pow(std::abs(t) / m, r);
  return m * std::pow(acc, 1.0 / r);
}

/// Trapezoid rule on arbitrary (increasing) sample times.
inline double trapezoid(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size()) throw std::invalid_argument("trapezoid: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) acc += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  return acc;
}

/// Running trapezoid integral, starting at 0.
inline std::vector<double> cumulative_trapezoid(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size()) throw std::invalid_argument("cumulative_trapezoid: size mismatch");
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i) {
    out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  }
  return out;
}

/// L^rho norm in time with trapezoid weights (max for rho = inf).
inline double time_norm(std::span<const double> t, std::span<const double> y, double rho) {
  if (!(rho >= 1.0)) throw std::invalid_argument("time exponent rho must be >= 1");
  if (std::isinf(rho)) {
    double m = 0.0;
    for (double v : y) m = std::max(m, std::abs(v));
    return m;
  }
  std::vector<double> powered(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) powered[i] = std::pow(std::abs(y[i]), rho);
  return std::pow(trapezoid(t, powered), 1.0 / rho);
}

}  // namespace blab
