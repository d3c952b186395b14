#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "blab/littlewood_paley.hpp"
#include "blab/paradiff.hpp"
#include "blab/random_fields.hpp"

namespace blab::app {

inline const std::vector<std::string>& estimate_names() {
  static const std::vector<std::string> names{"riesz_commutator", "riesz_commutator_besov", "block_commutator",
                                              "conv_commutator",  "gen_bernstein",          "bernstein"};
  return names;
}

struct EnsembleParams {
  std::string estimate;
  int samples = 100;
  std::uint64_t seed = 0;
  double slope = -2.0;
  double p = 4.0;
  double r = 2.0;
  double rho = 2.0;
  double epsilon = 0.5;
};

/// Narrow periodic Gaussian centred at the origin, unit mass.
inline Field narrow_kernel(const Grid& g, double width) {
  const double L = g.period();
  Field h = Field::from_function(g, [&](double x1, double x2) {
    const double d1 = std::min(x1, L - x1);
    const double d2 = std::min(x2, L - x2);
    return std::exp(-0.5 * (d1 * d1 + d2 * d2) / (width * width));
  });
  double mass = 0.0;
  for (double x : h.values) mass += x;
  h *= 1.0 / (mass * g.cell_area());
  return h;
}

/// Shell used by sample i of the shell-localised estimates; avoids the closing top shell.
inline int sample_shell(const DyadicPartition& part, int i) { return i % std::max(1, std::min(3, part.q_max())); }

/// Sample i of an estimate ensemble. Sample seeds are seed + i, so the same
/// sample at two resolutions shares its low-mode phases.
inline InequalityReport sample_estimate(const EnsembleParams& ep, const DyadicPartition& part, int i) {
  const Grid& g = part.grid();
  const std::uint64_t s = ep.seed + static_cast<std::uint64_t>(i);
  const RandomFieldSpec spec{ep.slope, s};
  InequalityReport rep;
  if (ep.estimate == "riesz_commutator") {
    rep = check_riesz_commutator(random_velocity(g, spec), random_field(g, spec), ep.p, ep.r, part);
  } else if (ep.estimate == "riesz_commutator_besov") {
    rep = check_riesz_commutator_besov(random_velocity(g, spec), random_field(g, spec), ep.rho, ep.epsilon, ep.r,
                                       part);
  } else if (ep.estimate == "block_commutator") {
    rep = check_block_commutator(random_velocity(g, spec), random_field(g, spec), ep.p, part).worst;
  } else if (ep.estimate == "conv_commutator") {
    const double width = g.period() / 32.0 * (1.0 + 0.25 * (i % 4));
    RandomFieldSpec smooth = spec;
    smooth.k_max = 8.0;
    RandomFieldSpec other = smooth;
    other.seed = s + 0x9e3779b9ULL;
    rep = check_conv_commutator(narrow_kernel(g, width), random_field(g, smooth), random_field(g, other), ep.p,
                                infinity);
    rep.meta.params = "width=" + std::to_string(width);
  } else if (ep.estimate == "gen_bernstein") {
    const int q = sample_shell(part, i);
    const int pe = (ep.p >= 2.0 && std::fmod(ep.p, 2.0) == 0.0 && std::isfinite(ep.p)) ? int(ep.p) : 4;
    rep = check_generalized_bernstein(random_shell_field(part, q, spec), q, pe, part);
  } else if (ep.estimate == "bernstein") {
    const int q = sample_shell(part, i);
    const BernsteinReport b = bernstein_check(random_field(g, spec), q, 1, 2.0, infinity, part);
    rep.estimate = "bernstein";
    rep.lhs = b.low_pass_ratio;
    rep.rhs_factors = {{"normalised", 1.0}};
    rep.ratio = b.low_pass_ratio;
    rep.degenerate = b.low_pass_degenerate;
    rep.meta.params = "q=" + std::to_string(q) + ",block_ratio=" + std::to_string(b.block_ratio);
  } else {
    throw std::invalid_argument("unknown estimate '" + ep.estimate + "'");
  }
  rep.meta.seed = s;
  rep.meta.n = g.n();
  rep.meta.slope = ep.slope;
  return rep;
}

struct EnsembleResult {
  std::string estimate;
  int n = 0;
  std::vector<InequalityReport> reports;
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  int degenerate = 0;
  int valid = 0;

  bool extrema_finite() const { return valid > 0 && std::isfinite(min_ratio) && std::isfinite(max_ratio); }
};

/// Degenerate samples are counted but kept out of the extrema.
inline EnsembleResult run_ensemble(const EnsembleParams& ep, const DyadicPartition& part) {
  if (ep.samples < 1) throw std::invalid_argument("ensemble needs at least one sample");
  EnsembleResult res;
  res.estimate = ep.estimate;
  res.n = part.grid().n();
  for (int i = 0; i < ep.samples; ++i) {
    InequalityReport rep = sample_estimate(ep, part, i);
    if (rep.degenerate) {
      ++res.degenerate;
    } else {
      ++res.valid;
      res.min_ratio = std::min(res.min_ratio, rep.ratio);
      res.max_ratio = std::max(res.max_ratio, rep.ratio);
    }
    res.reports.push_back(std::move(rep));
  }
  return res;
}

/// Ratio of the relevant extremum between two resolutions, >= 1.
inline double resolution_drift(const EnsembleResult& a, const EnsembleResult& b, bool lower_bound) {
  const double x = lower_bound ? a.min_ratio : a.max_ratio;
  const double y = lower_bound ? b.min_ratio : b.max_ratio;
  if (!(x > 0.0) || !(y > 0.0)) return std::numeric_limits<double>::infinity();
  return std::max(x / y, y / x);
}

/// Estimates whose acceptance statistic is the ensemble minimum.
inline bool is_lower_bound(const std::string& estimate) { return estimate == "gen_bernstein"; }

}  // namespace blab::app
