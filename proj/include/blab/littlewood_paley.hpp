#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "blab/field.hpp"
#include "blab/series.hpp"
#include "blab/spectral_ops.hpp"

namespace blab {

/// Radial profiles of the dyadic partition.
///
/// chi == 1 on [0, 3/4], chi == 0 on [4/3, inf), smooth in between;
/// phi(r) = chi(r/2) - chi(r) is supported in [3/4, 8/3].
struct PartitionProfile {
  static constexpr double r0 = 3.0 / 4.0;
  static constexpr double r1 = 4.0 / 3.0;
  static constexpr double r2 = 8.0 / 3.0;

  /// C-infinity step: 0 for t <= 0, 1 for t >= 1.
  static double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
  }

  static double chi(double r) { return 1.0 - smooth_step((r - r0) / (r1 - r0)); }
  static double phi(double r) { return chi(0.5 * r) - chi(r); }
};

/// Dyadic partition of unity realized on a Grid.
///
/// Shells run over q in {-1, 0, ..., q_max}. Delta_{-1} = chi(|D|),
/// Delta_q = phi(2^-q |D|) for 0 <= q < q_max, and the top shell closes the
/// partition: Delta_{q_max} = 1 - chi(2^-q_max |D|), which agrees with
/// phi(2^-q_max |D|) up to radius 1.5 * 2^q_max and absorbs everything above.
class DyadicPartition {
 public:
  explicit DyadicPartition(const Grid& grid) : grid_(grid) {
    const double top = grid.nyquist() * grid.dealias_fraction();
    q_max_ = static_cast<int>(std::floor(std::log2(top) + 1e-12)) - 1;
    if (q_max_ < 1) {
      throw std::invalid_argument("grid too small to host shells {-1, 0, 1} (n = " +
                                  std::to_string(grid.n()) + ")");
    }
    auto tables = std::make_shared<std::vector<std::vector<double>>>();
    tables->reserve(static_cast<std::size_t>(q_max_) + 2);
    for (int q = -1; q <= q_max_; ++q) {
      std::vector<double> w(grid.spectral_size());
      const double k0 = grid.k0();
      const int h = grid.half();
      for (int j2 = 0; j2 < grid.n(); ++j2) {
        const int k2 = grid.k2_of(j2);
        for (int j1 = 0; j1 < h; ++j1) {
          const double r = k0 * std::sqrt(double(j1) * j1 + double(k2) * k2);
          w[static_cast<std::size_t>(j2) * h + j1] = weight(q, r);
        }
      }
      tables->push_back(std::move(w));
    }
    tables_ = std::move(tables);
  }

  const Grid& grid() const noexcept { return grid_; }
  int q_min() const noexcept { return -1; }
  int q_max() const noexcept { return q_max_; }
  int shell_count() const noexcept { return q_max_ + 2; }

  /// Multiplier of shell q at physical radius r.
  double weight(int q, double r) const {
    check_shell(q);
    if (q == -1) return PartitionProfile::chi(r);
    const double scaled = std::ldexp(r, -q);
    if (q == q_max_) return 1.0 - PartitionProfile::chi(scaled);
    return PartitionProfile::chi(0.5 * scaled) - PartitionProfile::chi(scaled);
  }

  std::span<const double> weights(int q) const {
    check_shell(q);
    return (*tables_)[static_cast<std::size_t>(q + 1)];
  }

  SpectralField block(const SpectralField& f, int q) const {
    require_same_grid(f.grid, grid_, "dyadic block");
    const auto w = weights(q);
    SpectralField out(f.grid);
    for (std::size_t i = 0; i < w.size(); ++i) out.coeffs[i] = f.coeffs[i] * w[i];
    return out;
  }

  /// S_q = sum_{j=-1}^{q-1} Delta_j, for q in [-1, q_max + 1].
  SpectralField low_pass(const SpectralField& f, int q) const {
    require_same_grid(f.grid, grid_, "low pass");
    if (q < -1 || q > q_max_ + 1) {
      throw std::out_of_range("low-pass index " + std::to_string(q) + " outside [-1, " +
                              std::to_string(q_max_ + 1) + "]");
    }
    SpectralField out(f.grid);
    for (int j = -1; j < q; ++j) {
      const auto w = weights(j);
      for (std::size_t i = 0; i < w.size(); ++i) out.coeffs[i] += f.coeffs[i] * w[i];
    }
    return out;
  }

  void check_shell(int q) const {
    if (q < -1 || q > q_max_) {
      throw std::out_of_range("shell index " + std::to_string(q) + " outside [-1, " +
                              std::to_string(q_max_) + "]");
    }
  }

 private:
  Grid grid_;
  int q_max_ = 0;
  std::shared_ptr<const std::vector<std::vector<double>>> tables_;
};

inline DyadicPartition build_partition(const Grid& grid) { return DyadicPartition(grid); }

struct BesovIndex {
  double s = 0.0;
  double p = 2.0;
  double r = 2.0;

  BesovIndex() = default;
  BesovIndex(double s_, double p_, double r_) : s(s_), p(p_), r(r_) {
    if (!(p >= 1.0) || !(r >= 1.0)) {
      throw std::invalid_argument("Besov index requires p >= 1 and r >= 1");
    }
  }
};

inline Field dyadic_block(const Field& f, int q, const DyadicPartition& part) {
  part.check_shell(q);
  require_finite(f, "dyadic_block input");
  return to_physical(part.block(to_spectral(f), q));
}

inline Field low_pass(const Field& f, int q, const DyadicPartition& part) {
  require_finite(f, "low_pass input");
  return to_physical(part.low_pass(to_spectral(f), q));
}

/// All blocks Delta_{-1} .. Delta_{q_max}; entry i holds shell i - 1.
inline std::vector<Field> dyadic_blocks(const SpectralField& f, const DyadicPartition& part) {
  std::vector<Field> out;
  out.reserve(static_cast<std::size_t>(part.shell_count()));
  for (int q = -1; q <= part.q_max(); ++q) out.push_back(to_physical(part.block(f, q)));
  return out;
}

/// ||Delta_q f||_{L^p} for every shell; entry i holds shell i - 1.
inline std::vector<double> block_norms(const SpectralField& f, double p, const DyadicPartition& part) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(part.shell_count()));
  for (int q = -1; q <= part.q_max(); ++q) out.push_back(lebesgue_norm(to_physical(part.block(f, q)), p));
  return out;
}

/// l^r aggregation of 2^{qs} * norms[q + 1].
inline double besov_from_block_norms(std::span<const double> norms, double s, double r) {
  std::vector<double> weighted(norms.size());
  for (std::size_t i = 0; i < norms.size(); ++i) {
    const int q = static_cast<int>(i) - 1;
    weighted[i] = std::exp2(q * s) * norms[i];
  }
  return lr_aggregate(weighted, r);
}

inline double besov_norm(const SpectralField& f, const BesovIndex& idx, const DyadicPartition& part) {
  return besov_from_block_norms(block_norms(f, idx.p, part), idx.s, idx.r);
}

inline double besov_norm(const Field& f, const BesovIndex& idx, const DyadicPartition& part) {
  require_finite(f, "besov_norm input");
  return besov_norm(to_spectral(f), idx, part);
}

/// Per-shell time series ||Delta_q u(t)||_{L^p}.
class BlockHistory {
 public:
  BlockHistory(double p, int q_max) : p_(p), q_max_(q_max), values_(static_cast<std::size_t>(q_max) + 2) {}

  void push(double t, std::span<const double> norms) {
    if (norms.size() != values_.size()) throw std::invalid_argument("BlockHistory: wrong shell count");
    if (!times_.empty() && !(t > times_.back())) {
      throw std::invalid_argument("BlockHistory: times must be strictly increasing");
    }
    for (double v : norms) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("BlockHistory: bad norm value");
    }
    times_.push_back(t);
    for (std::size_t i = 0; i < norms.size(); ++i) values_[i].push_back(norms[i]);
  }

  double p() const noexcept { return p_; }
  int q_max() const noexcept { return q_max_; }
  bool empty() const noexcept { return times_.empty(); }
  std::size_t size() const noexcept { return times_.size(); }
  const std::vector<double>& times() const noexcept { return times_; }
  /// Series for shell q.
  const std::vector<double>& shell(int q) const { return values_.at(static_cast<std::size_t>(q + 1)); }

 private:
  double p_;
  int q_max_;
  std::vector<double> times_;
  std::vector<std::vector<double>> values_;
};

/// Space-time Besov norms from a block history.
///
/// tilde = true:  ( 2^{qs} ||Delta_q u||_{L^rho_T L^p} )_{l^r}
/// tilde = false: || ( 2^{qs} ||Delta_q u||_{L^p} )_{l^r} ||_{L^rho_T}
inline double spacetime_besov(const BlockHistory& hist, const BesovIndex& idx, double rho, bool tilde) {
  if (hist.empty()) throw std::invalid_argument("spacetime_besov: empty history");
  if (idx.p != hist.p()) throw std::invalid_argument("spacetime_besov: history recorded at a different p");
  if (!(rho >= 1.0)) throw std::invalid_argument("spacetime_besov: rho must be >= 1");
  const auto& t = hist.times();
  const int shells = hist.q_max() + 2;
  if (tilde) {
    std::vector<double> per_shell(static_cast<std::size_t>(shells));
    for (int q = -1; q <= hist.q_max(); ++q) {
      per_shell[static_cast<std::size_t>(q + 1)] = time_norm(t, hist.shell(q), rho);
    }
    return besov_from_block_norms(per_shell, idx.s, idx.r);
  }
  std::vector<double> per_time(t.size());
  std::vector<double> norms(static_cast<std::size_t>(shells));
  for (std::size_t k = 0; k < t.size(); ++k) {
    for (int q = -1; q <= hist.q_max(); ++q) norms[static_cast<std::size_t>(q + 1)] = hist.shell(q)[k];
    per_time[k] = besov_from_block_norms(norms, idx.s, idx.r);
  }
  return time_norm(t, per_time, rho);
}

struct BernsteinReport {
  /// sup_{|a|=k} ||d^a S_q f||_{L^b} / (2^{q(k + 2(1/a - 1/b))} ||S_q f||_{L^a})
  double low_pass_ratio = 0.0;
  /// sup_{|a|=k} ||d^a Delta_q f||_{L^a} / (2^{qk} ||Delta_q f||_{L^a}); bounded above and below.
  double block_ratio = 0.0;
  bool low_pass_degenerate = false;
  bool block_degenerate = false;
};

namespace detail {
inline double inverse_exponent(double a) { return std::isinf(a) ? 0.0 : 1.0 / a; }

inline double sup_derivative_norm(const SpectralField& f, int k, double p) {
  double best = 0.0;
  for (int j = 0; j <= k; ++j) {
    best = std::max(best, lebesgue_norm(to_physical(spectral::derivative(f, k - j, j)), p));
  }
  return best;
}
}  // namespace detail

/// Ratios of both Bernstein displays for one field, shell and derivative order.
inline BernsteinReport bernstein_check(const Field& f, int q, int k, double a, double b,
                                       const DyadicPartition& part) {
  if (!(a >= 1.0 && a <= b)) throw std::invalid_argument("bernstein_check: need 1 <= a <= b");
  if (k < 0) throw std::invalid_argument("bernstein_check: derivative order must be >= 0");
  if (q < 0 || q > part.q_max()) throw std::out_of_range("bernstein_check: shell out of range");
  require_finite(f, "bernstein_check input");
  const SpectralField fs = to_spectral(f);
  const double reference = std::max(lebesgue_norm(f, a), 1e-300);
  constexpr double degenerate_rel = 1e-12;

  BernsteinReport rep;
  const SpectralField low = part.low_pass(fs, q);
  const double low_norm = lebesgue_norm(to_physical(low), a);
  const double scale =
      std::exp2(q * (k + 2.0 * (detail::inverse_exponent(a) - detail::inverse_exponent(b))));
  if (low_norm <= degenerate_rel * reference) {
    rep.low_pass_degenerate = true;
  } else {
    rep.low_pass_ratio = detail::sup_derivative_norm(low, k, b) / (scale * low_norm);
  }

  const SpectralField blk = part.block(fs, q);
  const double blk_norm = lebesgue_norm(to_physical(blk), a);
  if (blk_norm <= degenerate_rel * reference) {
    rep.block_degenerate = true;
  } else {
    rep.block_ratio = detail::sup_derivative_norm(blk, k, a) / (std::exp2(q * k) * blk_norm);
  }
  return rep;
}

}  // namespace blab
