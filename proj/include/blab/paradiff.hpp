#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "blab/littlewood_paley.hpp"
#include "blab/spectral_ops.hpp"

namespace blab {

/// uv = T_u v + T_v u + R(u, v).
struct BonySplit {
  Field T_uv;
  Field T_vu;
  Field remainder;
};

/// Bony decomposition with pointwise grid products, so the three pieces sum
/// to the grid product u * v up to roundoff.
inline BonySplit bony_split(const Field& u, const Field& v, const DyadicPartition& part) {
  require_same_grid(u.grid, v.grid, "bony_split");
  require_same_grid(u.grid, part.grid(), "bony_split partition");
  const auto bu = dyadic_blocks(to_spectral(u), part);
  const auto bv = dyadic_blocks(to_spectral(v), part);
  const int shells = part.shell_count();
  auto blk = [](const std::vector<Field>& b, int q) -> const Field& {
    return b[static_cast<std::size_t>(q + 1)];
  };

  BonySplit out{Field(u.grid), Field(u.grid), Field(u.grid)};
  // Running S_{q-1} for both factors.
  Field su(u.grid), sv(u.grid);
  for (int q = 1; q < shells - 1; ++q) {
    su += blk(bu, q - 2);
    sv += blk(bv, q - 2);
    out.T_uv += pointwise_product(su, blk(bv, q));
    out.T_vu += pointwise_product(sv, blk(bu, q));
  }
  for (int q = -1; q <= part.q_max(); ++q) {
    Field tilde = blk(bv, q);
    if (q - 1 >= -1) tilde += blk(bv, q - 1);
    if (q + 1 <= part.q_max()) tilde += blk(bv, q + 1);
    out.remainder += pointwise_product(blk(bu, q), tilde);
  }
  return out;
}

struct ReportMetadata {
  std::uint64_t seed = 0;
  int n = 0;
  double slope = 0.0;
  std::string params;
};

/// One checked estimate: ratio = lhs / product(rhs_factors).
struct InequalityReport {
  std::string estimate;
  double lhs = 0.0;
  std::vector<std::pair<std::string, double>> rhs_factors;
  double ratio = 0.0;
  /// Right side vanishes (0/0 or x/0); never silently dropped.
  bool degenerate = false;
  ReportMetadata meta;

  double rhs() const {
    double r = 1.0;
    for (const auto& f : rhs_factors) r *= f.second;
    return r;
  }
};

inline InequalityReport make_report(std::string estimate, double lhs,
                                    std::vector<std::pair<std::string, double>> factors) {
  InequalityReport rep;
  rep.estimate = std::move(estimate);
  rep.lhs = lhs;
  rep.rhs_factors = std::move(factors);
  const double rhs = rep.rhs();
  if (!(rhs > std::numeric_limits<double>::min()) || !std::isfinite(rhs) || !std::isfinite(lhs)) {
    rep.degenerate = true;
    rep.ratio = 0.0;
  } else {
    rep.ratio = lhs / rhs;
  }
  return rep;
}

namespace detail {
inline void require_certified(const VectorField& v, const char* what) {
  if (!v.divergence_free) {
    throw std::invalid_argument(std::string(what) +
                                ": velocity must be certified divergence-free");
  }
}
}  // namespace detail

/// [R, v.grad] theta = R(v.grad theta) - v.grad(R theta), dealiased products.
inline Field commutator_riesz(const VectorField& v, const Field& theta) {
  detail::require_certified(v, "commutator_riesz");
  require_finite(theta, "commutator_riesz theta");
  require_same_grid(v.grid(), theta.grid, "commutator_riesz");
  const SpectralField th = to_spectral(theta);
  SpectralField out = spectral::riesz(advection_spectral(v, th));
  out -= advection_spectral(v, spectral::riesz(th));
  return to_physical(out);
}

/// [Delta_q, v.grad] theta = Delta_q(v.grad theta) - v.grad(Delta_q theta).
inline Field commutator_block(const VectorField& v, const Field& theta, int q, const DyadicPartition& part) {
  part.check_shell(q);
  detail::require_certified(v, "commutator_block");
  require_finite(theta, "commutator_block theta");
  const SpectralField th = to_spectral(theta);
  SpectralField out = part.block(advection_spectral(v, th), q);
  out -= advection_spectral(v, part.block(th, q));
  return to_physical(out);
}

/// ||[R, v.grad]theta||_{B^0_{p,r}} against ||grad v||_{L^p} (||theta||_{B^0_{inf,r}} + ||theta||_{L^p}).
inline InequalityReport check_riesz_commutator(const VectorField& v, const Field& theta, double p,
                                                   double r, const DyadicPartition& part) {
  if (!(p >= 2.0) || std::isinf(p)) throw std::invalid_argument("riesz_commutator: p must lie in [2, inf)");
  const Field comm = commutator_riesz(v, theta);
  const double lhs = besov_norm(comm, BesovIndex(0.0, p, r), part);
  return make_report("riesz_commutator", lhs,
                     {{"grad_v_Lp", gradient_norm(v, p)},
                      {"theta_B0_inf_r+theta_Lp",
                       besov_norm(theta, BesovIndex(0.0, infinity, r), part) + lebesgue_norm(theta, p)}});
}

/// ||[R, v.grad]theta||_{B^0_{inf,r}} against
/// (||w||_inf + ||w||_rho)(||theta||_{B^eps_{inf,r}} + ||theta||_rho).
inline InequalityReport check_riesz_commutator_besov(const VectorField& v, const Field& theta, double rho,
                                                   double epsilon, double r, const DyadicPartition& part) {
  if (!(rho > 1.0) || std::isinf(rho)) throw std::invalid_argument("riesz_commutator_besov: rho must lie in (1, inf)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("riesz_commutator_besov: epsilon must be positive");
  const Field comm = commutator_riesz(v, theta);
  const double lhs = besov_norm(comm, BesovIndex(0.0, infinity, r), part);
  const Field omega = curl(v);
  return make_report("riesz_commutator_besov", lhs,
                     {{"omega_Linf+omega_Lrho", lebesgue_norm(omega, infinity) + lebesgue_norm(omega, rho)},
                      {"theta_Beps_inf_r+theta_Lrho",
                       besov_norm(theta, BesovIndex(epsilon, infinity, r), part) + lebesgue_norm(theta, rho)}});
}

struct ShellReports {
  std::vector<InequalityReport> per_shell;  // entry i holds shell i - 1
  InequalityReport worst;
};

/// ||[Delta_q, v.grad]theta||_{L^p} against ||grad v||_{L^p} ||theta||_{B^0_{inf,inf}}, every shell.
inline ShellReports check_block_commutator(const VectorField& v, const Field& theta, double p,
                                             const DyadicPartition& part) {
  if (!(p >= 1.0)) throw std::invalid_argument("block_commutator: p must be >= 1");
  const double grad = gradient_norm(v, p);
  const double theta_b = besov_norm(theta, BesovIndex(0.0, infinity, infinity), part);
  ShellReports out;
  int worst = -1;
  for (int q = -1; q <= part.q_max(); ++q) {
    const double lhs = lebesgue_norm(commutator_block(v, theta, q, part), p);
    auto rep = make_report("block_commutator", lhs, {{"grad_v_Lp", grad}, {"theta_B0_inf_inf", theta_b}});
    rep.meta.params = "q=" + std::to_string(q);
    if (!rep.degenerate && (worst < 0 || rep.ratio > out.per_shell[static_cast<std::size_t>(worst)].ratio)) {
      worst = static_cast<int>(out.per_shell.size());
    }
    out.per_shell.push_back(std::move(rep));
  }
  out.worst = out.per_shell[static_cast<std::size_t>(worst < 0 ? 0 : worst)];
  return out;
}

/// Periodic convolution (h * g)(x) = integral over the torus of h(x - y) g(y) dy.
inline Field periodic_convolution(const Field& h, const Field& g) {
  require_same_grid(h.grid, g.grid, "periodic_convolution");
  SpectralField hs = to_spectral(h);
  const SpectralField gs = to_spectral(g);
  const double area = h.grid.period() * h.grid.period();
  for (std::size_t i = 0; i < hs.coeffs.size(); ++i) hs.coeffs[i] *= gs.coeffs[i] * area;
  return to_physical(hs);
}

/// |x| h(x) with |x| the periodic distance to the origin.
inline Field moment_weighted(const Field& h) {
  const double L = h.grid.period();
  Field out(h.grid);
  const int n = h.grid.n();
  for (int i2 = 0; i2 < n; ++i2) {
    const double x2 = std::min(h.grid.x(i2), L - h.grid.x(i2));
    for (int i1 = 0; i1 < n; ++i1) {
      const double x1 = std::min(h.grid.x(i1), L - h.grid.x(i1));
      out.at(i1, i2) = std::hypot(x1, x2) * h.at(i1, i2);
    }
  }
  return out;
}

inline double conjugate_exponent(double m) {
  if (std::isinf(m)) return 1.0;
  if (m == 1.0) return infinity;
  return m / (m - 1.0);
}

/// ||h*(fg) - f(h*g)||_{L^p} against ||x h||_{L^{m'}} ||grad f||_{L^p} ||g||_{L^m}; constant exactly 1.
inline InequalityReport check_conv_commutator(const Field& h, const Field& f, const Field& g, double p,
                                              double m) {
  if (!(m >= 1.0) || !(p >= 1.0)) throw std::invalid_argument("conv_commutator: exponents must be >= 1");
  const double m_conj = conjugate_exponent(m);
  if (p < m_conj) throw std::invalid_argument("conv_commutator: need p >= m' (conjugate of m)");
  require_finite(h, "conv_commutator h");
  require_finite(f, "conv_commutator f");
  require_finite(g, "conv_commutator g");
  const Field lhs_field = periodic_convolution(h, pointwise_product(f, g)) -
                          pointwise_product(f, periodic_convolution(h, g));
  const SpectralField fs = to_spectral(f);
  const Field f1 = to_physical(spectral::derivative(fs, 1, 0));
  const Field f2 = to_physical(spectral::derivative(fs, 0, 1));
  Field grad(f.grid);
  for (std::size_t i = 0; i < grad.values.size(); ++i) grad.values[i] = std::hypot(f1.values[i], f2.values[i]);
  return make_report("conv_commutator", lebesgue_norm(lhs_field, p),
                     {{"xh_Lm'", lebesgue_norm(moment_weighted(h), m_conj)},
                      {"grad_f_Lp", lebesgue_norm(grad, p)},
                      {"g_Lm", lebesgue_norm(g, m)}});
}

namespace detail {

/// Copy a spectrum onto a finer m x m grid (zero padding); Nyquist lines dropped.
inline SpectralField pad_spectrum(const SpectralField& s, int m) {
  const Grid fine(m, s.grid.period(), s.grid.dealias_fraction());
  SpectralField out(fine);
  s.for_each_mode([&](int j1, int, int k1, int k2, const Complex& c) {
    if (s.grid.on_nyquist(k1, k2)) return;
    out.at(j1, ((k2 % m) + m) % m) = c;
  });
  return out;
}

inline int max_axis_wavenumber(const SpectralField& s) {
  double peak = 0.0;
  for (const auto& c : s.coeffs) peak = std::max(peak, std::abs(c));
  int k = 0;
  s.for_each_mode([&](int, int, int k1, int k2, const Complex& c) {
    if (std::abs(c) > 1e-15 * peak) k = std::max({k, std::abs(k1), std::abs(k2)});
  });
  return k;
}

}  // namespace detail

/// int (|D| theta_q) |theta_q|^{p-2} theta_q dx against 2^q ||theta_q||_{L^p}^p, even p only.
///
/// Both integrals are evaluated on a zero-padded grid fine enough that the
/// degree-p trigonometric products are integrated exactly.
inline InequalityReport check_generalized_bernstein(const Field& theta_q, int q, int p,
                                                    const DyadicPartition& part) {
  if (p < 2 || p % 2 != 0) throw std::invalid_argument("gen_bernstein: p must be an even integer >= 2");
  part.check_shell(q);
  if (q < 0) throw std::out_of_range("gen_bernstein: shell must be >= 0");
  require_finite(theta_q, "gen_bernstein theta_q");
  const SpectralField s = to_spectral(theta_q);
  const int kmax = detail::max_axis_wavenumber(s);
  int m = theta_q.grid.n();
  while (m < p * kmax + 1) m *= 2;
  const SpectralField padded = detail::pad_spectrum(s, m);
  const Field th = to_physical(padded);
  const Field dth = to_physical(spectral::abs_derivative_power(padded, 1.0));
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < th.values.size(); ++i) {
    const double t = th.values[i];
    const double tp1 = std::pow(t, p - 1);
    num += dth.values[i] * tp1;
    den += tp1 * t;
  }
  const double area = th.grid.cell_area();
  auto rep = make_report("gen_bernstein", num * area, {{"2^q", std::exp2(q)}, {"theta_Lp^p", den * area}});
  rep.meta.params = "q=" + std::to_string(q) + ",p=" + std::to_string(p);
  return rep;
}

}  // namespace blab
