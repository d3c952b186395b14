#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "blab/error.hpp"
#include "blab/ifrk4.hpp"
#include "blab/littlewood_paley.hpp"
#include "blab/series.hpp"
#include "blab/spectral_ops.hpp"

namespace blab {

/// Prescribed velocity v(x, t): zero, steady, analytic, or interpolated snapshots.
class VelocitySource {
 public:
  using Fn = std::function<VectorField(double)>;

  static VelocitySource zero() { return VelocitySource(); }

  static VelocitySource steady(VectorField v) {
    if (!v.divergence_free && !certify_divergence_free(v)) {
      throw std::invalid_argument("velocity source must be divergence-free");
    }
    VelocitySource s;
    s.steady_ = true;
    s.fn_ = [v = std::move(v)](double) { return v; };
    return s;
  }

  /// fn(t) must return a divergence-free field; it is certified at every step start.
  static VelocitySource analytic(Fn fn) {
    VelocitySource s;
    s.fn_ = std::move(fn);
    return s;
  }

  /// Piecewise-linear interpolation in time, clamped at both ends.
  static VelocitySource from_snapshots(std::vector<double> times, std::vector<VectorField> fields) {
    if (times.empty() || times.size() != fields.size()) {
      throw std::invalid_argument("snapshot velocity: need matching nonempty times and fields");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (!(times[i] > times[i - 1])) throw std::invalid_argument("snapshot velocity: times must increase");
    }
    VelocitySource s;
    s.fn_ = [times = std::move(times), fields = std::move(fields)](double t) {
      if (t <= times.front()) return fields.front();
      if (t >= times.back()) return fields.back();
      const auto it = std::upper_bound(times.begin(), times.end(), t);
      const std::size_t i = static_cast<std::size_t>(it - times.begin());
      const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
      VectorField v((1.0 - w) * fields[i - 1].u1 + w * fields[i].u1,
                    (1.0 - w) * fields[i - 1].u2 + w * fields[i].u2);
      v.divergence_free = fields[i - 1].divergence_free && fields[i].divergence_free;
      return v;
    };
    return s;
  }

  bool is_zero() const noexcept { return !fn_; }
  bool is_steady() const noexcept { return steady_ || is_zero(); }
  VectorField at(const Grid& g, double t) const { return fn_ ? fn_(t) : VectorField::zero(g); }

 private:
  Fn fn_;
  bool steady_ = false;
};

/// Prescribed forcing f(x, t).
class ForcingSource {
 public:
  using Fn = std::function<Field(double)>;

  static ForcingSource zero() { return ForcingSource(); }
  static ForcingSource steady(Field f) {
    ForcingSource s;
    s.steady_ = true;
    s.fn_ = [f = std::move(f)](double) { return f; };
    return s;
  }
  static ForcingSource analytic(Fn fn) {
    ForcingSource s;
    s.fn_ = std::move(fn);
    return s;
  }
  static ForcingSource from_snapshots(std::vector<double> times, std::vector<Field> fields) {
    if (times.empty() || times.size() != fields.size()) {
      throw std::invalid_argument("snapshot forcing: need matching nonempty times and fields");
    }
    ForcingSource s;
    s.fn_ = [times = std::move(times), fields = std::move(fields)](double t) {
      if (t <= times.front()) return fields.front();
      if (t >= times.back()) return fields.back();
      const auto it = std::upper_bound(times.begin(), times.end(), t);
      const std::size_t i = static_cast<std::size_t>(it - times.begin());
      const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
      return (1.0 - w) * fields[i - 1] + w * fields[i];
    };
    return s;
  }

  bool is_zero() const noexcept { return !fn_; }
  bool is_steady() const noexcept { return steady_ || is_zero(); }
  Field at(const Grid& g, double t) const { return fn_ ? fn_(t) : Field(g); }

 private:
  Fn fn_;
  bool steady_ = false;
};

/// Configuration of the transport-diffusion problem
/// d_t theta + v.grad theta + |D|^alpha theta = f.
struct TDConfig {
  double alpha = 1.0;
  double dt = 1e-3;
  double t_end = 1.0;
  VelocitySource velocity = VelocitySource::zero();
  ForcingSource forcing = ForcingSource::zero();
  double cfl_safety = 0.5;
  /// Diagnostic mode: false drops the |D|^alpha term (pure transport).
  bool dissipation = true;
  /// Record every stride-th step (the first and last steps are always kept).
  int stride = 1;
  bool keep_states = true;
  std::vector<double> norm_p{2.0, 4.0, infinity};
  std::vector<double> block_p{4.0};

  void validate() const {
    check_alpha(alpha);
    if (!(dt > 0.0)) throw std::invalid_argument("TDConfig: dt must be positive");
    if (!(t_end >= dt)) throw std::invalid_argument("TDConfig: t_end must be >= dt");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw std::invalid_argument("TDConfig: cfl_safety must lie in (0, 1]");
    if (stride < 1) throw std::invalid_argument("TDConfig: stride must be >= 1");
  }
};

/// Integrating-factor RK4 stepper for the transport-diffusion equation.
class TDSolver {
 public:
  TDSolver(const Grid& grid, TDConfig cfg)
      : grid_(grid), cfg_(std::move(cfg)), factor_({decay_rates(grid, cfg_)}) {
    cfg_.validate();
  }

  const TDConfig& config() const noexcept { return cfg_; }

  /// Advance theta_hat from t to t + dt.
  SpectralField step(const SpectralField& theta, double t, double dt) {
    require_same_grid(theta.grid, grid_, "TDSolver::step");
    prepare_velocity(t, dt);
    std::vector<SpectralField> u{theta};
    ifrk4_step(u, t, dt, factor_, [&](double ts, const std::vector<SpectralField>& s) {
      return std::vector<SpectralField>{rhs(ts, s[0])};
    });
    for (const auto& c : u[0].coeffs) {
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
        throw std::runtime_error("NaN detected in transport-diffusion step at t = " + std::to_string(t + dt));
      }
    }
    return std::move(u[0]);
  }

  static std::vector<double> decay_rates(const Grid& g, const TDConfig& cfg) {
    if (!cfg.dissipation) return {};
    std::vector<double> r(g.spectral_size());
    const double k0 = g.k0();
    for (int j2 = 0; j2 < g.n(); ++j2) {
      const int k2 = g.k2_of(j2);
      for (int j1 = 0; j1 < g.half(); ++j1) {
        const double k = k0 * std::sqrt(double(j1) * j1 + double(k2) * k2);
        r[static_cast<std::size_t>(j2) * g.half() + j1] = std::pow(k, cfg.alpha);
      }
    }
    return r;
  }

 private:
  struct DealiasedVelocity {
    Field u1, u2;
  };

  DealiasedVelocity dealiased_velocity(double t) const {
    VectorField v = cfg_.velocity.at(grid_, t);
    return {dealiased(v.u1), dealiased(v.u2)};
  }

  void check_cfl(const VectorField& v, double dt) const {
    const double vmax = max_abs(v);
    if (vmax == 0.0) return;
    const double limit = cfg_.cfl_safety * grid_.spacing() / vmax;
    if (dt > limit * (1.0 + 1e-12)) throw CflViolation(vmax, dt, limit);
  }

  void prepare_velocity(double t, double dt) {
    if (cfg_.velocity.is_zero()) return;
    if (cfg_.velocity.is_steady()) {
      if (!steady_) {
        VectorField v = cfg_.velocity.at(grid_, t);
        steady_ = DealiasedVelocity{dealiased(v.u1), dealiased(v.u2)};
      }
      check_cfl(VectorField(steady_->u1, steady_->u2), dt);
      return;
    }
    for (double ts : {t, t + 0.5 * dt, t + dt}) {
      VectorField v = cfg_.velocity.at(grid_, ts);
      if (ts == t && !v.divergence_free && !certify_divergence_free(v)) {
        throw std::invalid_argument("velocity source returned a field that is not divergence-free");
      }
      check_cfl(v, dt);
    }
  }

  SpectralField rhs(double t, const SpectralField& theta) {
    SpectralField out(grid_);
    if (!cfg_.velocity.is_zero()) {
      const DealiasedVelocity v = cfg_.velocity.is_steady() ? *steady_ : dealiased_velocity(t);
      SpectralField th = theta;
      dealias(th);
      const Field d1 = to_physical(spectral::derivative(th, 1, 0));
      const Field d2 = to_physical(spectral::derivative(th, 0, 1));
      Field adv(grid_);
      for (std::size_t i = 0; i < adv.values.size(); ++i) {
        adv.values[i] = -(v.u1.values[i] * d1.values[i] + v.u2.values[i] * d2.values[i]);
      }
      out = to_spectral(adv);
      dealias(out);
    }
    if (!cfg_.forcing.is_zero()) {
      if (cfg_.forcing.is_steady()) {
        if (!steady_forcing_) steady_forcing_ = to_spectral(cfg_.forcing.at(grid_, t));
        out += *steady_forcing_;
      } else {
        out += to_spectral(cfg_.forcing.at(grid_, t));
      }
    }
    return out;
  }

  Grid grid_;
  TDConfig cfg_;
  IntegratingFactor factor_;
  std::optional<DealiasedVelocity> steady_;
  std::optional<SpectralField> steady_forcing_;
};

/// One step with velocity and forcing frozen over the step.
inline Field td_step(const Field& theta, const VectorField& v, const Field& f, TDConfig cfg) {
  require_finite(theta, "td_step theta");
  cfg.velocity = max_abs(v) == 0.0 ? VelocitySource::zero() : VelocitySource::steady(v);
  cfg.forcing = max_abs(f) == 0.0 ? ForcingSource::zero() : ForcingSource::steady(f);
  cfg.t_end = std::max(cfg.t_end, cfg.dt);
  TDSolver solver(theta.grid, std::move(cfg));
  return to_physical(solver.step(to_spectral(theta), 0.0, solver.config().dt));
}

/// Velocity diagnostics sampled alongside a trajectory.
struct VelocityHistory {
  std::vector<double> times;
  std::map<double, std::vector<double>> omega_norms;  // ||omega(t)||_{L^p}
  std::vector<double> grad_inf;                       // ||grad v(t)||_{L^inf}

  /// V(t) = int_0^t ||grad v||_{L^inf}.
  std::vector<double> lipschitz_integral() const { return cumulative_trapezoid(times, grad_inf); }
};

struct TDTrajectory {
  Grid grid;
  double alpha = 1.0;
  int stride = 1;
  std::vector<double> times;
  std::vector<Field> states;
  std::map<double, std::vector<double>> theta_norms;
  std::map<double, BlockHistory> theta_blocks;
  std::map<double, std::vector<double>> forcing_norms;
  std::map<double, BlockHistory> forcing_blocks;
  VelocityHistory velocity;

  const std::vector<double>& norm_series(double p) const {
    auto it = theta_norms.find(p);
    if (it == theta_norms.end()) throw std::invalid_argument("trajectory has no L^p history for this p");
    return it->second;
  }
  const BlockHistory& blocks(double p) const {
    auto it = theta_blocks.find(p);
    if (it == theta_blocks.end()) throw std::invalid_argument("trajectory has no block history for this p");
    return it->second;
  }
};

/// Integrate from theta0 to cfg.t_end, recording norm, block and velocity histories.
inline TDTrajectory run_td(const Field& theta0, TDConfig cfg, const DyadicPartition& part) {
  require_finite(theta0, "run_td initial data");
  require_same_grid(theta0.grid, part.grid(), "run_td partition");
  cfg.validate();
  const Grid& g = theta0.grid;
  std::vector<double> norm_p = cfg.norm_p;
  for (double p : cfg.block_p) norm_p.push_back(p);
  norm_p.push_back(infinity);
  std::sort(norm_p.begin(), norm_p.end());
  norm_p.erase(std::unique(norm_p.begin(), norm_p.end()), norm_p.end());

  TDTrajectory traj{g, cfg.alpha, cfg.stride, {}, {}, {}, {}, {}, {}, {}};
  for (double p : norm_p) {
    traj.theta_norms[p];
    traj.forcing_norms[p];
    traj.velocity.omega_norms[p];
  }
  for (double p : cfg.block_p) {
    traj.theta_blocks.emplace(p, BlockHistory(p, part.q_max()));
    traj.forcing_blocks.emplace(p, BlockHistory(p, part.q_max()));
  }

  auto record = [&](double t, const SpectralField& theta_hat) {
    const Field theta = to_physical(theta_hat);
    traj.times.push_back(t);
    if (cfg.keep_states) traj.states.push_back(theta);
    for (double p : norm_p) traj.theta_norms[p].push_back(lebesgue_norm(theta, p));
    for (double p : cfg.block_p) traj.theta_blocks.at(p).push(t, block_norms(theta_hat, p, part));

    const Field f = cfg.forcing.at(g, t);
    const SpectralField f_hat = to_spectral(f);
    for (double p : norm_p) traj.forcing_norms[p].push_back(lebesgue_norm(f, p));
    for (double p : cfg.block_p) traj.forcing_blocks.at(p).push(t, block_norms(f_hat, p, part));

    const VectorField v = cfg.velocity.at(g, t);
    const Field omega = curl(v);
    traj.velocity.times.push_back(t);
    for (double p : norm_p) traj.velocity.omega_norms[p].push_back(lebesgue_norm(omega, p));
    traj.velocity.grad_inf.push_back(gradient_norm(v, infinity));
  };

  TDSolver solver(g, cfg);
  SpectralField theta = to_spectral(theta0);
  const long steps = static_cast<long>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
  double t = 0.0;
  record(t, theta);
  for (long k = 1; k <= steps; ++k) {
    const double t_next = (k == steps) ? cfg.t_end : k * cfg.dt;
    theta = solver.step(theta, t, t_next - t);
    t = t_next;
    if (k % cfg.stride == 0 || k == steps) record(t, theta);
  }
  return traj;
}

struct MaxPrincipleReport {
  double p = 2.0;
  /// margin_i = ||theta(t_i)|| - ||theta0|| - int_0^{t_i} ||f||; one per recorded time.
  std::vector<double> margins;
  std::vector<double> tolerances;
  /// Largest margin over t > 0.
  double worst_margin = 0.0;
  /// Largest step-to-step growth of ||theta|| beyond the forcing input, relative to ||theta0||.
  double max_relative_increase = 0.0;
  bool holds = true;
};

/// ||theta(t)||_{L^p} <= ||theta0||_{L^p} + int_0^t ||f||_{L^p}, checked at every recorded time.
inline MaxPrincipleReport report_max_principle(const TDTrajectory& traj, double p) {
  const auto& norms = traj.norm_series(p);
  const auto& fnorms = traj.forcing_norms.at(p);
  const auto& t = traj.times;
  const auto integral = cumulative_trapezoid(t, fnorms);
  MaxPrincipleReport rep;
  rep.p = p;
  const double base = norms.front();
  double slack = 0.0;
  rep.worst_margin = -infinity;
  for (std::size_t i = 0; i < t.size(); ++i) {
    // Trapezoid error estimate from the local second difference of ||f||.
    if (i >= 1 && i + 1 < t.size()) {
      slack += (t[i + 1] - t[i - 1]) / 24.0 * std::abs(fnorms[i + 1] - 2.0 * fnorms[i] + fnorms[i - 1]);
    }
    const double margin = norms[i] - base - integral[i];
    const double tol = 1e-6 * base + slack;
    rep.margins.push_back(margin);
    rep.tolerances.push_back(tol);
    if (i > 0) rep.worst_margin = std::max(rep.worst_margin, margin);
    if (margin > tol) rep.holds = false;
    if (i > 0 && base > 0.0) {
      const double growth = norms[i] - norms[i - 1] - (integral[i] - integral[i - 1]);
      rep.max_relative_increase = std::max(rep.max_relative_increase, growth / base);
    }
  }
  if (t.size() < 2) rep.worst_margin = 0.0;
  return rep;
}

struct SmoothingReport {
  double lhs = 0.0;       // sup_{q>=0} 2^q ||Delta_q theta||_{L^1_t L^p}
  double bracket = 0.0;   // ||theta0||_p + ||theta0||_inf ||omega||_{L^1_t L^p}
  double constant = 0.0;  // lhs / bracket
  int argmax_shell = 0;
  bool degenerate = false;
  bool out_of_hypothesis = false;
};

/// Empirical constant of the L^1-in-time smoothing effect.
inline SmoothingReport report_smoothing_effect(const TDTrajectory& traj, const VelocityHistory& vel, double p) {
  if (!(p >= 1.0) || std::isinf(p)) throw std::invalid_argument("smoothing report: p must lie in [1, inf)");
  if (traj.stride != 1) throw std::invalid_argument("smoothing report needs an undecimated trajectory (stride 1)");
  const BlockHistory& blocks = traj.blocks(p);
  SmoothingReport rep;
  rep.out_of_hypothesis = traj.alpha != 1.0;
  for (double f : traj.forcing_norms.at(p)) {
    if (f != 0.0) rep.out_of_hypothesis = true;
  }
  for (int q = 0; q <= blocks.q_max(); ++q) {
    const double val = std::exp2(q) * trapezoid(blocks.times(), blocks.shell(q));
    if (val > rep.lhs) {
      rep.lhs = val;
      rep.argmax_shell = q;
    }
  }
  const double theta_p = traj.norm_series(p).front();
  const double theta_inf = traj.norm_series(infinity).front();
  rep.bracket = theta_p + theta_inf * trapezoid(vel.times, vel.omega_norms.at(p));
  if (rep.bracket > 0.0) {
    rep.constant = rep.lhs / rep.bracket;
  } else {
    rep.degenerate = true;
  }
  return rep;
}

struct LogEstimateReport {
  double lhs = 0.0;        // ||theta||_{tilde L^inf_t B^0_{p,1}}
  double data_term = 0.0;  // ||theta0||_{B^0_{p,1}} + ||f||_{L^1_t B^0_{p,1}}
  double lipschitz = 0.0;  // V(t) = int_0^t ||grad v||_inf
  double ratio = 0.0;      // lhs / (data (1 + V))
  double exp_contrast_ratio = 0.0;  // lhs / (data e^V)
  int split_n = 1;         // N = [2 C V / log 2] + 1
  double split_bracket = 0.0;  // 2^{-N/2} e^{C V} + N
  bool degenerate = false;
};

namespace detail {
inline std::vector<double> besov_series(const BlockHistory& h, double s, double r) {
  std::vector<double> out(h.size());
  std::vector<double> norms(static_cast<std::size_t>(h.q_max()) + 2);
  for (std::size_t k = 0; k < h.size(); ++k) {
    for (int q = -1; q <= h.q_max(); ++q) norms[static_cast<std::size_t>(q + 1)] = h.shell(q)[k];
    out[k] = besov_from_block_norms(norms, s, r);
  }
  return out;
}
}  // namespace detail

/// Logarithmic (linear-in-V) estimate for the B^0_{p,1} norm, with the
/// exponential Besov-propagation bound evaluated for contrast.
inline LogEstimateReport report_log_estimate(const TDTrajectory& traj, const VelocityHistory& vel, double p,
                                             double split_constant = 1.0) {
  const BlockHistory& blocks = traj.blocks(p);
  LogEstimateReport rep;
  rep.lhs = spacetime_besov(blocks, BesovIndex(0.0, p, 1.0), infinity, true);
  const auto theta_b = detail::besov_series(blocks, 0.0, 1.0);
  const auto forcing_b = detail::besov_series(traj.forcing_blocks.at(p), 0.0, 1.0);
  rep.data_term = theta_b.front() + trapezoid(blocks.times(), forcing_b);
  rep.lipschitz = trapezoid(vel.times, vel.grad_inf);
  rep.split_n = static_cast<int>(std::floor(2.0 * split_constant * rep.lipschitz / std::log(2.0))) + 1;
  rep.split_bracket = std::exp2(-0.5 * rep.split_n) * std::exp(split_constant * rep.lipschitz) + rep.split_n;
  if (rep.data_term > 0.0) {
    rep.ratio = rep.lhs / (rep.data_term * (1.0 + rep.lipschitz));
    rep.exp_contrast_ratio = rep.lhs / (rep.data_term * std::exp(rep.lipschitz));
  } else {
    rep.degenerate = true;
  }
  return rep;
}

struct BesovPropagationReport {
  double lhs = 0.0;  // ||theta||_{tilde L^inf_t B^s_{p,r}}
  double rhs = 0.0;  // e^{V(t)} (||theta0||_{B^s_{p,r}} + int e^{-V} ||f||_{B^s_{p,r}})
  double ratio = 0.0;
  double lipschitz = 0.0;
  bool degenerate = false;
};

inline BesovPropagationReport report_besov_propagation(const TDTrajectory& traj, const VelocityHistory& vel,
                                                       const BesovIndex& idx) {
  if (!(idx.s > -1.0 && idx.s < 1.0)) throw std::invalid_argument("Besov propagation: s must lie in (-1, 1)");
  const BlockHistory& blocks = traj.blocks(idx.p);
  BesovPropagationReport rep;
  rep.lhs = spacetime_besov(blocks, idx, infinity, true);
  const auto theta_b = detail::besov_series(blocks, idx.s, idx.r);
  const auto forcing_b = detail::besov_series(traj.forcing_blocks.at(idx.p), idx.s, idx.r);
  const auto V = vel.lipschitz_integral();
  std::vector<double> weighted(forcing_b.size());
  for (std::size_t i = 0; i < weighted.size(); ++i) weighted[i] = std::exp(-V[i]) * forcing_b[i];
  rep.lipschitz = V.back();
  rep.rhs = std::exp(V.back()) * (theta_b.front() + trapezoid(blocks.times(), weighted));
  if (rep.rhs > 0.0) {
    rep.ratio = rep.lhs / rep.rhs;
  } else {
    rep.degenerate = true;
  }
  return rep;
}

}  // namespace blab
