#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "blab/error.hpp"
#include "blab/ifrk4.hpp"
#include "blab/littlewood_paley.hpp"
#include "blab/paradiff.hpp"
#include "blab/series.hpp"
#include "blab/spectral_ops.hpp"

namespace blab {

/// Vorticity and temperature at time t.
struct SimState {
  Field omega;
  Field theta;
  double t = 0.0;

  const Grid& grid() const noexcept { return omega.grid; }
  VectorField velocity() const { return biot_savart(omega); }
};

struct BoussinesqConfig {
  double alpha = 1.0;
  double cfl_safety = 0.5;
};

/// Integrating-factor RK4 for d_t omega + v.grad omega = d_1 theta,
/// d_t theta + v.grad theta + |D|^alpha theta = 0, v = Biot-Savart(omega).
class BoussinesqSolver {
 public:
  explicit BoussinesqSolver(const Grid& grid, BoussinesqConfig cfg = {})
      : grid_(grid), cfg_(cfg), factor_({{}, theta_rates(grid, cfg.alpha)}) {
    check_alpha(cfg.alpha);
    if (!(cfg.cfl_safety > 0.0 && cfg.cfl_safety <= 1.0)) {
      throw std::invalid_argument("cfl_safety must lie in (0, 1]");
    }
  }

  const Grid& grid() const noexcept { return grid_; }
  const BoussinesqConfig& config() const noexcept { return cfg_; }

  /// Advance the spectral state {omega_hat, theta_hat} from t by dt.
  void step(std::vector<SpectralField>& u, double t, double dt) {
    if (u.size() != 2) throw std::invalid_argument("BoussinesqSolver::step: expected {omega, theta}");
    check_cfl(u[0], dt);
    ifrk4_step(u, t, dt, factor_, [this](double, const std::vector<SpectralField>& s) { return rhs(s); });
    for (std::size_t c = 0; c < 2; ++c) {
      for (const auto& z : u[c].coeffs) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
          throw std::runtime_error("NaN detected in Boussinesq step at t = " + std::to_string(t + dt));
        }
      }
    }
  }

  SimState step(const SimState& s, double dt) {
    require_same_grid(s.omega.grid, grid_, "BoussinesqSolver::step");
    std::vector<SpectralField> u{to_spectral(s.omega), to_spectral(s.theta)};
    step(u, s.t, dt);
    return {to_physical(u[0]), to_physical(u[1]), s.t + dt};
  }

  /// Nonlinear and coupling terms {-v.grad omega + d_1 theta, -v.grad theta}.
  std::vector<SpectralField> rhs(const std::vector<SpectralField>& s) const {
    SpectralField om = s[0];
    SpectralField th = s[1];
    dealias(om);
    dealias(th);
    const auto [v1h, v2h] = spectral::biot_savart(om);
    const Field v1 = to_physical(v1h);
    const Field v2 = to_physical(v2h);
    const Field o1 = to_physical(spectral::derivative(om, 1, 0));
    const Field o2 = to_physical(spectral::derivative(om, 0, 1));
    const Field t1 = to_physical(spectral::derivative(th, 1, 0));
    const Field t2 = to_physical(spectral::derivative(th, 0, 1));
    Field adv_o(grid_), adv_t(grid_);
    for (std::size_t i = 0; i < adv_o.values.size(); ++i) {
      adv_o.values[i] = -(v1.values[i] * o1.values[i] + v2.values[i] * o2.values[i]);
      adv_t.values[i] = -(v1.values[i] * t1.values[i] + v2.values[i] * t2.values[i]);
    }
    std::vector<SpectralField> out{to_spectral(adv_o), to_spectral(adv_t)};
    dealias(out[0]);
    dealias(out[1]);
    out[0] += spectral::derivative(s[1], 1, 0);
    return out;
  }

  static std::vector<double> theta_rates(const Grid& g, double alpha) {
    std::vector<double> r(g.spectral_size());
    for (int j2 = 0; j2 < g.n(); ++j2) {
      const int k2 = g.k2_of(j2);
      for (int j1 = 0; j1 < g.half(); ++j1) {
        const double k = g.k0() * std::sqrt(double(j1) * j1 + double(k2) * k2);
        r[static_cast<std::size_t>(j2) * g.half() + j1] = std::pow(k, alpha);
      }
    }
    return r;
  }

 private:
  void check_cfl(const SpectralField& omega_hat, double dt) const {
    const auto [v1h, v2h] = spectral::biot_savart(omega_hat);
    const double vmax = max_abs(VectorField(to_physical(v1h), to_physical(v2h)));
    if (vmax == 0.0) return;
    const double limit = cfg_.cfl_safety * grid_.spacing() / vmax;
    if (dt > limit * (1.0 + 1e-12)) throw CflViolation(vmax, dt, limit);
  }

  Grid grid_;
  BoussinesqConfig cfg_;
  IntegratingFactor factor_;
};

inline SimState bouss_step(const SimState& state, double dt, double alpha) {
  require_finite(state.omega, "bouss_step omega");
  require_finite(state.theta, "bouss_step theta");
  BoussinesqSolver solver(state.grid(), BoussinesqConfig{alpha, 0.5});
  return solver.step(state, dt);
}

/// Gamma = omega + R theta.
inline Field gamma(const SimState& s) { return s.omega + riesz_transform(s.theta); }

/// Reference initial data: theta0 = sin x1 sin x2 + 0.1 cos 2x1, omega0 = 0.
inline SimState desk_initial_state(const Grid& g) {
  const double k0 = g.k0();
  return {Field(g), Field::from_function(g, [k0](double x1, double x2) {
            return std::sin(k0 * x1) * std::sin(k0 * x2) + 0.1 * std::cos(2.0 * k0 * x1);
          }),
          0.0};
}

/// Mirror x1 -> -x1: omega -> -omega(-x1, x2), theta -> theta(-x1, x2).
inline Field reflect_x1(const Field& f) {
  const int n = f.grid.n();
  Field out(f.grid);
  for (int i2 = 0; i2 < n; ++i2) {
    for (int i1 = 0; i1 < n; ++i1) out.at(i1, i2) = f.at((n - i1) % n, i2);
  }
  return out;
}

inline SimState reflect_state(const SimState& s) {
  Field om = reflect_x1(s.omega);
  om *= -1.0;
  return {std::move(om), reflect_x1(s.theta), s.t};
}

/// S_{n_trunc} f.
inline Field truncate_initial_data(const Field& f, int n_trunc, const DyadicPartition& part) {
  if (n_trunc < 0 || n_trunc > part.q_max() + 1) {
    throw std::out_of_range("n_trunc " + std::to_string(n_trunc) + " outside [0, " +
                            std::to_string(part.q_max() + 1) + "]");
  }
  return to_physical(part.low_pass(to_spectral(f), n_trunc));
}

/// Integrate with a fixed step; observer(state) is called at t = 0 and after every step.
inline SimState run_boussinesq(SimState state, double dt, double t_end, const BoussinesqConfig& cfg,
                               const std::function<void(const SimState&)>& observer = {}) {
  if (!(dt > 0.0) || !(t_end >= state.t)) throw std::invalid_argument("run_boussinesq: bad dt or t_end");
  BoussinesqSolver solver(state.grid(), cfg);
  std::vector<SpectralField> u{to_spectral(state.omega), to_spectral(state.theta)};
  if (observer) observer(state);
  const double t0 = state.t;
  const long steps = static_cast<long>(std::ceil((t_end - t0) / dt - 1e-9));
  double t = t0;
  for (long k = 1; k <= steps; ++k) {
    const double t_next = (k == steps) ? t_end : t0 + k * dt;
    solver.step(u, t, t_next - t);
    t = t_next;
    if (observer) observer({to_physical(u[0]), to_physical(u[1]), t});
  }
  return {to_physical(u[0]), to_physical(u[1]), t};
}

/// One row of the Gamma budget, evaluated at the middle of three consecutive states.
struct GammaBudgetRow {
  double t = 0.0;
  double residual_l2 = 0.0;     // ||d_t Gamma + v.grad Gamma + [R, v.grad] theta||_{L^2}
  double norm_rate = 0.0;       // |d/dt ||Gamma||_{L^p}|
  double commutator_lp = 0.0;   // ||[R, v.grad] theta||_{L^p}
  double slack = 0.0;           // 10 dt^3 + 1e-8
  bool holds = true;            // norm_rate <= commutator_lp + slack
};

/// Streaming check of d_t Gamma + v.grad Gamma = -[R, v.grad] theta at alpha = 1.
/// Time derivatives are centered differences over equally spaced states.
class GammaBudgetMonitor {
 public:
  GammaBudgetMonitor(double alpha, double p = 4.0) : p_(p) {
    if (alpha != 1.0) throw std::invalid_argument("Gamma budget is only valid at alpha = 1");
    if (!(p >= 1.0)) throw std::invalid_argument("Gamma budget: p must be >= 1");
  }

  void observe(const SimState& s) {
    window_.push_back(s);
    if (window_.size() > 3) window_.erase(window_.begin());
    if (window_.size() == 3) evaluate();
  }

  const std::vector<GammaBudgetRow>& rows() const noexcept { return rows_; }
  bool holds() const {
    return std::all_of(rows_.begin(), rows_.end(), [](const GammaBudgetRow& r) { return r.holds; });
  }
  double max_residual() const {
    double m = 0.0;
    for (const auto& r : rows_) m = std::max(m, r.residual_l2);
    return m;
  }

 private:
  void evaluate() {
    const SimState& a = window_[0];
    const SimState& b = window_[1];
    const SimState& c = window_[2];
    const double h = 0.5 * (c.t - a.t);
    if (std::abs((b.t - a.t) - (c.t - b.t)) > 1e-9 * h) return;  // last, shortened step
    const Field ga = gamma(a);
    const Field gb = gamma(b);
    const Field gc = gamma(c);
    VectorField v = b.velocity();
    const SpectralField gb_hat = to_spectral(gb);
    const SpectralField adv = advection_spectral(v, gb_hat);
    const Field comm = commutator_riesz(v, b.theta);
    SpectralField res = to_spectral(gc);
    res -= to_spectral(ga);
    res *= 1.0 / (2.0 * h);
    res += adv;
    res += to_spectral(comm);

    GammaBudgetRow row;
    row.t = b.t;
    row.residual_l2 = std::sqrt(spectral::parseval_l2_squared(res));
    row.norm_rate = std::abs(lebesgue_norm(gc, p_) - lebesgue_norm(ga, p_)) / (2.0 * h);
    row.commutator_lp = lebesgue_norm(comm, p_);
    row.slack = 10.0 * h * h * h + 1e-8;
    row.holds = row.norm_rate <= row.commutator_lp + row.slack;
    rows_.push_back(row);
  }

  double p_;
  std::vector<SimState> window_;
  std::vector<GammaBudgetRow> rows_;
};

/// Time series of the a priori quantities, one entry per observed state.
struct AprioriRecord {
  double p = 4.0;
  bool p_in_hypothesis = true;  // p in (2, inf)
  std::vector<double> times;
  std::map<std::string, std::vector<double>> series;

  const std::vector<double>& at(const std::string& name) const {
    auto it = series.find(name);
    if (it == series.end()) throw std::invalid_argument("AprioriRecord: no series named " + name);
    return it->second;
  }
};

/// Sup over shells of ||(2^{qs} Delta_q f_c)||_{L^inf} aggregated in l^1, maximised over components.
inline double besov_inf1(const std::vector<const SpectralField*>& comps, double s, const DyadicPartition& part) {
  std::vector<double> norms(static_cast<std::size_t>(part.shell_count()), 0.0);
  for (int q = -1; q <= part.q_max(); ++q) {
    std::vector<Field> blocks;
    for (const auto* c : comps) blocks.push_back(to_physical(part.block(*c, q)));
    double m = 0.0;
    for (std::size_t i = 0; i < blocks.front().values.size(); ++i) {
      double acc = 0.0;
      for (const auto& b : blocks) acc += b.values[i] * b.values[i];
      m = std::max(m, acc);
    }
    norms[static_cast<std::size_t>(q + 1)] = std::sqrt(m);
  }
  return besov_from_block_norms(norms, s, 1.0);
}

/// Accumulates the a priori record and the running smoothing-effect quantity
/// sup_q 2^q ||Delta_q theta||_{L^1_t L^p}.
class AprioriMonitor {
 public:
  AprioriMonitor(const DyadicPartition& part, double p, std::vector<double> theta_p = {2.0, 4.0})
      : part_(part), theta_p_(std::move(theta_p)) {
    if (!(p >= 1.0)) throw std::invalid_argument("AprioriMonitor: p must be >= 1");
    rec_.p = p;
    rec_.p_in_hypothesis = p > 2.0 && std::isfinite(p);
    if (std::find(theta_p_.begin(), theta_p_.end(), p) == theta_p_.end()) theta_p_.push_back(p);
    shell_integrals_.assign(static_cast<std::size_t>(part.q_max()) + 1, 0.0);
  }

  static std::string lp_name(const char* field, double p) {
    if (std::isinf(p)) return std::string(field) + "_Linf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_L%g", field, p);
    return buf;
  }

  void observe(const SimState& s) {
    require_same_grid(s.omega.grid, part_.grid(), "AprioriMonitor");
    const double p = rec_.p;
    const SpectralField th = to_spectral(s.theta);
    const SpectralField om = to_spectral(s.omega);
    VectorField v = s.velocity();
    const SpectralField v1 = to_spectral(v.u1);
    const SpectralField v2 = to_spectral(v.u2);
    const Field comm = commutator_riesz(v, s.theta);
    const SpectralField comm_hat = to_spectral(comm);
    const Field g = gamma(s);

    rec_.times.push_back(s.t);
    for (double q : theta_p_) put(lp_name("theta", q), lebesgue_norm(s.theta, q));
    put("theta_Linf", lebesgue_norm(s.theta, infinity));
    put(lp_name("omega", p), lebesgue_norm(s.omega, p));
    put("omega_Linf", lebesgue_norm(s.omega, infinity));
    put("Rtheta_Linf", lebesgue_norm(riesz_transform(s.theta), infinity));
    put("v_Linf", max_abs(v));
    put("omega_B0inf1", besov_inf1({&om}, 0.0, part_));
    put("theta_B0inf1", besov_inf1({&th}, 0.0, part_));
    put("v_B1inf1", besov_inf1({&v1, &v2}, 1.0, part_));
    put(lp_name("comm", p), lebesgue_norm(comm, p));
    put("comm_B0inf1", besov_inf1({&comm_hat}, 0.0, part_));
    put(lp_name("gamma", p), lebesgue_norm(g, p));
    put("gamma_Linf", lebesgue_norm(g, infinity));

    const auto blocks = block_norms(th, p, part_);
    double smoothing = 0.0;
    for (int q = 0; q <= part_.q_max(); ++q) {
      const double val = blocks[static_cast<std::size_t>(q + 1)];
      auto& acc = shell_integrals_[static_cast<std::size_t>(q)];
      if (rec_.times.size() > 1) {
        const double dt = s.t - rec_.times[rec_.times.size() - 2];
        acc += 0.5 * dt * (val + prev_blocks_[static_cast<std::size_t>(q + 1)]);
      }
      smoothing = std::max(smoothing, std::exp2(q) * acc);
    }
    prev_blocks_ = blocks;
    put("smoothing", smoothing);
  }

  const AprioriRecord& record() const noexcept { return rec_; }

  /// ||theta(t)||_{L^p} <= ||theta0||_{L^p} (1 + 1e-6) for every recorded p and t.
  bool max_principle_holds(double rel_tol = 1e-6) const {
    for (const auto& [name, s] : rec_.series) {
      if (name.rfind("theta_L", 0) != 0) continue;
      for (double x : s) {
        if (x > s.front() * (1.0 + rel_tol)) return false;
      }
    }
    return true;
  }

  /// Largest relative step-to-step increase of ||theta||_{L^p}.
  double max_step_increase(double q) const {
    const auto& s = rec_.at(lp_name("theta", q));
    double worst = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (s.front() > 0.0) worst = std::max(worst, (s[i] - s[i - 1]) / s.front());
    }
    return worst;
  }

  bool all_finite() const {
    for (const auto& [name, s] : rec_.series) {
      for (double x : s) {
        if (!std::isfinite(x)) return false;
      }
    }
    return true;
  }

 private:
  void put(const std::string& name, double value) { rec_.series[name].push_back(value); }

  const DyadicPartition& part_;
  std::vector<double> theta_p_;
  AprioriRecord rec_;
  std::vector<double> shell_integrals_;
  std::vector<double> prev_blocks_;
};

struct PhiFit {
  int level = 1;
  double c0 = 0.0;
  double slope_estimate = 0.0;  // least-squares slope of the iterated logarithm
  double min_dominating = 0.0;  // smallest C0 with Phi_k >= series
};

/// Phi_k(t) = C0 exp(... exp(C0 t) ...) with k nested exponentials:
/// Phi_1 = C0 e^{C0 t}, Phi_2 = C0 e^{e^{C0 t}}, ...
inline double phi_k(int k, double c0, double t) {
  double x = c0 * t;
  for (int i = 0; i < k; ++i) x = std::exp(x);
  return c0 * x;
}

/// Least-squares log-iterate fit of Phi_k to a series, raised if needed so that Phi_k dominates.
inline PhiFit fit_phi(std::span<const double> t, std::span<const double> y, int k) {
  if (k < 1 || k > 3) throw std::invalid_argument("fit_phi: level must be 1, 2 or 3");
  if (t.size() != y.size() || t.size() < 2) throw std::invalid_argument("fit_phi: need matching series of length >= 2");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(y[i])) throw std::invalid_argument("fit_phi: non-finite sample");
  }
  PhiFit fit;
  fit.level = k;

  // log^k y ~ C0 t + const: slope by least squares over the samples where it is defined.
  double st = 0, sy = 0, stt = 0, sty = 0;
  int m = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    double z = y[i];
    bool ok = true;
    for (int j = 0; j < k; ++j) {
      if (!(z > 0.0)) {
        ok = false;
        break;
      }
      z = std::log(z);
    }
    if (!ok) continue;
    st += t[i];
    sy += z;
    stt += t[i] * t[i];
    sty += t[i] * z;
    ++m;
  }
  const double den = m * stt - st * st;
  if (m >= 2 && den > 0.0) fit.slope_estimate = std::max(0.0, (m * sty - st * sy) / den);

  auto dominates = [&](double c) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (phi_k(k, c, t[i]) < y[i]) return false;
    }
    return true;
  };
  double hi = 1.0;
  while (!dominates(hi)) {
    hi *= 2.0;
    if (!std::isfinite(phi_k(k, hi, t.back())) || hi > 1e300) break;
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (dominates(mid) ? hi : lo) = mid;
  }
  fit.min_dominating = hi;
  fit.c0 = std::max({fit.slope_estimate, fit.min_dominating, std::numeric_limits<double>::min()});
  return fit;
}

inline PhiFit fit_phi(const AprioriRecord& rec, const std::string& series, int k) {
  return fit_phi(rec.times, rec.at(series), k);
}

}  // namespace blab
