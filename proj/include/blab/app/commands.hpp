#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "blab/app/ensembles.hpp"
#include "blab/boussinesq.hpp"
#include "blab/io/config.hpp"
#include "blab/io/csv.hpp"
#include "blab/io/snapshot.hpp"
#include "blab/random_fields.hpp"
#include "blab/tdsolver.hpp"

namespace blab::app {

enum ExitCode : int { kOk = 0, kAssertionFailed = 1, kUsageError = 2 };

/// Output directory plus the resolved-config echo every run leaves behind.
class RunContext {
 public:
  RunContext(const io::RunConfig& cfg, std::ostream& log) : cfg_(cfg), log_(log) {
    dir_ = cfg.str("output_dir");
    std::filesystem::create_directories(dir_);
    std::ofstream echo(dir_ / "config.resolved", std::ios::binary | std::ios::trunc);
    echo << cfg.echo();
    run_id_ = cfg.subcommand() + "-n" + std::to_string(cfg.integer("grid.n")) + "-s" +
              std::to_string(cfg.uinteger("seed"));
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  const std::string& run_id() const noexcept { return run_id_; }
  std::ostream& log() const { return log_; }

  Grid grid() const {
    return Grid(static_cast<int>(cfg_.integer("grid.n")), cfg_.number("grid.period"), cfg_.number("grid.dealias"));
  }

  /// Print a PASS/FAIL line and remember failures.
  void verdict(const std::string& name, bool ok, const std::string& detail) {
    log_ << (ok ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
    if (!ok) failed_ = true;
  }
  int exit_code() const { return failed_ ? kAssertionFailed : kOk; }

 private:
  const io::RunConfig& cfg_;
  std::ostream& log_;
  std::filesystem::path dir_;
  std::string run_id_;
  bool failed_ = false;
};

namespace detail {
inline std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}
}  // namespace detail

inline int run_simulate(const io::RunConfig& cfg, std::ostream& log) {
  RunContext ctx(cfg, log);
  const Grid g = ctx.grid();
  const DyadicPartition part(g);
  const double alpha = cfg.number("sim.alpha");
  const double dt = cfg.number("sim.dt");
  const double t_end = cfg.number("sim.t_end");

  SimState s0 = desk_initial_state(g);
  const std::string init = cfg.str("sim.initial");
  if (init == "random") {
    s0 = {Field(g), random_field(g, {cfg.number("sim.random_slope"), cfg.uinteger("seed")}), 0.0};
  } else if (init == "snapshot") {
    const io::Snapshot snap = io::read_snapshot(cfg.str("sim.snapshot_in"), g.dealias_fraction());
    if (!(snap.grid == g)) throw io::ConfigError(0, "snapshot grid does not match grid.n / grid.period");
    s0 = io::to_sim_state(snap);
  }

  AprioriMonitor monitor(part, cfg.number("sim.monitor_p"), cfg.numbers("sim.theta_p"));
  const bool budget_on = cfg.flag("sim.gamma_budget") && alpha == 1.0;
  std::optional<GammaBudgetMonitor> budget;
  if (budget_on) budget.emplace(alpha, 4.0);
  const long every = std::max<long long>(1, cfg.integer("sim.monitor_every"));
  const long snap_every = cfg.integer("sim.snapshot_every");
  const long steps = static_cast<long>(std::ceil((t_end - s0.t) / dt - 1e-9));
  long step = 0;

  run_boussinesq(s0, dt, t_end, BoussinesqConfig{alpha, cfg.number("sim.cfl_safety")}, [&](const SimState& s) {
    if (step % every == 0 || step == steps) monitor.observe(s);
    if (budget) budget->observe(s);
    if (snap_every > 0 && step % snap_every == 0) {
      io::write_snapshot(s, ctx.path("snapshot_" + std::to_string(step) + ".blab"));
    }
    if (step == steps) io::write_snapshot(s, ctx.path("final.blab"));
    ++step;
  });

  const AprioriRecord& rec = monitor.record();
  {
    io::ResultWriter out(ctx.path("apriori.csv"));
    for (const auto& [name, series] : rec.series) {
      for (std::size_t i = 0; i < series.size(); ++i) out.write({ctx.run_id(), rec.times[i], name, {}, series[i]});
    }
  }
  if (budget) {
    std::ofstream f(ctx.path("gamma_budget.csv"), std::ios::binary | std::ios::trunc);
    io::CsvWriter w(f, {"t", "residual_l2", "norm_rate", "commutator_lp", "slack", "holds"});
    for (const auto& r : budget->rows()) {
      w.row({r.t, r.residual_l2, r.norm_rate, r.commutator_lp, r.slack, std::string(r.holds ? "true" : "false")});
    }
  }
  {
    std::ofstream f(ctx.path("phi_fit.csv"), std::ios::binary | std::ios::trunc);
    io::CsvWriter w(f, {"series", "level", "c0", "slope_estimate", "min_dominating"});
    const int level = static_cast<int>(cfg.integer("sim.phi_level"));
    if (level >= 1 && level <= 3 && rec.times.size() >= 2) {
      for (const auto& [name, series] : rec.series) {
        const PhiFit fit = fit_phi(rec.times, series, level);
        w.row({name, static_cast<long long>(level), fit.c0, fit.slope_estimate, fit.min_dominating});
      }
    }
  }

  ctx.verdict("max_principle", monitor.max_principle_holds(1e-6),
              "max step increase of ||theta||_L" + detail::fmt(rec.p) + " = " +
                  detail::fmt(monitor.max_step_increase(rec.p)));
  ctx.verdict("finite", monitor.all_finite(), "all monitored series finite");
  if (budget) {
    ctx.verdict("gamma_budget", budget->holds(), "max residual " + detail::fmt(budget->max_residual()));
  }
  return ctx.exit_code();
}

/// Velocity, forcing and initial-data presets of the td-run subcommand.
struct TDPresets {
  Field theta0;
  VelocitySource velocity;
  ForcingSource forcing;
};

inline TDPresets td_presets(const io::RunConfig& cfg, const Grid& g) {
  const double k0 = g.k0();
  const double A = cfg.number("td.velocity_amplitude");
  const double F = cfg.number("td.forcing_amplitude");
  const RandomFieldSpec spec{cfg.number("td.random_slope"), cfg.uinteger("seed")};
  TDPresets p{Field(g), VelocitySource::zero(), ForcingSource::zero()};
  if (cfg.str("td.initial") == "sine") {
    p.theta0 = Field::from_function(g, [k0](double x1, double) { return std::sin(k0 * x1); });
  } else {
    p.theta0 = random_field(g, spec);
  }
  const std::string vel = cfg.str("td.velocity");
  if (vel == "shear") {
    VectorField v{Field::from_function(g, [=](double, double x2) { return A * std::sin(k0 * x2); }), Field(g)};
    p.velocity = VelocitySource::steady(std::move(v));
  } else if (vel == "cellular") {
    VectorField v{Field::from_function(g, [=](double x1, double x2) { return A * std::sin(k0 * x1) * std::cos(k0 * x2); }),
                  Field::from_function(g, [=](double x1, double x2) { return -A * std::cos(k0 * x1) * std::sin(k0 * x2); })};
    p.velocity = VelocitySource::steady(std::move(v));
  } else if (vel == "random") {
    p.velocity = VelocitySource::steady(random_velocity(g, spec, A));
  }
  const std::string force = cfg.str("td.forcing");
  if (force == "steady") {
    p.forcing = ForcingSource::steady(
        Field::from_function(g, [=](double x1, double x2) { return F * std::cos(k0 * (x1 + x2)); }));
  } else if (force == "oscillating") {
    p.forcing = ForcingSource::analytic([g, k0, F](double t) {
      return Field::from_function(
          g, [=](double x1, double x2) { return F * std::sin(k0 * x1) * std::cos(k0 * x2) * std::cos(2.0 * t); });
    });
  }
  return p;
}

inline int run_td_command(const io::RunConfig& cfg, std::ostream& log) {
  RunContext ctx(cfg, log);
  const Grid g = ctx.grid();
  const DyadicPartition part(g);
  TDPresets pre = td_presets(cfg, g);
  TDConfig tc;
  tc.alpha = cfg.number("td.alpha");
  tc.dt = cfg.number("td.dt");
  tc.t_end = cfg.number("td.t_end");
  tc.cfl_safety = cfg.number("td.cfl_safety");
  tc.dissipation = cfg.flag("td.dissipation");
  tc.stride = static_cast<int>(cfg.integer("td.stride"));
  tc.keep_states = false;
  tc.norm_p = cfg.numbers("td.norm_p");
  tc.block_p = cfg.numbers("td.block_p");
  tc.velocity = pre.velocity;
  tc.forcing = pre.forcing;
  const TDTrajectory traj = run_td(pre.theta0, tc, part);

  {
    std::ofstream f(ctx.path("norm_history.csv"), std::ios::binary | std::ios::trunc);
    io::CsvWriter w(f, {"t", "norm", "value"});
    for (const auto& [p, series] : traj.theta_norms) {
      const std::string name = AprioriMonitor::lp_name("theta", p);
      for (std::size_t i = 0; i < series.size(); ++i) w.row({traj.times[i], name, series[i]});
    }
  }

  std::vector<io::ResultRow> rows;
  auto value_or_degenerate = [](bool degenerate, double x) -> std::optional<double> {
    if (degenerate || !std::isfinite(x)) return std::nullopt;
    return x;
  };
  const double t_final = traj.times.back();
  const double block_p = tc.block_p.empty() ? 4.0 : tc.block_p.front();
  for (const auto& report : cfg.names("td.reports")) {
    if (report == "max_principle") {
      for (double p : tc.norm_p) {
        const MaxPrincipleReport mp = report_max_principle(traj, p);
        const std::string tag = "max_principle_L" + detail::fmt(p);
        rows.push_back({ctx.run_id(), t_final, tag + "_worst_margin", {}, mp.worst_margin});
        rows.push_back({ctx.run_id(), t_final, tag + "_max_rel_increase", {}, mp.max_relative_increase});
        ctx.verdict(tag, mp.holds, "worst margin " + detail::fmt(mp.worst_margin));
      }
    } else if (report == "smoothing") {
      if (traj.stride != 1) {
        log << "SKIP smoothing: needs td.stride = 1\n";
        continue;
      }
      const SmoothingReport sr = report_smoothing_effect(traj, traj.velocity, block_p);
      rows.push_back({ctx.run_id(), t_final, "smoothing_lhs", {}, sr.lhs});
      rows.push_back({ctx.run_id(), t_final, "smoothing_bracket", {}, sr.bracket});
      rows.push_back({ctx.run_id(), t_final, "smoothing_constant", sr.argmax_shell,
                      value_or_degenerate(sr.degenerate, sr.constant)});
      rows.push_back({ctx.run_id(), t_final, "smoothing_out_of_hypothesis", {}, sr.out_of_hypothesis ? 1.0 : 0.0});
      ctx.verdict("smoothing", std::isfinite(sr.lhs) && std::isfinite(sr.bracket),
                  "C = " + (sr.degenerate ? std::string("degenerate") : detail::fmt(sr.constant)) +
                      (sr.out_of_hypothesis ? " (out of hypothesis)" : ""));
    } else if (report == "log_estimate") {
      const LogEstimateReport le = report_log_estimate(traj, traj.velocity, block_p);
      rows.push_back({ctx.run_id(), t_final, "log_lhs", {}, le.lhs});
      rows.push_back({ctx.run_id(), t_final, "log_data_term", {}, le.data_term});
      rows.push_back({ctx.run_id(), t_final, "log_V", {}, le.lipschitz});
      rows.push_back({ctx.run_id(), t_final, "log_ratio", {}, value_or_degenerate(le.degenerate, le.ratio)});
      rows.push_back({ctx.run_id(), t_final, "log_exp_contrast_ratio", {},
                      value_or_degenerate(le.degenerate, le.exp_contrast_ratio)});
      rows.push_back({ctx.run_id(), t_final, "log_split_N", {}, double(le.split_n)});
      rows.push_back({ctx.run_id(), t_final, "log_split_bracket", {}, le.split_bracket});
      ctx.verdict("log_estimate", std::isfinite(le.lhs) && std::isfinite(le.ratio),
                  "ratio " + (le.degenerate ? std::string("degenerate") : detail::fmt(le.ratio)));
    } else if (report == "besov_propagation") {
      const BesovIndex idx(cfg.number("td.besov_s"), block_p, cfg.number("td.besov_r"));
      const BesovPropagationReport bp = report_besov_propagation(traj, traj.velocity, idx);
      rows.push_back({ctx.run_id(), t_final, "besov_lhs", {}, bp.lhs});
      rows.push_back({ctx.run_id(), t_final, "besov_rhs", {}, bp.rhs});
      rows.push_back({ctx.run_id(), t_final, "besov_ratio", {}, value_or_degenerate(bp.degenerate, bp.ratio)});
      ctx.verdict("besov_propagation", std::isfinite(bp.lhs) && std::isfinite(bp.rhs),
                  "ratio " + (bp.degenerate ? std::string("degenerate") : detail::fmt(bp.ratio)));
    }
  }
  io::emit_csv(rows, ctx.path("reports.csv"));
  return ctx.exit_code();
}

inline EnsembleParams ensemble_params(const io::RunConfig& cfg, const std::string& estimate) {
  EnsembleParams ep;
  ep.estimate = estimate;
  ep.samples = static_cast<int>(cfg.integer("verify.samples"));
  ep.seed = cfg.uinteger("seed");
  ep.slope = cfg.number("verify.slope");
  ep.p = cfg.number("verify.p");
  ep.r = cfg.number("verify.r");
  ep.rho = cfg.number("verify.rho");
  ep.epsilon = cfg.number("verify.epsilon");
  return ep;
}

inline int run_verify(const io::RunConfig& cfg, std::ostream& log) {
  RunContext ctx(cfg, log);
  const Grid g = ctx.grid();
  const DyadicPartition part(g);
  const long long compare_n = cfg.integer("verify.compare_n");
  std::optional<DyadicPartition> other;
  if (compare_n > 0) other.emplace(Grid(static_cast<int>(compare_n), g.period(), g.dealias_fraction()));

  io::ResultWriter out(ctx.path("verify.csv"));
  for (const auto& estimate : cfg.names("verify.estimates")) {
    const EnsembleParams ep = ensemble_params(cfg, estimate);
    const EnsembleResult res = run_ensemble(ep, part);
    for (std::size_t i = 0; i < res.reports.size(); ++i) {
      const auto& r = res.reports[i];
      std::optional<double> v;
      if (!r.degenerate) v = r.ratio;
      out.write({ctx.run_id(), 0.0, estimate + "_ratio", static_cast<long long>(i), v});
      out.write({ctx.run_id(), 0.0, estimate + "_lhs", static_cast<long long>(i), r.lhs});
      for (const auto& [name, value] : r.rhs_factors) {
        out.write({ctx.run_id(), 0.0, estimate + "_rhs_" + name, static_cast<long long>(i), value});
      }
    }
    std::string detail = "n=" + std::to_string(res.n) + " ratio in [" + detail::fmt(res.min_ratio) + ", " +
                         detail::fmt(res.max_ratio) + "], degenerate " + std::to_string(res.degenerate) + "/" +
                         std::to_string(ep.samples);
    bool ok = res.extrema_finite() && res.degenerate == 0;
    if (is_lower_bound(estimate)) ok = ok && res.min_ratio > 0.0;
    if (estimate == "conv_commutator") ok = ok && res.max_ratio <= 1.05;
    if (other) {
      const EnsembleResult res2 = run_ensemble(ep, *other);
      const double drift = resolution_drift(res, res2, is_lower_bound(estimate));
      detail += ", drift vs n=" + std::to_string(compare_n) + " " + detail::fmt(drift);
      ok = ok && res2.extrema_finite() && res2.degenerate == 0 && drift < 2.0;
    }
    ctx.verdict(estimate, ok, detail);
  }
  return ctx.exit_code();
}

inline int run_analyze(const io::RunConfig& cfg, std::ostream& log) {
  RunContext ctx(cfg, log);
  const io::Snapshot snap = io::read_snapshot(cfg.str("analyze.snapshot"), cfg.number("grid.dealias"));
  const DyadicPartition part(snap.grid);
  const std::string which = cfg.str("analyze.field");
  Field f(snap.grid);
  if (which == "gamma") {
    f = gamma(io::to_sim_state(snap));
  } else {
    f = snap.field(which);
  }
  const double p = cfg.number("analyze.p");
  const double s = cfg.number("analyze.s");
  const auto norms = block_norms(to_spectral(f), p, part);
  std::ofstream file(ctx.path("shells.csv"), std::ios::binary | std::ios::trunc);
  io::CsvWriter w(file, {"q", "norm_Lp", "weighted"});
  bool finite = true;
  for (int q = -1; q <= part.q_max(); ++q) {
    const double v = norms[static_cast<std::size_t>(q + 1)];
    finite = finite && std::isfinite(v);
    w.row({static_cast<long long>(q), v, std::exp2(q * s) * v});
  }
  ctx.verdict("analyze", finite,
              which + " at t=" + detail::fmt(snap.t) + ", B^" + detail::fmt(s) + "_{" + detail::fmt(p) +
                  ",1} = " + detail::fmt(besov_from_block_norms(norms, s, 1.0)));
  return ctx.exit_code();
}

/// Dispatch on cfg.subcommand(); configuration and input problems map to exit code 2.
inline int dispatch(const io::RunConfig& cfg, std::ostream& log, std::ostream& err) {
  try {
    const std::string sub = cfg.subcommand();
    if (sub == "simulate") return run_simulate(cfg, log);
    if (sub == "td-run") return run_td_command(cfg, log);
    if (sub == "verify") return run_verify(cfg, log);
    if (sub == "analyze") return run_analyze(cfg, log);
    err << "unknown subcommand '" << sub << "'\n";
    return kUsageError;
  } catch (const io::ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const io::SnapshotError& e) {
    err << "snapshot error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kUsageError;
  } catch (const CflViolation& e) {
    err << "FAIL cfl: " << e.what() << "\n";
    return kAssertionFailed;
  } catch (const std::exception& e) {
    err << "FAIL run aborted: " << e.what() << "\n";
    return kAssertionFailed;
  }
}

}  // namespace blab::app
