// Acceptance suite: one PASS/FAIL line per criterion, exit code 1 if any fails.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "blab/app/commands.hpp"
#include "blab/app/ensembles.hpp"
#include "blab/boussinesq.hpp"
#include "blab/paradiff.hpp"
#include "blab/random_fields.hpp"
#include "blab/tdsolver.hpp"
#include "support/manufactured.hpp"

using namespace blab;
using namespace blab::app;

namespace {

const double kTwoPi = 2.0 * std::numbers::pi;

// Pinned tolerances.
constexpr double kMultiplierTol = 1e-12;
constexpr double kPartitionTol = 1e-10;
constexpr double kBonyTol = 1e-10;
constexpr double kDecayTol = 1e-8;
constexpr double kOrderTarget = 4.0;
constexpr double kOrderBand = 0.2;
constexpr double kSelfConvergenceMin = 3.8;
constexpr double kMaxPrincipleRel = 1e-6;
constexpr double kDriftMax = 2.0;
constexpr double kConvMax = 1.05;
constexpr double kResidualOrderMin = 2.0;
constexpr double kLogRatioGrowthMax = 3.0;
constexpr double kReflectionTol = 1e-10;
constexpr double kResolutionRel = 0.01;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// Shared desk run at n = 256: theta norms, Gamma budget and final vorticity.
struct DeskRun {
  bool done = false;
  double seconds = 0.0;
  double worst_increase = 0.0;  // largest relative step increase of ||theta||_p, p in {2, 4, inf}
  bool budget_holds = false;
  std::size_t budget_rows = 0;
  std::size_t budget_failures = 0;
  double max_residual = 0.0;
  std::vector<std::pair<double, double>> residuals;  // (t, ||residual||_2) per interior step
  double omega_inf = 0.0;
};

double rel_step_increase(const std::vector<double>& s) {
  double worst = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) worst = std::max(worst, (s[i] - s[i - 1]) / s[i - 1]);
  return worst;
}

/// Largest step increase of ||theta||_{L^p} over p in {2, 4, inf}, plus the Gamma budget if requested.
struct NormTracker {
  std::vector<double> n2, n4, ninf;
  void observe(const SimState& s) {
    n2.push_back(lebesgue_norm(s.theta, 2.0));
    n4.push_back(lebesgue_norm(s.theta, 4.0));
    ninf.push_back(lebesgue_norm(s.theta, infinity));
  }
  double worst() const { return std::max({rel_step_increase(n2), rel_step_increase(n4), rel_step_increase(ninf)}); }
};

DeskRun& desk_run() {
  static DeskRun run;
  if (run.done) return run;
  const auto t0 = std::chrono::steady_clock::now();
  const Grid g(256, kTwoPi);
  NormTracker norms;
  GammaBudgetMonitor budget(1.0, 4.0);
  const SimState fin = run_boussinesq(desk_initial_state(g), 2e-3, 5.0, {}, [&](const SimState& s) {
    norms.observe(s);
    budget.observe(s);
  });
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  run.worst_increase = norms.worst();
  run.budget_holds = budget.holds();
  run.budget_rows = budget.rows().size();
  for (const auto& r : budget.rows()) run.budget_failures += r.holds ? 0 : 1;
  run.max_residual = budget.max_residual();
  for (const auto& r : budget.rows()) run.residuals.emplace_back(r.t, r.residual_l2);
  run.omega_inf = lebesgue_norm(fin.omega, infinity);
  run.done = true;
  return run;
}

Field mode(const Grid& g, int k1, int k2, bool cosine) {
  return Field::from_function(g, [=](double x1, double x2) {
    const double ph = k1 * x1 + k2 * x2;
    return cosine ? std::cos(ph) : std::sin(ph);
  });
}

Outcome multiplier_exactness() {
  const Grid g(64, kTwoPi);
  double worst = 0.0;
  auto rel = [&](const Field& got, const Field& want, double scale) {
    worst = std::max(worst, max_abs(got - want) / scale);
  };
  const std::vector<std::pair<int, int>> modes{{1, 0}, {0, 3}, {3, -4}, {5, 12}, {-7, 2}, {20, 0}};
  for (auto [k1, k2] : modes) {
    const double r = std::hypot(double(k1), double(k2));
    const Field c = mode(g, k1, k2, true), s = mode(g, k1, k2, false);
    for (double alpha : {0.5, 1.0, 1.5, 2.0}) rel(fractional_laplacian(c, alpha), std::pow(r, alpha) * c, std::pow(r, alpha));
    rel(riesz_transform(s), (k1 / r) * c, 1.0);
    rel(partial_derivative(s, 1), double(k1) * c, r);
    rel(partial_derivative(s, 2), double(k2) * c, r);
    const VectorField v = biot_savart(c);
    rel(v.u1, (-k2 / (r * r)) * s, 1.0 / r);
    rel(v.u2, (k1 / (r * r)) * s, 1.0 / r);
  }
  return {worst <= kMultiplierTol, "max relative error " + fmt(worst)};
}

Outcome partition_of_unity() {
  double worst_unity = 0.0;
  for (int n : {64, 128, 256}) {
    const Grid g(n, kTwoPi);
    const DyadicPartition part(g);
    for (std::size_t i = 0; i < g.spectral_size(); ++i) {
      double sum = 0.0;
      for (int q = -1; q <= part.q_max(); ++q) sum += part.weights(q)[i];
      worst_unity = std::max(worst_unity, std::abs(sum - 1.0));
    }
  }
  const Grid g(64, kTwoPi);
  const DyadicPartition part(g);
  double worst_bony = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Field u = random_field(g, {-1.0, seed});
    const Field v = random_field(g, {-2.0, seed + 1000});
    const Field uv = pointwise_product(u, v);
    const BonySplit s = bony_split(u, v, part);
    worst_bony = std::max(worst_bony, max_abs(s.T_uv + s.T_vu + s.remainder - uv) / max_abs(uv));
  }
  return {worst_unity <= kPartitionTol && worst_bony <= kBonyTol,
          "unity error " + fmt(worst_unity) + ", Bony reconstruction " + fmt(worst_bony) + " over 200 pairs"};
}

Outcome td_exact_decay() {
  const Grid g(64, kTwoPi);
  const DyadicPartition part(g);
  const Field s1 = mode(g, 1, 0, false);
  double worst = 0.0;
  for (double alpha : {0.5, 1.0, 2.0}) {
    TDConfig cfg;
    cfg.alpha = alpha;
    cfg.dt = 1e-3;
    cfg.t_end = 1.0;
    cfg.block_p = {};
    const TDTrajectory tr = run_td(s1, cfg, part);
    worst = std::max(worst, max_abs(tr.states.back() - std::exp(-1.0) * s1));
  }
  return {worst <= kDecayTol, "max-norm error " + fmt(worst)};
}

Outcome temporal_order() {
  const double td_order = manufactured::richardson_order(16, 0.1);
  const Grid g(256, kTwoPi);
  const SimState s0 = desk_initial_state(g);
  auto run = [&](double dt) { return run_boussinesq(s0, dt, 0.4, {}); };
  const SimState a = run(0.04), b = run(0.02), c = run(0.01);
  const double d1 = max_abs(a.omega - b.omega) + max_abs(a.theta - b.theta);
  const double d2 = max_abs(b.omega - c.omega) + max_abs(b.theta - c.theta);
  const double bouss_order = std::log2(d1 / d2);
  return {std::abs(td_order - kOrderTarget) <= kOrderBand && bouss_order >= kSelfConvergenceMin,
          "transport-diffusion Richardson order " + fmt(td_order) + ", Boussinesq self-convergence order " +
              fmt(bouss_order)};
}

Outcome maximum_principle() {
  const DeskRun& desk = desk_run();
  const auto t0 = std::chrono::steady_clock::now();
  const Grid g(256, kTwoPi);
  double worst_random = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    NormTracker norms;
    const SimState s0{Field(g), random_field(g, {-2.0, seed}), 0.0};
    run_boussinesq(s0, 2e-3, 1.0, {}, [&](const SimState& s) { norms.observe(s); });
    worst_random = std::max(worst_random, norms.worst());
  }
  const double secs = desk.seconds + std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = desk.worst_increase <= kMaxPrincipleRel && worst_random <= kMaxPrincipleRel && secs <= 600.0;
  return {ok, "largest step increase: desk " + fmt(desk.worst_increase) + ", random runs " + fmt(worst_random) +
                  " (" + fmt(secs) + " s)"};
}

double ensemble_smoothing_constant(int n) {
  const Grid g(n, kTwoPi);
  const DyadicPartition part(g);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    TDConfig cfg;
    cfg.alpha = 1.0;
    cfg.dt = 5e-3;
    cfg.t_end = 2.0;
    cfg.keep_states = false;
    cfg.norm_p = {4.0, infinity};
    cfg.block_p = {4.0};
    cfg.velocity = VelocitySource::steady(random_velocity(g, {-2.0, seed, 8.0}, 1.0));
    const TDTrajectory tr = run_td(random_field(g, {-1.0, seed + 100, 16.0}), cfg, part);
    worst = std::max(worst, report_smoothing_effect(tr, tr.velocity, 4.0).constant);
  }
  return worst;
}

Outcome smoothing_effect() {
  const double c64 = ensemble_smoothing_constant(64);
  const double c128 = ensemble_smoothing_constant(128);
  const double drift = std::max(c64, c128) / std::min(c64, c128);
  return {std::isfinite(drift) && drift < kDriftMax,
          "C(n=64) = " + fmt(c64) + ", C(n=128) = " + fmt(c128) + ", drift " + fmt(drift)};
}

Outcome ensembles() {
  bool ok = true;
  std::string detail;
  const DyadicPartition p64(Grid(64, kTwoPi)), p128(Grid(128, kTwoPi));
  for (const char* est : {"riesz_commutator", "riesz_commutator_besov", "block_commutator", "gen_bernstein"}) {
    const auto t0 = std::chrono::steady_clock::now();
    EnsembleParams ep;
    ep.estimate = est;
    ep.samples = 100;
    ep.seed = 1;
    const EnsembleResult a = run_ensemble(ep, p64);
    const EnsembleResult b = run_ensemble(ep, p128);
    const bool lower = is_lower_bound(est);
    const double drift = resolution_drift(a, b, lower);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool this_ok = a.extrema_finite() && b.extrema_finite() && a.degenerate == 0 && b.degenerate == 0 &&
                   drift < kDriftMax && secs <= 300.0;
    if (lower) this_ok = this_ok && a.min_ratio > 0.0 && b.min_ratio > 0.0;
    ok = ok && this_ok;
    detail += std::string(detail.empty() ? "" : "; ") + est + " " + (lower ? "min " : "max ") +
              fmt(lower ? a.min_ratio : a.max_ratio) + "/" + fmt(lower ? b.min_ratio : b.max_ratio) + " drift " +
              fmt(drift);
  }
  return {ok, detail};
}

Outcome conv_commutator() {
  EnsembleParams ep;
  ep.estimate = "conv_commutator";
  ep.samples = 20;
  ep.seed = 1;
  const EnsembleResult r = run_ensemble(ep, DyadicPartition(Grid(128, kTwoPi)));
  return {r.extrema_finite() && r.degenerate == 0 && r.max_ratio <= kConvMax,
          "max ratio " + fmt(r.max_ratio) + " over 20 triples"};
}

long long time_key(double t) { return std::llround(t * 1e9); }

// Both sups are taken over the coarse run's interior times, so halving dt compares like with like.
Outcome gamma_budget() {
  const DeskRun& desk = desk_run();
  GammaBudgetMonitor budget(1.0, 4.0);
  run_boussinesq(desk_initial_state(Grid(256, kTwoPi)), 4e-3, 5.0, {}, [&](const SimState& s) { budget.observe(s); });
  std::set<long long> times;
  double coarse = 0.0;
  for (const auto& r : budget.rows()) {
    times.insert(time_key(r.t));
    coarse = std::max(coarse, r.residual_l2);
  }
  double fine = 0.0;
  std::size_t matched = 0;
  for (const auto& [t, res] : desk.residuals) {
    if (!times.count(time_key(t))) continue;
    fine = std::max(fine, res);
    ++matched;
  }
  const double order = std::log2(coarse / fine);
  return {desk.budget_holds && matched == times.size() && order >= kResidualOrderMin,
          "sup residual over " + std::to_string(matched) + " shared times " + fmt(coarse) + " -> " + fmt(fine) +
              " (order " + std::to_string(order) + "), norm-rate inequality failed at " +
              std::to_string(desk.budget_failures) + "/" + std::to_string(desk.budget_rows) + " steps"};
}

Outcome log_estimate() {
  const Grid g(64, kTwoPi);
  const DyadicPartition part(g);
  std::vector<double> ratios, lips, contrast;
  for (double A : {1.0, 2.0, 4.0, 8.0}) {
    TDConfig cfg;
    cfg.alpha = 1.0;
    cfg.dt = 5e-3;
    cfg.t_end = 1.0;
    cfg.keep_states = false;
    cfg.norm_p = {4.0};
    cfg.block_p = {4.0};
    VectorField v(Field::from_function(g, [A](double, double x2) { return A * std::sin(x2); }), Field(g));
    certify_divergence_free(v);
    cfg.velocity = VelocitySource::steady(v);
    const TDTrajectory tr = run_td(random_field(g, {-1.0, 7, 16.0}), cfg, part);
    const LogEstimateReport r = report_log_estimate(tr, tr.velocity, 4.0);
    ratios.push_back(r.ratio);
    lips.push_back(r.lipschitz);
    contrast.push_back(r.exp_contrast_ratio);
  }
  const double growth = ratios.back() / ratios.front();
  const double v_growth = lips.back() / lips.front();
  const bool ok = growth < kLogRatioGrowthMax && std::abs(v_growth - 8.0) < 1e-6 && contrast.back() < contrast.front();
  return {ok, "ratio " + fmt(ratios.front()) + " -> " + fmt(ratios.back()) + " (x" + fmt(growth) + "), V x" +
                  fmt(v_growth) + ", exponential-bound ratio " + fmt(contrast.front()) + " -> " + fmt(contrast.back())};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome symmetry_and_determinism() {
  const Grid g(128, kTwoPi);
  SimState s0 = desk_initial_state(g);
  s0.omega = random_field(g, {-2.0, 2, 8.0, 0.2});
  const SimState a = reflect_state(run_boussinesq(s0, 5e-3, 1.0, {}));
  const SimState b = run_boussinesq(reflect_state(s0), 5e-3, 1.0, {});
  const double err = std::max(max_abs(a.omega - b.omega), max_abs(a.theta - b.theta));

  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "blab_acceptance_determinism";
  fs::remove_all(root);
  std::vector<std::string> first;
  bool identical = true;
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path dir = root / std::to_string(rep);
    std::ostringstream log, errs;
    const std::string sim = "subcommand = simulate\ngrid.n = 64\nsim.dt = 0.01\nsim.t_end = 0.3\nseed = 5\n"
                            "sim.initial = random\noutput_dir = " + (dir / "sim").string() + "\n";
    const std::string ver = "subcommand = verify\ngrid.n = 32\nverify.samples = 5\nseed = 5\noutput_dir = " +
                            (dir / "verify").string() + "\n";
    if (app::dispatch(io::parse_config(sim), log, errs) != app::kOk) identical = false;
    if (app::dispatch(io::parse_config(ver), log, errs) != app::kOk) identical = false;
    std::vector<std::string> files{slurp(dir / "sim" / "apriori.csv"), slurp(dir / "sim" / "gamma_budget.csv"),
                                   slurp(dir / "sim" / "phi_fit.csv"), slurp(dir / "verify" / "verify.csv")};
    if (rep == 0) {
      first = files;
    } else {
      identical = identical && files == first;
    }
  }
  for (const auto& f : first) identical = identical && !f.empty();
  fs::remove_all(root);
  return {err <= kReflectionTol && identical,
          "reflection error " + fmt(err) + ", CSV outputs " + (identical ? "bit-identical" : "differ")};
}

Outcome non_blowup() {
  const DeskRun& desk = desk_run();
  const auto t0 = std::chrono::steady_clock::now();
  const SimState fine = run_boussinesq(desk_initial_state(Grid(512, kTwoPi)), 2e-3, 5.0, {});
  const double w512 = lebesgue_norm(fine.omega, infinity);
  const double secs = desk.seconds + std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double rel = std::abs(desk.omega_inf - w512) / w512;
  return {std::isfinite(desk.omega_inf) && rel <= kResolutionRel && secs <= 1800.0,
          "||omega(5)||_inf = " + fmt(desk.omega_inf) + " (n=256), " + fmt(w512) + " (n=512), relative gap " +
              fmt(rel) + " (" + fmt(secs) + " s)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"multiplier_exactness", multiplier_exactness},
      {"partition_of_unity", partition_of_unity},
      {"td_exact_decay", td_exact_decay},
      {"temporal_order", temporal_order},
      {"maximum_principle", maximum_principle},
      {"smoothing_effect", smoothing_effect},
      {"commutator_and_bernstein_ensembles", ensembles},
      {"conv_commutator_unit_constant", conv_commutator},
      {"gamma_budget", gamma_budget},
      {"log_estimate_vs_exponential", log_estimate},
      {"symmetry_and_determinism", symmetry_and_determinism},
      {"non_blowup_resolution", non_blowup},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %02d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
