#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "blab/boussinesq.hpp"
#include "blab/random_fields.hpp"
#include "blab/tdsolver.hpp"

using namespace blab;

namespace {
const double kTwoPi = 2.0 * std::numbers::pi;

Field wave(const Grid& g, double (*fn)(double), int axis) {
  return Field::from_function(g, [fn, axis](double x1, double x2) { return fn(axis == 1 ? x1 : x2); });
}

double kinetic_energy(const SimState& s) {
  const VectorField v = s.velocity();
  const double a = lebesgue_norm(v.u1, 2.0);
  const double b = lebesgue_norm(v.u2, 2.0);
  return a * a + b * b;
}

SimState euler_state(const Grid& g) {
  return {random_field(g, {-3.0, 21, 8.0}), Field(g), 0.0};
}
}  // namespace

TEST(Boussinesq, EulerLimitInvariants) {
  const Grid g(128, kTwoPi);
  const SimState s0 = euler_state(g);
  const double e0 = kinetic_energy(s0);
  const double w2 = lebesgue_norm(s0.omega, 2.0);
  const double w4 = lebesgue_norm(s0.omega, 4.0);
  const SimState s1 = run_boussinesq(s0, 5e-3, 1.0, {});
  EXPECT_EQ(max_abs(s1.theta), 0.0);
  EXPECT_LE(std::abs(kinetic_energy(s1) - e0), 1e-6 * e0);
  EXPECT_LE(std::abs(lebesgue_norm(s1.omega, 2.0) - w2), 1e-4 * w2);
  EXPECT_LE(std::abs(lebesgue_norm(s1.omega, 4.0) - w4), 1e-4 * w4);
  // Gamma = omega is transported.
  EXPECT_LE(std::abs(lebesgue_norm(gamma(s1), 4.0) - w4), 1e-4 * w4);
}

TEST(Boussinesq, HorizontallyUniformTemperatureOnlyDecays) {
  const Grid g(64, kTwoPi);
  const SimState s0{Field(g), wave(g, std::sin, 2), 0.0};
  const SimState s1 = run_boussinesq(s0, 1e-2, 1.0, {});
  EXPECT_LE(max_abs(s1.omega), 1e-14);
  EXPECT_LE(max_abs(s1.theta - std::exp(-1.0) * s0.theta), 1e-8);
  // Same answer as the transport-diffusion solver with v = 0.
  const Field td = td_step(s0.theta, VectorField::zero(g), Field(g), [] {
    TDConfig c;
    c.dt = 1.0;
    return c;
  }());
  EXPECT_LE(max_abs(s1.theta - td), 1e-8);
}

TEST(Boussinesq, SelfConvergenceIsFourthOrder) {
  const Grid g(64, kTwoPi);
  const SimState s0 = desk_initial_state(g);
  auto run = [&](double dt) { return run_boussinesq(s0, dt, 0.4, {}); };
  const SimState a = run(0.04), b = run(0.02), c = run(0.01);
  const double d1 = max_abs(a.omega - b.omega) + max_abs(a.theta - b.theta);
  const double d2 = max_abs(b.omega - c.omega) + max_abs(b.theta - c.theta);
  EXPECT_GE(std::log2(d1 / d2), 3.8);
}

TEST(Boussinesq, MeansConserved) {
  const Grid g(64, kTwoPi);
  SimState s0 = desk_initial_state(g);
  s0.theta += Field::constant(g, 0.25);
  s0.omega = random_field(g, {-2.0, 5, 6.0, 0.3}) + Field::constant(g, -0.1);
  const SimState s1 = run_boussinesq(s0, 1e-2, 0.5, {});
  EXPECT_NEAR(mean(s1.theta), 0.25, 1e-12);
  EXPECT_NEAR(mean(s1.omega), -0.1, 1e-12);
}

TEST(Boussinesq, ReflectionEquivariance) {
  const Grid g(64, kTwoPi);
  SimState s0 = desk_initial_state(g);
  s0.omega = random_field(g, {-2.0, 2, 6.0, 0.2});
  const SimState orig = run_boussinesq(s0, 1e-2, 0.3, {});
  const SimState a = reflect_state(orig);
  const SimState b = run_boussinesq(reflect_state(s0), 1e-2, 0.3, {});
  EXPECT_LE(max_abs(a.omega - b.omega), 1e-10);
  EXPECT_LE(max_abs(a.theta - b.theta), 1e-10);
  // R theta changes sign under the mirror.
  EXPECT_LE(max_abs(riesz_transform(b.theta) + reflect_x1(riesz_transform(orig.theta))), 1e-10);
}

TEST(Boussinesq, CflAndNonFinite) {
  const Grid g(64, kTwoPi);
  SimState s{random_field(g, {-2.0, 1, 8.0, 50.0}), Field(g), 0.0};
  EXPECT_THROW(bouss_step(s, 0.5, 1.0), CflViolation);
  s.theta.values[3] = std::nan("");
  EXPECT_THROW(bouss_step(s, 1e-3, 1.0), NonFiniteError);
  EXPECT_THROW(BoussinesqSolver(g, {3.0, 0.5}), std::invalid_argument);
}

TEST(Gamma, ClosedForms) {
  const Grid g(32, kTwoPi);
  const Field s1 = wave(g, std::sin, 1);
  const Field c1 = wave(g, std::cos, 1);
  EXPECT_LE(max_abs(gamma({s1, Field(g), 0.0}) - s1), 0.0);
  const Field th = random_field(g, {-1.0, 3});
  EXPECT_LE(max_abs(gamma({-1.0 * riesz_transform(th), th, 0.0})), 1e-14);
  EXPECT_LE(max_abs(gamma({s1, s1, 0.0}) - (s1 + c1)), 1e-14);
}

TEST(GammaBudget, FrozenLinearCaseHasNoResidual) {
  // theta = e^{-t} sin x1, omega = (1 - e^{-t}) cos x1: all nonlinear terms vanish and Gamma = cos x1.
  const Grid g(64, kTwoPi);
  const SimState s0{Field(g), wave(g, std::sin, 1), 0.0};
  GammaBudgetMonitor mon(1.0, 4.0);
  const SimState s1 = run_boussinesq(s0, 1e-3, 0.2, {}, [&](const SimState& s) { mon.observe(s); });
  EXPECT_LE(max_abs(s1.theta - std::exp(-0.2) * s0.theta), 1e-12);
  EXPECT_LE(max_abs(s1.omega - (1.0 - std::exp(-0.2)) * wave(g, std::cos, 1)), 1e-12);
  EXPECT_EQ(mon.rows().size(), 199u);
  EXPECT_LE(mon.max_residual(), 1e-6);
  EXPECT_TRUE(mon.holds());
  EXPECT_THROW(GammaBudgetMonitor(0.5), std::invalid_argument);
}

TEST(GammaBudget, ResidualShrinksUnderStepHalving) {
  const Grid g(64, kTwoPi);
  auto worst = [&](double dt) {
    GammaBudgetMonitor mon(1.0, 4.0);
    run_boussinesq(desk_initial_state(g), dt, 1.0, {}, [&](const SimState& s) { mon.observe(s); });
    EXPECT_TRUE(mon.holds()) << dt;
    return mon.max_residual();
  };
  const double a = worst(0.02), b = worst(0.01);
  EXPECT_GE(std::log2(a / b), 1.9);
}

TEST(Apriori, ZeroTemperature) {
  const Grid g(64, kTwoPi);
  const DyadicPartition part(g);
  AprioriMonitor mon(part, 4.0);
  run_boussinesq(euler_state(g), 1e-2, 0.5, {}, [&](const SimState& s) { mon.observe(s); });
  const AprioriRecord& r = mon.record();
  for (const char* name : {"theta_L2", "theta_L4", "theta_Linf", "comm_L4", "Rtheta_Linf"}) {
    for (double x : r.at(name)) EXPECT_EQ(x, 0.0) << name;
  }
  const auto& w = r.at("omega_L4");
  for (double x : w) EXPECT_NEAR(x, w.front(), 1e-4 * w.front());
  EXPECT_TRUE(mon.all_finite());
  EXPECT_TRUE(r.p_in_hypothesis);
  EXPECT_FALSE(AprioriMonitor(part, 2.0).record().p_in_hypothesis);
}

TEST(Apriori, DeskRunMaximumPrinciple) {
  const Grid g(64, kTwoPi);
  const DyadicPartition part(g);
  AprioriMonitor mon(part, 4.0, {2.0, 4.0});
  run_boussinesq(desk_initial_state(g), 1e-2, 1.0, {}, [&](const SimState& s) { mon.observe(s); });
  EXPECT_TRUE(mon.max_principle_holds());
  for (double p : {2.0, 4.0, infinity}) EXPECT_LE(mon.max_step_increase(p), 1e-6) << p;
  EXPECT_EQ(mon.record().times.size(), 101u);
  EXPECT_GT(mon.record().at("smoothing").back(), 0.0);
}

TEST(Apriori, SeriesStableUnderResolutionDoubling) {
  auto record = [](int n) {
    const Grid g(n, kTwoPi);
    const DyadicPartition part(g);
    AprioriMonitor mon(part, 4.0);
    run_boussinesq(desk_initial_state(g), 5e-3, 1.0, {}, [&](const SimState& s) { mon.observe(s); });
    return mon.record();
  };
  const AprioriRecord a = record(64), b = record(128);
  for (const auto& [name, sa] : a.series) {
    if (name == "smoothing" || name == "v_B1inf1") continue;  // top shell moves with n
    const auto& sb = b.at(name);
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) {
      diff = std::max(diff, std::abs(sa[i] - sb[i]));
      scale = std::max(scale, std::abs(sb[i]));
    }
    EXPECT_LE(diff, 1e-2 * scale) << name;
  }
}

TEST(PhiFit, ConstantSeries) {
  const std::vector<double> t{0.0, 0.5, 1.0, 2.0};
  const std::vector<double> y(4, 3.0);
  const PhiFit f = fit_phi(t, y, 1);
  EXPECT_NEAR(f.c0, 3.0, 1e-12);
  EXPECT_GE(phi_k(1, f.c0, 0.0), 3.0);
}

TEST(PhiFit, ExponentialSeries) {
  std::vector<double> t, y;
  for (int i = 0; i <= 40; ++i) {
    t.push_back(0.05 * i);
    y.push_back(std::exp(2.0 * t.back()));
  }
  const PhiFit f = fit_phi(t, y, 1);
  EXPECT_NEAR(f.c0, 2.0, 0.1);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_GE(phi_k(1, f.c0, t[i]), y[i]);
}

TEST(PhiFit, PolynomialAndValidation) {
  std::vector<double> t, y;
  for (int i = 0; i <= 20; ++i) {
    t.push_back(0.25 * i);
    y.push_back(t.back() * t.back());
  }
  const PhiFit f = fit_phi(t, y, 1);
  EXPECT_TRUE(std::isfinite(f.c0));
  EXPECT_GT(f.c0, 0.0);
  EXPECT_TRUE(std::isfinite(fit_phi(t, y, 2).c0));
  y[3] = std::nan("");
  EXPECT_THROW(fit_phi(t, y, 1), std::invalid_argument);
  EXPECT_THROW(fit_phi(t, std::vector<double>(21, 1.0), 4), std::invalid_argument);
}

TEST(Truncation, EndpointsAndCauchyDiagnostic) {
  const Grid g(128, kTwoPi);
  const DyadicPartition part(g);
  const Field f = random_field(g, {-1.0, 13});
  EXPECT_LE(max_abs(truncate_initial_data(f, part.q_max() + 1, part) - f), 1e-12);
  EXPECT_LE(max_abs(truncate_initial_data(f, 0, part) - dyadic_block(f, -1, part)), 1e-15);
  EXPECT_THROW(truncate_initial_data(f, part.q_max() + 2, part), std::out_of_range);

  const SimState ref = run_boussinesq({Field(g), f, 0.0}, 1e-2, 0.5, {});
  const BesovIndex idx(0.0, infinity, 1.0);
  double prev = infinity;
  for (int n = 2; n <= 4; ++n) {
    const SimState s = run_boussinesq({Field(g), truncate_initial_data(f, n, part), 0.0}, 1e-2, 0.5, {});
    const double d = besov_norm(s.theta - ref.theta, idx, part) + besov_norm(s.omega - ref.omega, idx, part);
    EXPECT_LT(d, prev) << n;
    prev = d;
  }
}

TEST(Stability, PerturbationGrowthIsLinearInSize) {
  auto growth = [](int n, double delta) {
    const Grid g(n, kTwoPi);
    const DyadicPartition part(g);
    const SimState s0 = desk_initial_state(g);
    SimState s1 = s0;
    const Field bump = Field::from_function(g, [](double x1, double x2) { return std::cos(x1 + 2 * x2); });
    s1.theta += (delta / besov_norm(bump, BesovIndex(0.0, infinity, 1.0), part)) * bump;
    const SimState a = run_boussinesq(s0, 1e-2, 0.5, {});
    const SimState b = run_boussinesq(s1, 1e-2, 0.5, {});
    return besov_norm(a.theta - b.theta, BesovIndex(0.0, infinity, 1.0), part) / delta;
  };
  const double k4 = growth(64, 1e-4), k5 = growth(64, 1e-5);
  EXPECT_LT(std::max(k4, k5) / std::min(k4, k5), 2.0);
  const double k4f = growth(128, 1e-4);
  EXPECT_LT(std::max(k4, k4f) / std::min(k4, k4f), 2.0);
}
