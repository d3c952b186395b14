#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "blab/random_fields.hpp"
#include "blab/spectral_ops.hpp"
#include "support/mode_oracle.hpp"

using namespace blab;

namespace {
const double kTwoPi = 2.0 * std::numbers::pi;

double max_diff(const Field& a, const Field& b) { return max_abs(a - b); }

Field wave(const Grid& g, int k1, int k2, bool cosine) {
  return Field::from_function(g, [=](double x1, double x2) {
    const double ph = g.k0() * (k1 * x1 + k2 * x2);
    return cosine ? std::cos(ph) : std::sin(ph);
  });
}
}  // namespace

TEST(Multipliers, FractionalLaplacianSingleModes) {
  const Grid g(64, kTwoPi);
  for (double alpha : {0.5, 1.0, 1.5, 2.0}) {
    for (auto [k1, k2] : {std::pair{1, 0}, {3, -4}, {0, 7}, {12, 5}}) {
      const double r = std::hypot(double(k1), double(k2));
      const Field got = fractional_laplacian(wave(g, k1, k2, true), alpha);
      const Field want = std::pow(r, alpha) * wave(g, k1, k2, true);
      EXPECT_LE(max_diff(got, want), 1e-12 * std::pow(r, alpha)) << alpha << " " << k1 << "," << k2;
    }
  }
  EXPECT_THROW(fractional_laplacian(wave(g, 1, 0, true), 0.0), std::invalid_argument);
  EXPECT_THROW(fractional_laplacian(wave(g, 1, 0, true), 2.5), std::invalid_argument);
}

TEST(Multipliers, FractionalLaplacianOnNonStandardPeriod) {
  const Grid g(32, 3.0);
  const Field f = wave(g, 2, 1, false);
  const double kk = g.k0() * std::sqrt(5.0);
  EXPECT_LE(max_diff(fractional_laplacian(f, 2.0), kk * kk * f), 1e-11 * kk * kk);
}

TEST(Multipliers, RieszSingleModes) {
  const Grid g(64, kTwoPi);
  // R sin(k.x) = (k1/|k|) cos(k.x)
  for (auto [k1, k2] : {std::pair{1, 0}, {0, 3}, {3, 4}, {-5, 12}}) {
    const double r = std::hypot(double(k1), double(k2));
    const Field got = riesz_transform(wave(g, k1, k2, false));
    EXPECT_LE(max_diff(got, (k1 / r) * wave(g, k1, k2, true)), 1e-12);
  }
  // Constants are sent to zero.
  EXPECT_LE(max_abs(riesz_transform(Field::constant(g, 3.0))), 1e-15);
}

TEST(Multipliers, DerivativesSingleModes) {
  const Grid g(32, kTwoPi);
  const Field f = wave(g, 3, -2, false);
  EXPECT_LE(max_diff(partial_derivative(f, 1), 3.0 * wave(g, 3, -2, true)), 1e-12 * 3);
  EXPECT_LE(max_diff(partial_derivative(f, 2), -2.0 * wave(g, 3, -2, true)), 1e-12 * 3);
  EXPECT_THROW(partial_derivative(f, 3), std::invalid_argument);
}

TEST(Multipliers, BiotSavartSingleMode) {
  // omega = cos(k.x) -> v = (-k2, k1) / |k|^2 sin(k.x)
  const Grid g(64, kTwoPi);
  for (auto [k1, k2] : {std::pair{1, 0}, {2, 3}, {0, 5}}) {
    const double kk = double(k1) * k1 + double(k2) * k2;
    const VectorField v = biot_savart(wave(g, k1, k2, true));
    EXPECT_TRUE(v.divergence_free);
    EXPECT_LE(max_diff(v.u1, (-k2 / kk) * wave(g, k1, k2, false)), 1e-12);
    EXPECT_LE(max_diff(v.u2, (k1 / kk) * wave(g, k1, k2, false)), 1e-12);
  }
}

TEST(Multipliers, CurlOfBiotSavartRecoversMeanFreeVorticity) {
  const Grid g(64, kTwoPi);
  Field w = random_field(g, {-2.0, 3});
  w += Field::constant(g, 0.7);
  const Field back = curl(biot_savart(w));
  EXPECT_LE(max_diff(back, w - Field::constant(g, mean(w))), 1e-12 * max_abs(w));
}

TEST(Leray, ProjectionPropertiesOnRandomFields) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Grid g(32, kTwoPi);
  for (int trial = 0; trial < 5; ++trial) {
    VectorField raw{Field(g), Field(g)};
    for (auto& x : raw.u1.values) x = u(rng);
    for (auto& x : raw.u2.values) x = u(rng);
    const VectorField p = leray_project(raw);
    EXPECT_TRUE(p.divergence_free);
    EXPECT_LE(max_abs(divergence(p)), 1e-11);
    // Idempotent.
    const VectorField pp = leray_project(p);
    EXPECT_LE(max_diff(pp.u1, p.u1), 1e-12);
    EXPECT_LE(max_diff(pp.u2, p.u2), 1e-12);
    // Mean passes through.
    EXPECT_NEAR(mean(p.u1), mean(raw.u1), 1e-13);
  }
}

TEST(Leray, BiotSavartRequiresNothingButRejectsNonFinite) {
  const Grid g(16, kTwoPi);
  Field w(g);
  w.values[3] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(biot_savart(w), NonFiniteError);
}

TEST(Norms, LebesgueClosedForms) {
  const Grid g(64, kTwoPi);
  const Field s = wave(g, 1, 0, false);
  // ||sin x1||_2^2 = 2 pi^2, ||sin x1||_4^4 = 3/8 * 4 pi^2.
  EXPECT_NEAR(lebesgue_norm(s, 2.0), std::sqrt(2.0) * std::numbers::pi, 1e-12);
  EXPECT_NEAR(lebesgue_norm(s, 4.0), std::pow(1.5 * std::numbers::pi * std::numbers::pi, 0.25), 1e-12);
  EXPECT_NEAR(lebesgue_norm(s, infinity), 1.0, 1e-12);
  EXPECT_NEAR(lebesgue_norm(Field::constant(g, 2.0), 1.0), 2.0 * kTwoPi * kTwoPi, 1e-10);
  EXPECT_THROW(lebesgue_norm(s, 0.5), std::invalid_argument);
  EXPECT_EQ(lebesgue_norm(Field(g), 3.0), 0.0);
}

TEST(Norms, LebesgueMonotoneInPOnUnitMeasure) {
  // On a torus of area 1, ||f||_p is non-decreasing in p.
  const Grid g(32, 1.0);
  const Field f = random_field(g, {-1.0, 9});
  double prev = 0.0;
  for (double p : {1.0, 1.5, 2.0, 3.0, 4.0, 8.0, infinity}) {
    const double v = lebesgue_norm(f, p);
    EXPECT_GE(v, prev * (1.0 - 1e-12));
    prev = v;
  }
}

TEST(Dealiasing, ProductOfTwoModesMatchesOracle) {
  const Grid g(32, kTwoPi);
  const oracle::Poly a = oracle::Poly::sin_mode(3, 1);
  const oracle::Poly b = oracle::Poly::cos_mode(-2, 4);
  const Field got = dealiased_product(a.sample(g), b.sample(g));
  EXPECT_LE(max_diff(got, (a * b).sample(g)), 1e-13);
}

TEST(Dealiasing, HighModesAreRemoved) {
  const Grid g(32, kTwoPi);
  // (12, 0) lies beyond the radius 32/3.
  const Field f = wave(g, 12, 0, true) + wave(g, 2, 1, true);
  const Field d = dealiased(f);
  EXPECT_LE(max_diff(d, wave(g, 2, 1, true)), 1e-13);
  EXPECT_TRUE(is_dealiased(to_spectral(d)));
  EXPECT_FALSE(is_dealiased(to_spectral(f)));
}

TEST(Dealiasing, ProductIsAliasFreeForBandLimitedFactors) {
  // For factors inside the disk the dealiased product equals the exact product truncated.
  const Grid g(32, kTwoPi);
  const oracle::Poly a = oracle::Poly::sin_mode(7, 5) + oracle::Poly::cos_mode(1, -8);
  const oracle::Poly b = oracle::Poly::cos_mode(6, 6) + oracle::Poly::sin_mode(-9, 2);
  oracle::Poly exact = a * b;
  oracle::Poly truncated;
  for (const auto& [k, c] : exact.c) {
    if (g.in_dealias_disk(k.first, k.second)) truncated.c[k] = c;
  }
  EXPECT_LE(max_diff(dealiased_product(a.sample(g), b.sample(g)), truncated.sample(g)), 1e-13);
}

TEST(Gradient, NormOfLinearShear) {
  const Grid g(32, kTwoPi);
  const VectorField v{wave(g, 0, 1, false), Field(g)};  // (sin x2, 0)
  EXPECT_NEAR(gradient_norm(v, infinity), 1.0, 1e-12);
  // Frobenius |grad v| = |cos x2|, ||.||_2^2 = 2 pi^2.
  EXPECT_NEAR(gradient_norm(v, 2.0), std::sqrt(2.0) * std::numbers::pi, 1e-12);
}

TEST(Gradient, CertificationRejectsCompressibleField) {
  const Grid g(32, kTwoPi);
  VectorField v{wave(g, 1, 0, false), Field(g)};
  EXPECT_FALSE(certify_divergence_free(v));
  EXPECT_FALSE(v.divergence_free);
}
