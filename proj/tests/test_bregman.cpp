// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "dmd/bregman.hpp"
#include "support.hpp"

using namespace dmd;

TEST(Potential, Examples) {
  const Potential nat(LinkFamily::natural());
  EXPECT_EQ(potential_eval(nat, 1.0), 0.0);
  EXPECT_NEAR(potential_eval(nat, std::numbers::e), 1.0, 1e-15);
  EXPECT_NEAR(potential_eval(Potential(LinkFamily::tsallis(0.5)), 4.0), 3.3333333333333333, 1e-13);
  EXPECT_THROW(potential_eval(nat, 0.0), DomainError);
  EXPECT_THROW(Potential(LinkFamily::tsallis(-2.0)), InvalidParams);
}

TEST(Potential, ClosedFormsMatchQuadrature) {
  // Small deformations route through quadrature, so compare the two paths
  // across the switch-over.
  for (double x : {0.05, 0.7, 3.0, 40.0}) {
    const double closed = potential_eval(Potential(LinkFamily::kaniadakis(2e-3)), x);
    const double quad = potential_eval(Potential(LinkFamily::kaniadakis(5e-4)), x);
    EXPECT_NEAR(closed, quad, 1e-5 * std::max(1.0, std::abs(closed)));
  }
  const QuadratureSettings qs;
  for (const auto& e : catalog()) {
    const Potential pot(e.defaults);
    for (double x : {0.01, 0.4, 2.5, 90.0}) {
      const double quad =
          integrate([&](double s) { return log_eval(e.defaults, std::exp(s)) * std::exp(s); }, 0.0,
                    std::log(x), qs)
              .value;
      EXPECT_NEAR(potential_eval(pot, x), quad, 1e-9 * std::max(1.0, std::abs(quad)))
          << e.tag << " x=" << x;
    }
  }
}

TEST(Potential, DerivativeIsLog) {
  for (const auto& e : catalog()) {
    const Potential pot(e.defaults);
    for (double x : {0.05, 0.4, 2.5, 30.0}) {
      const double h = 1e-3 * x;
      const double fd = (-potential_eval(pot, x + 2 * h) + 8 * potential_eval(pot, x + h) -
                         8 * potential_eval(pot, x - h) + potential_eval(pot, x - 2 * h)) /
                        (12 * h);
      EXPECT_LE(dmd::testing::rel_err(fd, log_eval(e.defaults, x)), 1e-7) << e.tag << " x=" << x;
    }
  }
}

TEST(Bregman, Examples) {
  const std::vector<double> w{0.3, 0.7};
  for (const auto& e : catalog()) EXPECT_EQ(bregman_div(Potential(e.defaults), w, w), 0.0);
  const std::vector<double> a{0.5, 0.5};
  const std::vector<double> b{0.25, 0.75};
  EXPECT_NEAR(bregman_div(Potential(LinkFamily::natural()), a, b), 0.1438410362258904637, 1e-15);
  const std::vector<double> ones{1.0, 1.0};
  EXPECT_EQ(bregman_div(Potential(LinkFamily::tsallis(0.5)), ones, ones), 0.0);
}

TEST(Bregman, Errors) {
  const Potential pot(LinkFamily::natural());
  const std::vector<double> a{0.5, 0.5};
  const std::vector<double> b{0.5, 0.25, 0.25};
  const std::vector<double> c{0.5, -0.5};
  EXPECT_THROW(bregman_div(pot, a, b), LengthMismatch);
  EXPECT_THROW(bregman_div(pot, a, c), DomainError);
}

TEST(Bregman, NonnegativeForRandomPairs) {
  Rng rng(3);
  for (const auto& e : catalog()) {
    const Potential pot(e.defaults);
    for (int k = 0; k < 200; ++k) {
      std::vector<double> w(3), v(3);
      for (auto& x : w) x = rng.log_uniform(1e-3, 1e2);
      for (auto& x : v) x = rng.log_uniform(1e-3, 1e2);
      ASSERT_GE(bregman_div(pot, w, v), -1e-12) << e.tag;
    }
  }
}

TEST(Bregman, NaturalFamilyIsGeneralizedKl) {
  Rng rng(4);
  const Potential pot(LinkFamily::natural());
  for (int k = 0; k < 500; ++k) {
    std::vector<double> w(4), v(4);
    for (auto& x : w) x = rng.log_uniform(1e-3, 1e2);
    for (auto& x : v) x = rng.log_uniform(1e-3, 1e2);
    double kl = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) kl += w[i] * std::log(w[i] / v[i]) - w[i] + v[i];
    ASSERT_LE(dmd::testing::rel_err(bregman_div(pot, w, v), kl), 1e-8);
  }
}

TEST(Integrate, ReportsFailure) {
  const QuadratureSettings tight{1e-15, 2};
  EXPECT_THROW(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, tight),
               QuadratureFailure);
  const auto r = integrate([](double x) { return x * x; }, 0.0, 3.0);
  EXPECT_NEAR(r.value, 9.0, 1e-13);
  EXPECT_GE(r.error, 0.0);
}

TEST(Integrate, ShortIntervalsMeetTolerance) {
  // Nearby coordinates give a narrow integration range.
  const Potential pot(LinkFamily::htg_general(0.3, -0.2, HKind::Arctan));
  const std::vector<double> w{0.024649127889880166};
  const std::vector<double> v{0.024689604013023142};
  const double d = bregman_div(pot, w, v);
  const double dv = w[0] - v[0];
  EXPECT_LE(dmd::testing::rel_err(d, 0.5 * dv * dv * dlog_eval(pot.family(), v[0])), 1e-3);
  const auto r = integrate([](double x) { return std::cos(x); }, 0.0, 1e-6);
  EXPECT_NEAR(r.value, std::sin(1e-6), 1e-22);
}
