// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace dmd;

namespace {

DescentConfig config(Variant v, LinkFamily f, double eta = 0.5, std::size_t iters = 5000) {
  DescentConfig c;
  c.variant = v;
  c.family = std::move(f);
  c.eta = {eta, Schedule::Constant};
  c.max_iters = iters;
  c.grad_tol = 1e-10;
  return c;
}

double linf(const std::vector<double>& a, const SimplexPoint& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

}  // namespace

TEST(GMultiply, Examples) {
  const std::vector<double> x{0.3, 2.0};
  const std::vector<double> zero{0.0, 0.0};
  for (const auto& e : catalog()) EXPECT_EQ(g_multiply(e.defaults, x, zero).x, x) << e.tag;
  const std::vector<double> half{0.5};
  const std::vector<double> ln2{std::log(2.0)};
  EXPECT_NEAR(g_multiply(LinkFamily::natural(), half, ln2).x[0], 1.0, 1e-15);
  const std::vector<double> four{4.0};
  const std::vector<double> m2{-2.0};
  EXPECT_NEAR(g_multiply(LinkFamily::tsallis(0.5), four, m2).x[0], 1.0, 1e-15);
  EXPECT_THROW(g_multiply(LinkFamily::natural(), x, half), LengthMismatch);
}

TEST(NormalizedGrad, Examples) {
  const std::vector<double> half{0.5, 0.5};
  auto constant = [](std::span<const double> u) { return std::vector<double>(u.size(), 3.0); };
  for (double g : normalized_grad(constant, half)) EXPECT_EQ(g, 0.0);

  auto quad = [](std::span<const double> u) {
    return std::vector<double>{u[0] - 0.5, u[1] - 0.5};
  };
  const std::vector<double> ones{1.0, 1.0};
  for (double g : normalized_grad(quad, ones)) EXPECT_EQ(g, 0.0);

  auto first = [](std::span<const double>) { return std::vector<double>{1.0, 0.0}; };
  const auto g = normalized_grad(first, half);
  EXPECT_NEAR(g[0], 0.5, 1e-16);
  EXPECT_NEAR(g[1], -0.5, 1e-16);
}

TEST(NormalizedGrad, MatchesFiniteDifferencesOfScaledLoss) {
  const auto p = cross_entropy_problem(SimplexPoint({0.2, 0.3, 0.5}));
  const std::vector<double> w{0.4, 1.1, 0.7};
  auto scaled = [&](std::span<const double> v) {
    double s = 0;
    for (double x : v) s += x;
    std::vector<double> u(v.begin(), v.end());
    for (double& x : u) x /= s;
    return p.loss(u, 0);
  };
  const auto fd = finite_diff_grad(scaled, w);
  const auto g = normalized_grad([&](std::span<const double> u) { return p.grad(u, 0); }, w);
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(g[i], fd[i], 1e-7);
}

TEST(MdStep, Examples) {
  const SimplexPoint w({0.5, 0.5});
  const std::vector<double> zero{0.0, 0.0};
  for (const auto& e : catalog()) {
    EXPECT_EQ(md_step(config(Variant::MD, e.defaults), w, zero, 1.0).w, w) << e.tag;
  }
  const std::vector<double> g{1.0, 0.0};
  const auto r = md_step(config(Variant::MD, LinkFamily::natural()), w, g, std::log(2.0));
  EXPECT_NEAR(r.w[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.w[1], 2.0 / 3.0, 1e-15);
}

TEST(MdStep, ReproducesExponentiatedGradient) {
  Rng rng(1);
  const auto cfg = config(Variant::MD, LinkFamily::natural());
  for (int k = 0; k < 100; ++k) {
    std::vector<double> w(5), g(5);
    for (auto& x : w) x = rng.uniform(0.05, 1.0);
    for (auto& x : g) x = rng.uniform(-3.0, 3.0);
    const auto sp = SimplexPoint::normalized(w);
    const double eta = rng.uniform(0.01, 1.0);
    std::vector<double> eg(5);
    double s = 0;
    for (std::size_t i = 0; i < 5; ++i) s += eg[i] = sp[i] * std::exp(-eta * g[i]);
    const auto r = md_step(cfg, sp, g, eta);
    for (std::size_t i = 0; i < 5; ++i) ASSERT_LE(dmd::testing::rel_err(r.w[i], eg[i] / s), 1e-12);
  }
}

TEST(MdStep, ClosedAndNumericInversionAgree) {
  Rng rng(2);
  for (const auto& f : {LinkFamily::tsallis(0.6), LinkFamily::tsallis(1.4), LinkFamily::kaniadakis(0.7)}) {
    auto closed = config(Variant::MD, f);
    auto numeric = closed;
    numeric.closed_form = false;
    for (int k = 0; k < 30; ++k) {
      std::vector<double> w(4), g(4);
      for (auto& x : w) x = rng.uniform(0.05, 1.0);
      for (auto& x : g) x = rng.uniform(-1.0, 1.0);
      const auto sp = SimplexPoint::normalized(w);
      const auto a = md_step(closed, sp, g, 0.3);
      const auto b = md_step(numeric, sp, g, 0.3);
      EXPECT_GT(b.inversion_iters, 0);
      EXPECT_EQ(a.inversion_iters, 0);
      for (std::size_t i = 0; i < 4; ++i) ASSERT_LE(dmd::testing::rel_err(a.w[i], b.w[i]), 1e-8);
    }
  }
}

TEST(MdStep, OutOfRangeExponentIsStepFailure) {
  // tsallis q = 2 cannot represent log values >= 1.
  const SimplexPoint w({0.5, 0.5});
  const std::vector<double> g{-50.0, 0.0};
  EXPECT_THROW(md_step(config(Variant::MD, LinkFamily::tsallis(2.0)), w, g, 1.0), StepFailure);
}

TEST(MmdStep, Examples) {
  const auto nat = config(Variant::MMD, LinkFamily::natural());
  const SimplexPoint half({0.5, 0.5});
  const std::vector<double> ones{1.0, 1.0};
  const auto r = mmd_step(nat, half, ones, 0.5);
  EXPECT_NEAR(r.w[0], 0.5, 1e-16);
  EXPECT_NEAR(r.w[1], 0.5, 1e-16);
  const std::vector<double> zero{0.0, 0.0};
  EXPECT_EQ(mmd_step(nat, half, zero, 1.0).w, half);

  const SimplexPoint skew({0.9, 0.1});
  const std::vector<double> g{10.0, 0.0};
  const auto c = mmd_step(nat, skew, g, 1.0);
  EXPECT_EQ(c.w[0], nat.floor);
  EXPECT_NEAR(c.w[1], 1.0 - nat.floor, 1e-16);
}

TEST(MmdStep, AllClippedIsDegenerate) {
  const SimplexPoint w({0.5, 0.5});
  const std::vector<double> g{10.0, 10.0};
  EXPECT_THROW(mmd_step(config(Variant::MMD, LinkFamily::natural()), w, g, 1.0), DegenerateState);
}

TEST(MmdStep, IdentityFamilyIsProjectedGradientDescent) {
  Rng rng(6);
  const auto cfg = config(Variant::MMD, LinkFamily::identity());
  for (int k = 0; k < 100; ++k) {
    std::vector<double> w(4), g(4);
    for (auto& x : w) x = rng.uniform(0.05, 1.0);
    for (auto& x : g) x = rng.uniform(-1.0, 1.0);
    const auto sp = SimplexPoint::normalized(w);
    const double eta = rng.uniform(0.01, 0.3);
    std::vector<double> pgd(4);
    double s = 0;
    for (std::size_t i = 0; i < 4; ++i) s += pgd[i] = std::max(sp[i] - eta * g[i], 0.0);
    const auto r = mmd_step(cfg, sp, g, eta);
    for (std::size_t i = 0; i < 4; ++i) {
      const double expect = std::max(pgd[i] / s, cfg.floor);
      // The step goes through exp(log(w) - eta g); allow a few ulps of drift.
      ASSERT_LE(dmd::testing::rel_err(r.w[i], expect), 1e-11);
    }
  }
}

TEST(Steps, PreserveSimplexAndFloor) {
  Rng rng(10);
  for (const auto& e : catalog()) {
    for (Variant v : {Variant::MD, Variant::MMD}) {
      const auto cfg = config(v, e.defaults);
      for (int k = 0; k < 20; ++k) {
        std::vector<double> w(6), g(6);
        for (auto& x : w) x = rng.log_uniform(1e-6, 1.0);
        for (auto& x : g) x = rng.uniform(-2.0, 2.0);
        const auto sp = SimplexPoint::normalized(w);
        StepResult r{sp, 0};
        try {
          r = v == Variant::MD ? md_step(cfg, sp, g, 0.2) : mmd_step(cfg, sp, g, 0.2);
        } catch (const StepFailure&) {
          continue;
        }
        double s = 0;
        for (double x : r.w.weights()) {
          s += x;
          ASSERT_GE(x, cfg.floor);
        }
        ASSERT_NEAR(s, 1.0, 1e-12) << e.tag;
      }
    }
  }
}

TEST(Run, StartsAtMinimizer) {
  const SimplexPoint target({0.2, 0.3, 0.5});
  const auto p = quadratic_problem(target);
  auto cfg = config(Variant::MD, LinkFamily::natural());
  cfg.grad_tol = 1e-6;
  const auto t = run(cfg, p, target);
  EXPECT_EQ(t.records.size(), 1u);
  EXPECT_TRUE(t.converged);
}

TEST(Run, MdAndMmdReachTheSameMinimizer) {
  const SimplexPoint target({0.1, 0.25, 0.3, 0.35});
  const auto p = quadratic_problem(target);
  const auto w0 = SimplexPoint::uniform(4);
  const auto md = run(config(Variant::MD, LinkFamily::natural()), p, w0);
  const auto mmd = run(config(Variant::MMD, LinkFamily::natural()), p, w0);
  EXPECT_LE(linf(md.last().w, target), 1e-4);
  EXPECT_LE(linf(mmd.last().w, target), 1e-4);
  EXPECT_LE(md.records.size(), 5001u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(md.last().w[i], mmd.last().w[i], 1e-4);
}

TEST(Run, TraceLengthAndDeterminism) {
  const auto p = cross_entropy_problem(SimplexPoint({0.6, 0.4}));
  auto cfg = config(Variant::MD, LinkFamily::tsallis(0.7), 0.1, 7);
  cfg.grad_tol = 0.0;
  const auto a = run(cfg, p, SimplexPoint::uniform(2));
  const auto b = run(cfg, p, SimplexPoint::uniform(2));
  ASSERT_EQ(a.records.size(), 8u);
  EXPECT_FALSE(a.converged);
  EXPECT_EQ(a.stop_reason, "max_iters");
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].w, b.records[i].w);
    EXPECT_EQ(a.records[i].t, i);
    EXPECT_TRUE(std::isfinite(a.records[i].loss));
  }
}

TEST(Run, InvSqrtSchedule) {
  LearningRate lr{1.0, Schedule::InvSqrt};
  EXPECT_EQ(lr.at(1), 1.0);
  EXPECT_EQ(lr.at(4), 0.5);
  const auto p = quadratic_problem(SimplexPoint({0.3, 0.7}));
  auto cfg = config(Variant::MD, LinkFamily::natural(), 1.0, 3);
  cfg.eta.schedule = Schedule::InvSqrt;
  cfg.grad_tol = 0.0;
  const auto t = run(cfg, p, SimplexPoint::uniform(2));
  EXPECT_EQ(t.records[1].eta, 1.0);
  EXPECT_NEAR(t.records[3].eta, 1.0 / std::sqrt(3.0), 1e-16);
}

TEST(Run, HalvesStepOnFailureThenAborts) {
  // With q = 2 the exponential is undefined for log values >= 1; the first
  // step at eta = 40 overshoots and must be retried with a smaller eta.
  const auto p = linear_problem({-1.0, 0.0});
  auto cfg = config(Variant::MD, LinkFamily::tsallis(2.0), 40.0, 3);
  cfg.grad_tol = 0.0;
  const auto t = run(cfg, p, SimplexPoint::uniform(2));
  ASSERT_EQ(t.records.size(), 4u);
  EXPECT_FALSE(t.records[1].step_accepted);
  EXPECT_LT(t.records[1].eta, 40.0);

  cfg.eta.eta0 = 1e6;
  try {
    run(cfg, p, SimplexPoint::uniform(2));
    FAIL() << "expected RunFailure";
  } catch (const RunFailure& e) {
    EXPECT_EQ(e.kind(), "StepFailure");
    EXPECT_EQ(e.partial_trace().records.size(), 1u);
  }
}

TEST(Run, LossNonIncreasingAtSmallStep) {
  const auto p = quadratic_problem(SimplexPoint({0.15, 0.2, 0.3, 0.35}));
  const SimplexPoint w0({0.4, 0.3, 0.2, 0.1});
  for (const auto& e : catalog()) {
    for (Variant v : {Variant::MD, Variant::MMD}) {
      const auto t = run(config(v, e.defaults, 0.1, 300), p, w0);
      for (std::size_t i = 1; i < t.records.size(); ++i) {
        ASSERT_LE(t.records[i].loss, t.records[i - 1].loss + 1e-12) << e.tag << " t=" << i;
      }
    }
  }
}

TEST(Run, ConfigValidation) {
  const auto p = quadratic_problem(SimplexPoint({0.5, 0.5}));
  auto cfg = config(Variant::MD, LinkFamily::natural());
  cfg.eta.eta0 = 0.0;
  EXPECT_THROW(run(cfg, p, SimplexPoint::uniform(2)), InvalidParams);
  cfg = config(Variant::MD, LinkFamily::natural());
  cfg.floor = 0.6;
  EXPECT_THROW(run(cfg, p, SimplexPoint::uniform(2)), InvalidParams);
  EXPECT_THROW(run(config(Variant::MD, LinkFamily::natural()), p, SimplexPoint::uniform(3)),
               LengthMismatch);
}

TEST(Portfolio, OnlineRunConsumesOneRoundPerStep) {
  Returns r;
  r.assets = {"a", "b"};
  r.rows.assign(500, {2.0, 1.0});
  const auto p = portfolio_problem(r);
  auto cfg = config(Variant::MD, LinkFamily::natural(), 0.1, 100000);
  const auto t = run(cfg, p, SimplexPoint::uniform(2));
  EXPECT_EQ(t.records.size(), 500u);
  EXPECT_TRUE(t.converged);
  EXPECT_GE(t.last().w[0], 0.99);
  EXPECT_NEAR(t.records[0].loss, -std::log(1.5), 1e-15);
  EXPECT_GT(cumulative_log_wealth(t), 0.0);
}
