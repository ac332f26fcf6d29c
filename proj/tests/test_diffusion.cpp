// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "diffmorph/diffusion.hpp"
#include "diffmorph/errors.hpp"
#include "diffmorph/predictors.hpp"
#include "diffmorph/random.hpp"
#include "doctest.h"

using namespace diffmorph;

namespace {

StateVector e(int i, int d) {
  StateVector v = StateVector::Zero(d);
  v[i] = 1.0;
  return v;
}

// Term-by-term DDIM update written with explicit loops, independent of the
// library's vector kernel.
StateVector ddim_oracle(const StateVector& x, const StateVector& eps, double ab_t, double ab_prev,
                        double sigma, const StateVector& noise) {
  StateVector out(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double predicted_x0 = (x[k] - std::sqrt(1.0 - ab_t) * eps[k]) / std::sqrt(ab_t);
    const double direction = std::sqrt(1.0 - ab_prev - sigma * sigma) * eps[k];
    out[k] = std::sqrt(ab_prev) * predicted_x0 + direction + sigma * noise[k];
  }
  return out;
}

}  // namespace

TEST_CASE("linear schedule examples") {
  SUBCASE("single step") {
    const auto s = make_linear_schedule(1, 0.5, 0.5);
    CHECK(s.steps() == 1);
    CHECK(s.beta(1) == 0.5);
    CHECK(s.alpha_bar(0) == 1.0);
    CHECK(s.alpha_bar(1) == 0.5);
  }
  SUBCASE("two steps") {
    const auto s = make_linear_schedule(2, 0.1, 0.3);
    CHECK(s.alpha_bar(1) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(s.alpha_bar(2) == doctest::Approx(0.63).epsilon(1e-14));
  }
  SUBCASE("default DDPM schedule") {
    const auto s = default_schedule();
    // Oracle: direct product loop over the linearly spaced betas.
    double prod = 1.0;
    for (int t = 1; t <= 1000; ++t) prod *= 1.0 - (1e-4 + (0.02 - 1e-4) * (t - 1) / 999.0);
    CHECK(s.alpha_bar(1000) == doctest::Approx(prod).epsilon(1e-12));
    CHECK(s.alpha_bar(1000) == doctest::Approx(4.035829765375676e-05).epsilon(1e-9));
  }
  SUBCASE("invalid ranges") {
    CHECK_THROWS_AS(make_linear_schedule(0, 0.1, 0.2), ScheduleError);
    CHECK_THROWS_AS(make_linear_schedule(10, 0.0, 0.2), ScheduleError);
    CHECK_THROWS_AS(make_linear_schedule(10, 0.3, 0.2), ScheduleError);
    CHECK_THROWS_AS(make_linear_schedule(10, 0.1, 1.0), ScheduleError);
    CHECK_THROWS_AS(VarianceSchedule({0.1, 1.5}), ScheduleError);
  }
}

TEST_CASE("schedule invariant: alpha_bar is the running product") {
  const auto s = make_linear_schedule(500, 3e-4, 0.05);
  double running = 1.0;
  for (int t = 1; t <= s.steps(); ++t) {
    running *= 1.0 - s.beta(t);
    CHECK(std::abs(s.alpha_bar(t) - running) <= 1e-12 * running);
    CHECK(s.alpha_bar(t) < s.alpha_bar(t - 1));
  }
  CHECK_THROWS_AS(s.alpha_bar(501), IndexError);
  CHECK_THROWS_AS(s.beta(0), IndexError);
}

TEST_CASE("sub-schedules") {
  SUBCASE("no skipping") {
    const auto s = make_linear_schedule(4, 0.1, 0.2);
    CHECK(make_subschedule(s, 4, Spacing::kLinear).tau() == std::vector<int>{0, 1, 2, 3, 4});
  }
  SUBCASE("even spacing") {
    const auto s = make_linear_schedule(100, 1e-4, 0.02);
    CHECK(make_subschedule(s, 2, Spacing::kLinear).tau() == std::vector<int>{0, 50, 100});
  }
  SUBCASE("quadratic is increasing and ends at T") {
    const auto s = make_linear_schedule(10, 1e-3, 0.1);
    const auto sub = make_subschedule(s, 3, Spacing::kQuadratic);
    CHECK(sub.steps() == 3);
    CHECK(sub[0] == 0);
    CHECK(sub[3] == 10);
    for (int i = 1; i <= 3; ++i) CHECK(sub[i] > sub[i - 1]);
  }
  SUBCASE("linear rounding against an exhaustive oracle") {
    const auto s = default_schedule();
    for (int n : {1, 3, 7, 100, 250, 333, 999, 1000}) {
      const auto sub = make_subschedule(s, n, Spacing::kLinear);
      REQUIRE(sub.steps() == n);
      for (int i = 0; i <= n; ++i) {
        CHECK(sub[i] == static_cast<int>(std::floor(1000.0 * i / n + 0.5)));
      }
    }
  }
  SUBCASE("errors") {
    const auto s = default_schedule();
    CHECK_THROWS_AS(make_subschedule(s, 1001, Spacing::kLinear), ScheduleError);
    CHECK_THROWS_AS(make_subschedule(s, 0, Spacing::kLinear), ScheduleError);
    // T (i/N)^2 rounds tau_1 to 0 for N = 250.
    CHECK_THROWS_AS(make_subschedule(s, 250, Spacing::kQuadratic), ScheduleError);
    CHECK_THROWS_AS(SubSchedule({0, 2, 2}), ScheduleError);
    CHECK_THROWS_AS(SubSchedule({1, 2}), ScheduleError);
  }
}

TEST_CASE("forward marginal") {
  const auto s = make_linear_schedule(2, 0.1, 0.3);
  const int d = 3;
  SUBCASE("zero signal") {
    const auto x = forward_marginal_sample(StateVector::Zero(d), 2, s, e(0, d));
    CHECK(x[0] == doctest::Approx(std::sqrt(0.37)));
    CHECK(x[1] == 0.0);
  }
  SUBCASE("plugged alpha_bar") {
    const auto x = forward_marginal_sample(e(0, d), 2, s, e(0, d));
    CHECK(x[0] == doctest::Approx(std::sqrt(0.63) + std::sqrt(0.37)).epsilon(1e-14));
  }
  SUBCASE("no-noise limit") {
    const auto tiny = make_linear_schedule(1, 1e-14, 1e-14);
    const StateVector x0 = StateVector::LinSpaced(d, -1.0, 2.0);
    const auto x = forward_marginal_sample(x0, 1, tiny, StateVector::Ones(d));
    CHECK((x - x0).norm() < 1e-6);
  }
  CHECK_THROWS_AS(forward_marginal_sample(e(0, d), 0, s, e(0, d)), IndexError);
  CHECK_THROWS_AS(forward_marginal_sample(e(0, d), 3, s, e(0, d)), IndexError);
}

TEST_CASE("DDPM posterior mean") {
  const int d = 4;
  SUBCASE("zero predictor") {
    const auto s = default_schedule();
    const StateVector x = StateVector::LinSpaced(d, -2.0, 1.0);
    const auto mu = ddpm_posterior_mean(x, 500, s, ZeroPredictor{});
    CHECK((mu - x / std::sqrt(s.alpha(500))).norm() < 1e-15);
  }
  SUBCASE("hand arithmetic") {
    const VarianceSchedule s({0.19});
    const auto mu = ddpm_posterior_mean(e(0, d), 1, s, ConstantPredictor(e(0, d)));
    CHECK(mu[0] == doctest::Approx((1.0 / 0.9) * (1.0 - 0.19 / std::sqrt(0.19))).epsilon(1e-14));
    CHECK(mu[1] == 0.0);
  }
  SUBCASE("linear in (x_t, eps)") {
    const auto s = default_schedule();
    auto rng = make_stream(11, 0);
    const StateVector x = standard_normal(rng, d);
    const StateVector eps = standard_normal(rng, d);
    const double c = 2.5;
    const auto m1 = ddpm_posterior_mean(x, 321, s, ConstantPredictor(eps));
    const auto m2 = ddpm_posterior_mean(c * x, 321, s, ConstantPredictor(c * eps));
    CHECK((m2 - c * m1).norm() < 1e-12);
  }
}

TEST_CASE("general DDIM step") {
  const auto s = default_schedule();
  const int d = 4;
  auto rng = make_stream(5, 0);

  SUBCASE("pure rescaling under the zero predictor") {
    const StateVector x = standard_normal(rng, d);
    const auto y = ddim_step_general(x, 700, 300, s, ZeroPredictor{}, 0.0, StateVector());
    CHECK((y - std::sqrt(s.alpha_bar(300) / s.alpha_bar(700)) * x).norm() < 1e-12);
  }
  SUBCASE("random sigma matches the term-wise oracle") {
    for (int trial = 0; trial < 50; ++trial) {
      const StateVector x = standard_normal(rng, d);
      const StateVector eps = standard_normal(rng, d);
      const StateVector noise = standard_normal(rng, d);
      std::uniform_int_distribution<int> pick(2, 1000);
      const int t = pick(rng);
      const int t_prev = std::uniform_int_distribution<int>(1, t - 1)(rng);
      const double bound = std::sqrt(1.0 - s.alpha_bar(t_prev));
      const double sigma = std::uniform_real_distribution<double>(0.0, bound)(rng);
      const auto got = ddim_step_general(x, t, t_prev, s, ConstantPredictor(eps), sigma, noise);
      const auto want = ddim_oracle(x, eps, s.alpha_bar(t), s.alpha_bar(t_prev), sigma, noise);
      CHECK((got - want).norm() <= 1e-12 * (1.0 + want.norm()));
    }
  }
  SUBCASE("sigma above the bound") {
    const StateVector x = standard_normal(rng, d);
    const double too_big = std::sqrt(1.0 - s.alpha_bar(10)) * 1.01;
    CHECK_THROWS_AS(ddim_step_general(x, 20, 10, s, ZeroPredictor{}, too_big, x), DomainError);
    CHECK_THROWS_AS(ddim_step_general(x, 20, 0, s, ZeroPredictor{}, 1e-3, x), DomainError);
  }
  SUBCASE("index errors") {
    const StateVector x = standard_normal(rng, d);
    CHECK_THROWS_AS(ddim_step_general(x, 10, 10, s, ZeroPredictor{}, 0.0, x), IndexError);
    CHECK_THROWS_AS(ddim_step_general(x, 1001, 10, s, ZeroPredictor{}, 0.0, x), IndexError);
  }
  SUBCASE("sigma = 0 agrees with the accelerated step bit for bit") {
    const SubSchedule sub({0, 137, 600, 1000});
    const StateVector z = standard_normal(rng, d);
    const AnalyticGaussianPredictor pred({0.7, d}, s);
    for (int i = 1; i <= 3; ++i) {
      const StateVector x = standard_normal(rng, d);
      const auto a = ddim_step_general(x, sub[i], sub[i - 1], s, pred, 0.0, StateVector(), &z);
      const auto b = ddim_reverse_step(x, &z, i, sub, s, pred);
      CHECK(a == b);
    }
  }
}

TEST_CASE("sigma policy") {
  const auto s = default_schedule();
  CHECK(SigmaPolicy::from_eta(0.0).deterministic());
  CHECK(SigmaPolicy::from_eta(0.0).sigma(s, 500, 400) == 0.0);
  const auto p = SigmaPolicy::from_eta(1.0);
  const double ab_t = s.alpha_bar(500);
  const double ab_p = s.alpha_bar(400);
  const double want = std::sqrt((1 - ab_p) / (1 - ab_t)) * std::sqrt(1 - ab_t / ab_p);
  CHECK(p.sigma(s, 500, 400) == doctest::Approx(want).epsilon(1e-14));
  // eta = 1 never violates sigma^2 <= 1 - alpha_bar_prev.
  CHECK(p.sigma(s, 500, 400) <= std::sqrt(1 - ab_p));
  CHECK(p.sigma(s, 10, 0) == 0.0);
  const auto ex = SigmaPolicy::explicit_sigmas(std::vector<double>(1000, 0.0));
  CHECK(ex.deterministic());
  CHECK_THROWS_AS(SigmaPolicy::from_eta(-1.0), DomainError);

  // Stochastic generation is reproducible for a fixed seed.
  const int d = 3;
  const StateVector z = StateVector::Ones(d);
  const AnalyticGaussianPredictor pred({1.0, d}, s);
  const auto sub = make_subschedule(s, 50, Spacing::kLinear);
  const StateVector xT = StateVector::Constant(d, 0.3);
  const auto g1 = generate(xT, &z, sub, s, pred, p, 42);
  const auto g2 = generate(xT, &z, sub, s, pred, p, 42);
  const auto g3 = generate(xT, &z, sub, s, pred, p, 43);
  CHECK(g1 == g2);
  CHECK(g1 != g3);
  CHECK(generate(xT, &z, sub, s, pred, SigmaPolicy::from_eta(0.0), 1) == generate(xT, &z, sub, s, pred));
}

TEST_CASE("encode and reverse steps") {
  const auto s = default_schedule();
  const int d = 5;
  auto rng = make_stream(9, 0);

  SUBCASE("zero predictor rescales") {
    const SubSchedule sub({0, 100, 400, 1000});
    const StateVector x = standard_normal(rng, d);
    const auto y = stochastic_encode_step(x, nullptr, 2, sub, s, ZeroPredictor{});
    CHECK((y - std::sqrt(s.alpha_bar(400) / s.alpha_bar(100)) * x).norm() < 1e-12);
  }
  SUBCASE("constant predictor: encode then reverse is the identity") {
    const SubSchedule sub({0, 10, 250, 600, 1000});
    const ConstantPredictor pred(standard_normal(rng, d));
    for (int i = 1; i <= sub.steps(); ++i) {
      const StateVector x = standard_normal(rng, d);
      const auto up = stochastic_encode_step(x, nullptr, i, sub, s, pred);
      const auto back = ddim_reverse_step(up, nullptr, i, sub, s, pred);
      CHECK((back - x).norm() <= 1e-11 * (1.0 + x.norm()));
    }
  }
  SUBCASE("single step collapses to the predicted x0") {
    const SubSchedule sub({0, 1000});
    const StateVector eps = standard_normal(rng, d);
    const StateVector x = standard_normal(rng, d);
    const auto y = ddim_reverse_step(x, nullptr, 1, sub, s, ConstantPredictor(eps));
    const StateVector x0_hat = (x - std::sqrt(1 - s.alpha_bar(1000)) * eps) / std::sqrt(s.alpha_bar(1000));
    CHECK((y - x0_hat).norm() <= 1e-12 * x0_hat.norm());
  }
  SUBCASE("zero fixed point") {
    const auto sub = make_subschedule(s, 100, Spacing::kLinear);
    CHECK(generate(StateVector::Zero(d), nullptr, sub, s, ZeroPredictor{}).isZero(0.0));
  }
  SUBCASE("index errors") {
    const auto sub = make_subschedule(s, 10, Spacing::kLinear);
    const StateVector x = StateVector::Zero(d);
    CHECK_THROWS_AS(ddim_reverse_step(x, nullptr, 0, sub, s, ZeroPredictor{}), IndexError);
    CHECK_THROWS_AS(ddim_reverse_step(x, nullptr, 11, sub, s, ZeroPredictor{}), IndexError);
    CHECK_THROWS_AS(stochastic_encode_step(x, nullptr, 11, sub, s, ZeroPredictor{}), IndexError);
    const auto short_sched = make_linear_schedule(100, 1e-4, 0.02);
    CHECK_THROWS_AS(ddim_reverse_step(x, nullptr, 1, sub, short_sched, ZeroPredictor{}), IndexError);
  }
}

TEST_CASE("end-to-end encode / generate") {
  const auto s = default_schedule();
  const int d = 8;
  const GaussianWorld world{1.0, d};
  const AnalyticGaussianPredictor pred(world, s);
  auto rng = make_stream(3, 0);
  StateVector mu = standard_normal(rng, d);
  mu *= 3.0 / mu.norm();

  SUBCASE("round trip within 5% at N = 100") {
    const auto sub = make_subschedule(s, 100, Spacing::kLinear);
    const StateVector x0 = mu + standard_normal(rng, d);
    const auto back = generate(stochastic_encode(x0, &mu, sub, s, pred), &mu, sub, s, pred);
    CHECK((back - x0).norm() / x0.norm() < 0.05);
  }
  SUBCASE("encode is deterministic") {
    const auto sub = make_subschedule(s, 250, Spacing::kLinear);
    const StateVector x0 = mu + standard_normal(rng, d);
    CHECK(stochastic_encode(x0, &mu, sub, s, pred) == stochastic_encode(x0, &mu, sub, s, pred));
  }
  SUBCASE("N = T equals the step-by-step full schedule") {
    const auto small = make_linear_schedule(60, 1e-3, 0.2);
    const AnalyticGaussianPredictor p(world, small);
    const auto full = make_subschedule(small, 60, Spacing::kLinear);
    const StateVector xT = standard_normal(rng, d);
    StateVector x = xT;
    for (int t = 60; t >= 1; --t) x = ddim_step_general(x, t, t - 1, small, p, 0.0, StateVector(), &mu);
    CHECK(generate(xT, &mu, full, small, p) == x);
  }
}
