// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "diffmorph/demo.hpp"
#include "diffmorph/errors.hpp"
#include "diffmorph/morph.hpp"
#include "diffmorph/random.hpp"
#include "doctest.h"

using namespace diffmorph;

namespace {

Eigen::VectorXd e(int i, int d) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  v[i] = 1.0;
  return v;
}

}  // namespace

TEST_CASE("lerp") {
  const auto u = Eigen::VectorXd::LinSpaced(3, 1.0, 3.0).eval();
  const auto v = Eigen::VectorXd::LinSpaced(3, -4.0, 0.5).eval();
  CHECK(lerp(u, v, 1.0) == u);
  CHECK(lerp(u, v, 0.0) == v);
  const auto mid = lerp(e(0, 3), e(1, 3), 0.5);
  CHECK(mid[0] == 0.5);
  CHECK(mid[1] == 0.5);
  CHECK(mid[2] == 0.0);
  CHECK_THROWS_AS(lerp(u, Eigen::VectorXd::Zero(2), 0.5), DomainError);
  CHECK_THROWS_AS(lerp(u, v, 1.5), DomainError);
}

TEST_CASE("slerp") {
  SUBCASE("orthogonal midpoint") {
    const auto m = slerp(e(0, 4), e(1, 4), 0.5);
    CHECK(std::abs(m[0] - std::sqrt(2.0) / 2) < 1e-12);
    CHECK(std::abs(m[1] - std::sqrt(2.0) / 2) < 1e-12);
    CHECK(m[2] == 0.0);
  }
  SUBCASE("endpoints are exact") {
    auto rng = make_stream(1, 0);
    for (int i = 0; i < 20; ++i) {
      const auto u = standard_normal(rng, 6);
      const auto v = standard_normal(rng, 6);
      CHECK(slerp(u, v, 1.0) == u);
      CHECK(slerp(u, v, 0.0) == v);
    }
  }
  SUBCASE("unit vectors stay on the sphere") {
    auto rng = make_stream(2, 0);
    for (int i = 0; i < 50; ++i) {
      const Eigen::VectorXd u = standard_normal(rng, 8).normalized();
      const Eigen::VectorXd v = standard_normal(rng, 8).normalized();
      for (double g : {0.0, 0.1, 0.25, 0.5, 0.77, 1.0}) {
        CHECK(std::abs(slerp(u, v, g).norm() - 1.0) < 1e-12);
      }
    }
  }
  SUBCASE("midpoint is symmetric") {
    auto rng = make_stream(3, 0);
    const auto u = standard_normal(rng, 8);
    const auto v = standard_normal(rng, 8);
    CHECK(slerp(u, v, 0.5) == slerp(v, u, 0.5));
  }
  SUBCASE("near-parallel falls back to lerp") {
    Eigen::VectorXd u = e(0, 3);
    Eigen::VectorXd v = e(0, 3) * 2.0;
    v[1] = 1e-6;
    CHECK(slerp(u, v, 0.3) == lerp(u, v, 0.3));
  }
  SUBCASE("degenerate inputs") {
    CHECK_THROWS_AS(slerp(Eigen::VectorXd::Zero(3), e(0, 3), 0.5), DomainError);
    CHECK_THROWS_AS(slerp(e(0, 3), -e(0, 3), 0.5), DomainError);
    CHECK_THROWS_AS(slerp(e(0, 3), e(1, 3), -0.1), DomainError);
  }
}

TEST_CASE("pre-morph variants") {
  const auto x = e(0, 3);
  const auto y = e(1, 3);
  const auto a = premorph_variant(MorphVariant::kA);
  const auto b = premorph_variant(MorphVariant::kB);
  const auto c = premorph_variant(MorphVariant::kC);
  CHECK(a(x, y) == x);
  CHECK(b(x, y) == x);
  const auto cx = c(x, y);
  CHECK(cx[0] == 0.5);
  CHECK(cx[1] == 0.5);
  CHECK(cx[2] == 0.0);
  CHECK(c(x, y) == c(y, x));
  CHECK_THROWS_AS(premorph_variant(MorphVariant::kExternal), InputError);
  ExternalPremorph empty;
  CHECK_THROWS_AS(premorph_variant(MorphVariant::kExternal, empty), InputError);

  ExternalPremorph ext;
  ext.add(x, Eigen::VectorXd::Constant(3, 7.0));
  const auto fx = premorph_variant(MorphVariant::kExternal, ext);
  CHECK(fx(x, y) == Eigen::VectorXd::Constant(3, 7.0));
  CHECK_THROWS_AS(fx(y, x), InputError);
}

TEST_CASE("variant names") {
  CHECK(parse_variant("c") == MorphVariant::kC);
  CHECK(parse_variant("External") == MorphVariant::kExternal);
  CHECK(to_string(MorphVariant::kB) == "B");
  CHECK_THROWS_AS(parse_variant("D"), InputError);
}

TEST_CASE("morph configuration") {
  MorphConfig cfg;
  CHECK(cfg.n_encode == 250);
  CHECK(cfg.n_decode == 100);
  CHECK(cfg.variant == MorphVariant::kC);
  CHECK(cfg.gamma_z == 0.5);
  CHECK(cfg.gamma_x == 0.5);
  cfg.gamma_x = 1.2;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg.gamma_x = 0.5;
  cfg.n_decode = 0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("diffusion morph pipeline") {
  const auto sched = default_schedule();
  const int d = 8;
  const AnalyticGaussianPredictor pred({1.0, d}, sched);
  const IdentitySemanticEncoder enc;
  auto rng = make_stream(21, 0);
  const StateVector xa = standard_normal(rng, d) * 2.0;
  const StateVector xb = standard_normal(rng, d) * 2.0;
  MorphConfig cfg;
  cfg.n_encode = 100;
  cfg.n_decode = 100;

  SUBCASE("identical inputs reduce to reconstruction") {
    const auto enc_sub = make_subschedule(sched, cfg.n_encode, cfg.spacing);
    const auto dec_sub = make_subschedule(sched, cfg.n_decode, cfg.spacing);
    const StateVector z = enc.encode(xa);
    const auto recon = generate(stochastic_encode(xa, &z, enc_sub, sched, pred), &z, dec_sub, sched, pred);
    for (auto v : {MorphVariant::kA, MorphVariant::kB, MorphVariant::kC}) {
      cfg.variant = v;
      const auto m = diffusion_morph(xa, xa, cfg, sched, pred, enc);
      CHECK((m - recon).norm() <= 1e-12 * recon.norm());
      CHECK((m - xa).norm() / xa.norm() < 0.05);
    }
  }
  SUBCASE("A and C coincide on equal inputs") {
    cfg.variant = MorphVariant::kA;
    const auto ma = diffusion_morph(xa, xa, cfg, sched, pred, enc);
    cfg.variant = MorphVariant::kC;
    CHECK(diffusion_morph(xa, xa, cfg, sched, pred, enc) == ma);
  }
  SUBCASE("endpoint recovery at gamma = 1 (variant A)") {
    cfg.variant = MorphVariant::kA;
    cfg.gamma_x = 1.0;
    cfg.gamma_z = 1.0;
    const auto m = diffusion_morph(xa, xb, cfg, sched, pred, enc);
    const auto r = diffusion_morph(xa, xa, cfg, sched, pred, enc);
    CHECK((m - r).norm() < 1e-9 * r.norm());
  }
  SUBCASE("swap symmetry at gamma = 0.5 (variant C)") {
    REQUIRE(slerp(xa, xb, 0.5) == slerp(xb, xa, 0.5));
    cfg.variant = MorphVariant::kC;
    CHECK(diffusion_morph(xa, xb, cfg, sched, pred, enc) ==
          diffusion_morph(xb, xa, cfg, sched, pred, enc));
  }
  SUBCASE("deterministic and traced") {
    const auto t1 = diffusion_morph_trace(xa, xb, cfg, sched, pred, enc);
    const auto t2 = diffusion_morph_trace(xa, xb, cfg, sched, pred, enc);
    CHECK(t1.morph == t2.morph);
    CHECK(t1.z_a == xa);
    CHECK(t1.z_ab == lerp(xa, xb, 0.5));
    CHECK(t1.premorph_a == t1.premorph_b);
    CHECK(t1.xT_ab == slerp(t1.xT_a, t1.xT_b, 0.5));
  }
  SUBCASE("variant B interpolates stochastic codes linearly") {
    cfg.variant = MorphVariant::kB;
    const auto t = diffusion_morph_trace(xa, xb, cfg, sched, pred, enc);
    CHECK(t.xT_ab == lerp(t.xT_a, t.xT_b, 0.5));
    CHECK(t.premorph_a == xa);
  }
  SUBCASE("external pre-morph reproduces variant C") {
    ExternalPremorph ext;
    const StateVector mid = 0.5 * (xa + xb);
    ext.add(xa, mid);
    ext.add(xb, mid);
    cfg.variant = MorphVariant::kC;
    const auto c = diffusion_morph(xa, xb, cfg, sched, pred, enc);
    cfg.variant = MorphVariant::kExternal;
    CHECK(diffusion_morph(xa, xb, cfg, sched, pred, enc, &ext) == c);
    CHECK_THROWS_AS(diffusion_morph(xa, xb, cfg, sched, pred, enc), InputError);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(diffusion_morph(xa, StateVector::Zero(3), cfg, sched, pred, enc), DomainError);
  }
}

TEST_CASE("demo world") {
  DemoConfig cfg;
  cfg.pairs = 40;
  cfg.seed = 5;
  const auto sched = default_schedule();
  const auto r1 = run_demo_morph(cfg, sched);
  const auto r2 = run_demo_morph(cfg, sched);
  REQUIRE(r1.pairs.size() == 40);
  CHECK(r1.all_finite);
  for (std::size_t k = 0; k < r1.pairs.size(); ++k) {
    const auto& p = r1.pairs[k];
    CHECK(p.morph == r2.pairs[k].morph);
    CHECK(std::abs(p.mean_a.norm() - 3.0) < 1e-12);
    CHECK(std::abs(p.mean_b.norm() - 3.0) < 1e-12);
    CHECK(std::abs((p.mean_a - p.mean_b).norm() - 4.0) < 1e-12);
  }
  // Pair k does not depend on how many pairs are requested.
  cfg.pairs = 10;
  const auto r3 = run_demo_morph(cfg, sched);
  CHECK(r3.pairs[9].morph == r1.pairs[9].morph);

  cfg.morph.variant = MorphVariant::kB;
  const auto rb = run_demo_morph(cfg, sched);
  CHECK(rb.all_finite);
  CHECK(rb.pairs[0].morph != r1.pairs[0].morph);

  cfg.separation = 7.0;
  CHECK_THROWS_AS(run_demo_morph(cfg, sched), InputError);
  cfg.separation = 4.0;
  cfg.morph.variant = MorphVariant::kExternal;
  CHECK_THROWS_AS(run_demo_morph(cfg, sched), InputError);
}
