// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffmorph/demo.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "diffmorph/errors.hpp"
#include "diffmorph/random.hpp"

namespace diffmorph {
namespace {

struct PairInputs {
  StateVector mean_a, mean_b, x_a, x_b;
};

// Two points on the sphere of radius R at chord distance c.
PairInputs draw_pair(const DemoConfig& cfg, std::uint64_t k) {
  const int d = cfg.world.dim;
  const double radius = cfg.mean_norm;
  const double chord = cfg.separation * cfg.world.s;
  auto rng = make_stream(cfg.seed, k);

  StateVector u = standard_normal(rng, d);
  u.normalize();
  StateVector w = standard_normal(rng, d);
  w -= w.dot(u) * u;
  w.normalize();
  const double cos_phi = 1.0 - chord * chord / (2.0 * radius * radius);
  const double sin_phi = std::sqrt(std::max(0.0, 1.0 - cos_phi * cos_phi));

  PairInputs p;
  p.mean_a = radius * u;
  p.mean_b = radius * (cos_phi * u + sin_phi * w);
  p.x_a = p.mean_a;
  p.x_b = p.mean_b;
  if (cfg.image_noise > 0.0) {
    p.x_a += cfg.image_noise * cfg.world.s * standard_normal(rng, d);
    p.x_b += cfg.image_noise * cfg.world.s * standard_normal(rng, d);
  }
  return p;
}

void validate(const DemoConfig& cfg) {
  cfg.morph.validate();
  if (cfg.pairs < 1) throw InputError("pairs must be >= 1");
  if (cfg.world.dim < 2) throw InputError("demo world needs dim >= 2");
  if (!(cfg.world.s > 0.0)) throw InputError("s must be > 0");
  if (!(cfg.mean_norm > 0.0)) throw InputError("mean norm must be > 0");
  if (!(cfg.separation > 0.0) || cfg.separation * cfg.world.s > 2.0 * cfg.mean_norm) {
    throw InputError("separation * s must be in (0, 2 * mean_norm]");
  }
  if (!(cfg.image_noise >= 0.0)) throw InputError("image noise must be >= 0");
}

std::string id_name(int i) {
  std::ostringstream os;
  os << "id" << (i < 10 ? "0" : "") << i;
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, text);
}

}  // namespace

DemoResult run_demo_morph(const DemoConfig& cfg, const VarianceSchedule& sched,
                          const PremorphTable* premorph) {
  validate(cfg);
  if (cfg.morph.variant == MorphVariant::kExternal && premorph == nullptr) {
    throw InputError("external pre-morph variant needs a pre-morph file");
  }
  const AnalyticGaussianPredictor predictor(cfg.world, sched);
  const IdentitySemanticEncoder encoder;

  DemoResult res;
  res.pairs.reserve(static_cast<std::size_t>(cfg.pairs));
  double sum_mid = 0.0;
  double sum_near = 0.0;
  int closer = 0;
  for (int k = 0; k < cfg.pairs; ++k) {
    PairInputs in = draw_pair(cfg, static_cast<std::uint64_t>(k));
    ExternalPremorph external;
    if (cfg.morph.variant == MorphVariant::kExternal) {
      const auto it = premorph->find(k);
      if (it == premorph->end()) {
        throw InputError("pre-morph file has no entry for pair " + std::to_string(k));
      }
      if (it->second.first.size() != in.x_a.size()) {
        throw InputError("pre-morph dimension does not match the world dimension");
      }
      external.add(in.x_a, it->second.first);
      external.add(in.x_b, it->second.second);
    }
    DemoPair p;
    p.morph = diffusion_morph(in.x_a, in.x_b, cfg.morph, sched, predictor, encoder, &external);
    const StateVector mid = 0.5 * (in.mean_a + in.mean_b);
    p.dist_mid = (p.morph - mid).norm();
    p.dist_a = (p.morph - in.mean_a).norm();
    p.dist_b = (p.morph - in.mean_b).norm();
    p.closer_to_midpoint = p.dist_mid < p.dist_a && p.dist_mid < p.dist_b;
    res.all_finite = res.all_finite && p.morph.allFinite();
    closer += p.closer_to_midpoint ? 1 : 0;
    sum_mid += p.dist_mid;
    sum_near += std::min(p.dist_a, p.dist_b);
    p.mean_a = std::move(in.mean_a);
    p.mean_b = std::move(in.mean_b);
    p.x_a = std::move(in.x_a);
    p.x_b = std::move(in.x_b);
    res.pairs.push_back(std::move(p));
  }
  const double n = static_cast<double>(cfg.pairs);
  res.midpoint_fraction = closer / n;
  res.mean_dist_mid = sum_mid / n;
  res.mean_dist_nearest = sum_near / n;
  return res;
}

std::vector<std::filesystem::path> emit_fixtures(const std::filesystem::path& dir,
                                                 std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  const auto emit = [&](const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    written.push_back(dir / name);
  };

  // Identities on a sphere, four noisy bona fide images each.
  constexpr int kIdentities = 8;
  constexpr int kImages = 4;
  constexpr int kDim = 8;
  const GaussianWorld world{1.0, kDim};
  const auto sched = default_schedule();
  const AnalyticGaussianPredictor predictor(world, sched);
  const IdentitySemanticEncoder encoder;

  EmbeddingTable bona;
  std::vector<std::vector<StateVector>> images(kIdentities);
  for (int i = 0; i < kIdentities; ++i) {
    auto rng = make_stream(seed, 1000 + static_cast<std::uint64_t>(i));
    StateVector mean = standard_normal(rng, kDim);
    mean *= 3.0 / mean.norm();
    for (int j = 0; j < kImages; ++j) {
      images[i].push_back(mean + 0.35 * standard_normal(rng, kDim));
      bona.add_bona_fide({id_name(i), id_name(i) + "_img" + std::to_string(j), images[i].back()});
    }
  }

  EmbeddingTable diffusion = bona;
  EmbeddingTable blend = bona;
  const MorphConfig cfg;  // variant C, 250 / 100 steps
  for (int i = 0; i < kIdentities; ++i) {
    const int a = i;
    const int b = (i + 1) % kIdentities;
    const std::vector<std::string> sources = {id_name(a) + "_img0", id_name(b) + "_img0"};
    const StateVector& xa = images[a][0];
    const StateVector& xb = images[b][0];
    const std::string tag = id_name(a) + "_" + id_name(b);
    diffusion.add_morph({"diffusion_" + tag, id_name(a), id_name(b), sources,
                         diffusion_morph(xa, xb, cfg, sched, predictor, encoder)});
    auto rng = make_stream(seed, 2000 + static_cast<std::uint64_t>(i));
    blend.add_morph({"blend_" + tag, id_name(a), id_name(b), sources,
                     lerp(xa, xb, 0.5) + 0.2 * standard_normal(rng, kDim)});
  }
  std::ostringstream os;
  export_embeddings(diffusion, os);
  emit("embeddings_diffusion.csv", os.str());
  os.str("");
  export_embeddings(blend, os);
  emit("embeddings_blend.csv", os.str());

  // Hand fixture: per-morph values 0.5 and 0.25 at threshold 1.
  EmbeddingTable hand;
  const auto v2 = [](double x, double y) { return (Eigen::VectorXd(2) << x, y).finished(); };
  hand.add_bona_fide({"A", "a1", v2(0.0, 0.0)});
  hand.add_bona_fide({"A", "a2", v2(5.0, 0.0)});
  hand.add_bona_fide({"A", "a3", v2(0.1, 0.0)});
  hand.add_bona_fide({"B", "b1", v2(0.0, 0.5)});
  hand.add_bona_fide({"B", "b2", v2(0.0, 5.0)});
  hand.add_morph({"m1", "A", "B", {"a3", "b2"}, v2(0.0, 0.2)});
  hand.add_morph({"m2", "A", "B", {"a3"}, v2(0.0, 0.1)});
  os.str("");
  export_embeddings(hand, os);
  emit("mmpmr_hand.csv", os.str());

  os.str("");
  export_scores(compute_scores(diffusion), os);
  emit("scores.csv", os.str());

  // Decisions: T(diffusion, landmark) = 4/8, T(landmark, diffusion) = 2/8.
  const std::vector<std::string> attacks = {"diffusion", "landmark", "stylegan"};
  std::vector<DecisionRecord> records;
  auto rng = make_stream(seed, 3000);
  std::bernoulli_distribution coin(0.6);
  for (const auto& det : attacks) {
    for (const auto& att : attacks) {
      DecisionRecord r{det, att, {}};
      for (int p = 0; p < 8; ++p) {
        int d = 0;
        if (det == att) {
          d = 1;
        } else if (det == "diffusion" && att == "landmark") {
          d = p < 4 ? 1 : 0;
        } else if (det == "landmark" && att == "diffusion") {
          d = p < 2 ? 1 : 0;
        } else {
          d = (p == 0 || coin(rng)) ? 1 : 0;
        }
        r.add("p" + std::to_string(p), d);
      }
      records.push_back(std::move(r));
    }
  }
  os.str("");
  export_decisions(records, os);
  emit("decisions.csv", os.str());

  DemoConfig demo;
  demo.seed = seed;
  demo.pairs = 20;
  PremorphTable premorph;
  for (int k = 0; k < demo.pairs; ++k) {
    const auto in = draw_pair(demo, static_cast<std::uint64_t>(k));
    const StateVector mid = 0.5 * (in.x_a + in.x_b);
    premorph[k] = {mid, mid};
  }
  os.str("");
  export_premorph(premorph, os);
  emit("premorph.csv", os.str());
  return written;
}

}  // namespace diffmorph
