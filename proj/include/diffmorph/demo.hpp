// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "diffmorph/io.hpp"
#include "diffmorph/morph.hpp"

namespace diffmorph {

/// Synthetic Gaussian world for morph demos. Identity means lie on the
/// sphere of radius `mean_norm`; each pair is separated by `separation * s`.
/// Input images are the means plus `image_noise * s` Gaussian noise.
struct DemoConfig {
  MorphConfig morph;
  GaussianWorld world;
  double mean_norm = 3.0;
  double separation = 4.0;
  double image_noise = 0.0;
  int pairs = 500;
  std::uint64_t seed = 0;
};

struct DemoPair {
  StateVector mean_a, mean_b;
  StateVector x_a, x_b;
  StateVector morph;
  double dist_mid = 0.0;  ///< to (mean_a + mean_b) / 2
  double dist_a = 0.0;
  double dist_b = 0.0;
  bool closer_to_midpoint = false;
};

struct DemoResult {
  std::vector<DemoPair> pairs;
  double midpoint_fraction = 0.0;  ///< share of pairs closer to the midpoint than to either mean
  double mean_dist_mid = 0.0;
  double mean_dist_nearest = 0.0;
  bool all_finite = true;
};

/// Draws pair k from stream k of `cfg.seed`, so results do not depend on
/// evaluation order. `premorph` is required for MorphVariant::kExternal and
/// must hold an entry for every pair index.
DemoResult run_demo_morph(const DemoConfig& cfg, const VarianceSchedule& sched,
                          const PremorphTable* premorph = nullptr);

/// Writes the desk-scale fixture set into `dir`:
///   embeddings_diffusion.csv, embeddings_blend.csv  two attacks over one bona fide set
///   mmpmr_hand.csv      two morphs, ProdAvg-MMPMR = 0.375 at threshold 1
///   scores.csv          genuine / impostor / morph distances of the diffusion attack
///   decisions.csv       three detectors x three attacks; RSM(diffusion || landmark) = ln 2
///   premorph.csv        midpoint pre-morphs for the first 20 default demo pairs
/// Returns the written paths.
std::vector<std::filesystem::path> emit_fixtures(const std::filesystem::path& dir,
                                                 std::uint64_t seed);

}  // namespace diffmorph
