// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "diffmorph/diffusion.hpp"
#include "diffmorph/predictors.hpp"

namespace diffmorph {

/// gamma * u + (1 - gamma) * v. gamma weights the first argument.
Eigen::VectorXd lerp(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double gamma);

/// Spherical interpolation with the same weighting convention as lerp:
/// slerp(u, v, 1) = u and slerp(u, v, 0) = v.
///
/// theta = arccos(u.v / (|u| |v|)). Falls back to lerp when
/// |cos theta| > 1 - 1e-7 with the vectors parallel; throws DomainError for
/// zero-norm or antiparallel inputs.
Eigen::VectorXd slerp(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double gamma);

/// Configuration rows of the morph study. External takes pre-morphed
/// vectors supplied by the caller instead of computing them.
enum class MorphVariant { kA, kB, kC, kExternal };

std::string_view to_string(MorphVariant v);
/// Accepts "A", "B", "C", "external" (case-insensitive). Throws InputError.
MorphVariant parse_variant(std::string_view s);

/// Image-space pre-processing xi(x, y) applied before stochastic encoding.
using PremorphFn = std::function<StateVector(const StateVector&, const StateVector&)>;

/// Precomputed pre-morph outputs keyed by the exact first argument.
class ExternalPremorph {
 public:
  void add(StateVector key, StateVector premorphed);
  bool empty() const { return entries_.empty(); }
  /// Throws InputError when `x` has no entry.
  StateVector apply(const StateVector& x, const StateVector& y) const;

 private:
  std::vector<std::pair<StateVector, StateVector>> entries_;
};

/// A, B: xi(x, y) = x. C: xi(x, y) = (x + y) / 2.
/// External needs data; use the overload below. Throws InputError.
PremorphFn premorph_variant(MorphVariant variant);
PremorphFn premorph_variant(MorphVariant variant, const ExternalPremorph& external);

struct MorphConfig {
  double gamma_z = 0.5;
  double gamma_x = 0.5;
  MorphVariant variant = MorphVariant::kC;
  int n_encode = 250;
  int n_decode = 100;
  Spacing spacing = Spacing::kLinear;

  /// Throws InputError on gammas outside [0, 1] or step counts < 1.
  void validate() const;
};

/// Intermediate codes of one morph.
struct MorphTrace {
  SemanticCode z_a, z_b, z_ab;
  StateVector premorph_a, premorph_b;
  StateVector xT_a, xT_b, xT_ab;
  StateVector morph;
};

/// The diffusion morphing pipeline with sigma = 0:
///   1. z_a = E(x_a), z_b = E(x_b)
///   2. pre-morph both inputs with xi (always from the original inputs)
///   3. stochastically encode each, conditioned on its own semantic code
///   4. x_T^ab = l_X(x_T^a, x_T^b; gamma_x), slerp for A/C/external, lerp for B
///   5. z_ab = lerp(z_a, z_b; gamma_z)
///   6. generate from x_T^ab conditioned on z_ab
/// `external` is consulted only for MorphVariant::kExternal.
MorphTrace diffusion_morph_trace(const StateVector& x_a, const StateVector& x_b,
                                 const MorphConfig& cfg, const VarianceSchedule& sched,
                                 const NoisePredictor& predictor, const SemanticEncoder& encoder,
                                 const ExternalPremorph* external = nullptr);

StateVector diffusion_morph(const StateVector& x_a, const StateVector& x_b,
                            const MorphConfig& cfg, const VarianceSchedule& sched,
                            const NoisePredictor& predictor, const SemanticEncoder& encoder,
                            const ExternalPremorph* external = nullptr);

}  // namespace diffmorph
