// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "diffmorph/diffusion.hpp"

namespace diffmorph {

/// Semantic encoder E: X -> Z.
class SemanticEncoder {
 public:
  virtual ~SemanticEncoder() = default;
  virtual SemanticCode encode(const StateVector& x) const = 0;
};

/// Z = X, E(x) = x.
class IdentitySemanticEncoder final : public SemanticEncoder {
 public:
  SemanticCode encode(const StateVector& x) const override { return x; }
};

/// Conditional Gaussian data model q(x0 | z) = N(z, s^2 I) in dimension d.
struct GaussianWorld {
  double s = 1.0;
  int dim = 8;
};

/// Posterior-mean noise E[eps | x_t, z] for data drawn from a GaussianWorld:
///
///   eps(x_t, z, t) = sqrt(1 - a) (x_t - sqrt(a) z) / (a s^2 + 1 - a),  a = alpha_bar_t
///
/// With x_t = sqrt(a) x0 + sqrt(1 - a) eps, the pair (eps, x_t) is jointly
/// Gaussian given z with Cov(eps, x_t) = sqrt(1 - a) I and
/// Var(x_t) = (a s^2 + 1 - a) I, which gives the regression above. It is the
/// MSE-optimal predictor, and -eps / sqrt(1 - a) is the score of x_t.
class AnalyticGaussianPredictor final : public NoisePredictor {
 public:
  AnalyticGaussianPredictor(GaussianWorld world, const VarianceSchedule& sched);

  /// Throws InputError when z is absent (conditional-only predictor).
  StateVector evaluate(const StateVector& x, const SemanticCode* z, int t) const override;

  const GaussianWorld& world() const { return world_; }

 private:
  GaussianWorld world_;
  std::vector<double> alpha_bar_;
};

/// eps = 0 everywhere.
class ZeroPredictor final : public NoisePredictor {
 public:
  StateVector evaluate(const StateVector& x, const SemanticCode*, int) const override {
    return StateVector::Zero(x.size());
  }
};

/// Returns the same vector for every input.
class ConstantPredictor final : public NoisePredictor {
 public:
  explicit ConstantPredictor(StateVector value) : value_(std::move(value)) {}
  StateVector evaluate(const StateVector& x, const SemanticCode* z, int t) const override;

 private:
  StateVector value_;
};

}  // namespace diffmorph
