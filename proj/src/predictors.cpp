// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffmorph/predictors.hpp"

#include <cmath>
#include <string>

#include "diffmorph/errors.hpp"

namespace diffmorph {

AnalyticGaussianPredictor::AnalyticGaussianPredictor(GaussianWorld world,
                                                     const VarianceSchedule& sched)
    : world_(world), alpha_bar_(sched.alpha_bars()) {
  if (!(world_.s > 0.0) || !std::isfinite(world_.s)) {
    throw InputError("Gaussian world needs finite s > 0");
  }
  if (world_.dim < 1) throw InputError("Gaussian world needs dim >= 1");
}

StateVector AnalyticGaussianPredictor::evaluate(const StateVector& x, const SemanticCode* z,
                                                int t) const {
  if (z == nullptr) throw InputError("analytic Gaussian predictor requires a semantic code");
  if (x.size() != world_.dim || z->size() != world_.dim) {
    throw DomainError("expected dimension " + std::to_string(world_.dim));
  }
  if (t < 0 || static_cast<std::size_t>(t) >= alpha_bar_.size()) {
    throw IndexError("step " + std::to_string(t) + " outside the schedule");
  }
  const double a = alpha_bar_[static_cast<std::size_t>(t)];
  const double var = a * world_.s * world_.s + (1.0 - a);
  return (x - std::sqrt(a) * *z) * (std::sqrt(1.0 - a) / var);
}

StateVector ConstantPredictor::evaluate(const StateVector& x, const SemanticCode*, int) const {
  if (x.size() != value_.size()) throw DomainError("constant predictor dimension mismatch");
  return value_;
}

}  // namespace diffmorph
