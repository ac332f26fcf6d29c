// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffmorph/morph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "diffmorph/errors.hpp"

namespace diffmorph {
namespace {

constexpr double kParallelTol = 1e-7;

void check_pair(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double gamma) {
  if (u.size() != v.size()) {
    throw DomainError("interpolation dimension mismatch: " + std::to_string(u.size()) + " vs " +
                      std::to_string(v.size()));
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("gamma must be in [0, 1]");
}

}  // namespace

Eigen::VectorXd lerp(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double gamma) {
  check_pair(u, v, gamma);
  return gamma * u + (1.0 - gamma) * v;
}

Eigen::VectorXd slerp(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double gamma) {
  check_pair(u, v, gamma);
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw DomainError("slerp of a zero-norm vector");
  // Exact endpoints; sin(theta)/sin(theta) need not round to 1.
  if (gamma == 1.0) return u;
  if (gamma == 0.0) return v;
  const double cos_theta = std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
  if (cos_theta > 1.0 - kParallelTol) return lerp(u, v, gamma);
  if (cos_theta < -1.0 + kParallelTol) {
    throw DomainError("slerp of antiparallel vectors has no unique great circle");
  }
  const double theta = std::acos(cos_theta);
  const double sin_theta = std::sin(theta);
  return (std::sin(gamma * theta) / sin_theta) * u +
         (std::sin((1.0 - gamma) * theta) / sin_theta) * v;
}

std::string_view to_string(MorphVariant v) {
  switch (v) {
    case MorphVariant::kA: return "A";
    case MorphVariant::kB: return "B";
    case MorphVariant::kC: return "C";
    case MorphVariant::kExternal: return "external";
  }
  return "?";
}

MorphVariant parse_variant(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "a") return MorphVariant::kA;
  if (lower == "b") return MorphVariant::kB;
  if (lower == "c") return MorphVariant::kC;
  if (lower == "external" || lower == "external-premorph") return MorphVariant::kExternal;
  throw InputError("unknown morph variant '" + std::string(s) + "' (expected A, B, C, external)");
}

void ExternalPremorph::add(StateVector key, StateVector premorphed) {
  if (key.size() != premorphed.size()) throw InputError("pre-morph entry dimension mismatch");
  entries_.emplace_back(std::move(key), std::move(premorphed));
}

StateVector ExternalPremorph::apply(const StateVector& x, const StateVector&) const {
  for (const auto& [key, value] : entries_) {
    if (key.size() == x.size() && key == x) return value;
  }
  throw InputError("no external pre-morph supplied for this input");
}

PremorphFn premorph_variant(MorphVariant variant) {
  switch (variant) {
    case MorphVariant::kA:
    case MorphVariant::kB:
      return [](const StateVector& x, const StateVector&) { return StateVector(x); };
    case MorphVariant::kC:
      return [](const StateVector& x, const StateVector& y) {
        if (x.size() != y.size()) throw DomainError("pre-morph dimension mismatch");
        return StateVector(0.5 * (x + y));
      };
    case MorphVariant::kExternal:
      break;
  }
  throw InputError("external pre-morph variant needs supplied pre-morph data");
}

PremorphFn premorph_variant(MorphVariant variant, const ExternalPremorph& external) {
  if (variant != MorphVariant::kExternal) return premorph_variant(variant);
  if (external.empty()) throw InputError("external pre-morph variant needs supplied pre-morph data");
  return [&external](const StateVector& x, const StateVector& y) { return external.apply(x, y); };
}

void MorphConfig::validate() const {
  if (!(gamma_z >= 0.0 && gamma_z <= 1.0)) throw InputError("gamma_z must be in [0, 1]");
  if (!(gamma_x >= 0.0 && gamma_x <= 1.0)) throw InputError("gamma_x must be in [0, 1]");
  if (n_encode < 1 || n_decode < 1) throw InputError("step counts must be >= 1");
}

MorphTrace diffusion_morph_trace(const StateVector& x_a, const StateVector& x_b,
                                 const MorphConfig& cfg, const VarianceSchedule& sched,
                                 const NoisePredictor& predictor, const SemanticEncoder& encoder,
                                 const ExternalPremorph* external) {
  cfg.validate();
  if (x_a.size() != x_b.size()) throw DomainError("morph inputs differ in dimension");
  const PremorphFn xi = (cfg.variant == MorphVariant::kExternal && external != nullptr)
                            ? premorph_variant(cfg.variant, *external)
                            : premorph_variant(cfg.variant);
  const SubSchedule enc_sub = make_subschedule(sched, cfg.n_encode, cfg.spacing);
  const SubSchedule dec_sub = make_subschedule(sched, cfg.n_decode, cfg.spacing);

  MorphTrace tr;
  tr.z_a = encoder.encode(x_a);
  tr.z_b = encoder.encode(x_b);
  tr.premorph_a = xi(x_a, x_b);
  tr.premorph_b = xi(x_b, x_a);
  tr.xT_a = stochastic_encode(tr.premorph_a, &tr.z_a, enc_sub, sched, predictor);
  tr.xT_b = stochastic_encode(tr.premorph_b, &tr.z_b, enc_sub, sched, predictor);
  tr.xT_ab = cfg.variant == MorphVariant::kB ? lerp(tr.xT_a, tr.xT_b, cfg.gamma_x)
                                             : slerp(tr.xT_a, tr.xT_b, cfg.gamma_x);
  tr.z_ab = lerp(tr.z_a, tr.z_b, cfg.gamma_z);
  tr.morph = generate(tr.xT_ab, &tr.z_ab, dec_sub, sched, predictor);
  return tr;
}

StateVector diffusion_morph(const StateVector& x_a, const StateVector& x_b,
                            const MorphConfig& cfg, const VarianceSchedule& sched,
                            const NoisePredictor& predictor, const SemanticEncoder& encoder,
                            const ExternalPremorph* external) {
  return diffusion_morph_trace(x_a, x_b, cfg, sched, predictor, encoder, external).morph;
}

}  // namespace diffmorph
