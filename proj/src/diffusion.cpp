// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffmorph/diffusion.hpp"

#include <cmath>
#include <string>

#include "diffmorph/errors.hpp"
#include "diffmorph/random.hpp"

namespace diffmorph {
namespace {

void check_step(const VarianceSchedule& sched, int t, int lo, const char* what) {
  if (t < lo || t > sched.steps()) {
    throw IndexError(std::string(what) + " " + std::to_string(t) + " outside [" +
                     std::to_string(lo) + ", " + std::to_string(sched.steps()) + "]");
  }
}

void check_sub_index(const SubSchedule& sub, const VarianceSchedule& sched, int i) {
  if (i < 1 || i > sub.steps()) {
    throw IndexError("sub-schedule index " + std::to_string(i) + " outside [1, " +
                     std::to_string(sub.steps()) + "]");
  }
  if (sub[sub.steps()] > sched.steps()) {
    throw IndexError("sub-schedule ends at " + std::to_string(sub[sub.steps()]) +
                     " beyond T = " + std::to_string(sched.steps()));
  }
}

StateVector predict(const NoisePredictor& predictor, const StateVector& x, const SemanticCode* z,
                    int t) {
  StateVector eps = predictor.evaluate(x, z, t);
  if (eps.size() != x.size()) {
    throw DomainError("noise predictor returned dimension " + std::to_string(eps.size()) +
                      ", expected " + std::to_string(x.size()));
  }
  return eps;
}

// Shared DDIM kernel: re-noise the predicted x0 from level `ab_from` to
// level `ab_to`. Every deterministic step (reverse, encode, general with
// sigma = 0) goes through here so they agree bit for bit.
StateVector ddim_update(const StateVector& x, const StateVector& eps, double ab_from,
                        double ab_to, double sigma) {
  const double radicand = 1.0 - ab_to - sigma * sigma;
  if (radicand < 0.0) {
    throw DomainError("sigma^2 = " + std::to_string(sigma * sigma) +
                      " exceeds 1 - alpha_bar = " + std::to_string(1.0 - ab_to));
  }
  const StateVector x0_hat = (x - std::sqrt(1.0 - ab_from) * eps) / std::sqrt(ab_from);
  return std::sqrt(ab_to) * x0_hat + std::sqrt(radicand) * eps;
}

}  // namespace

VarianceSchedule::VarianceSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
  if (betas_.empty()) throw ScheduleError("variance schedule needs at least one step");
  alpha_bar_.reserve(betas_.size() + 1);
  alpha_bar_.push_back(1.0);
  for (std::size_t i = 0; i < betas_.size(); ++i) {
    const double b = betas_[i];
    if (!(b > 0.0 && b < 1.0)) {
      throw ScheduleError("beta_" + std::to_string(i + 1) + " = " + std::to_string(b) +
                          " not in (0, 1)");
    }
    alpha_bar_.push_back(alpha_bar_.back() * (1.0 - b));
  }
}

double VarianceSchedule::beta(int t) const {
  check_step(*this, t, 1, "step");
  return betas_[static_cast<std::size_t>(t - 1)];
}

double VarianceSchedule::alpha_bar(int t) const {
  check_step(*this, t, 0, "step");
  return alpha_bar_[static_cast<std::size_t>(t)];
}

VarianceSchedule make_linear_schedule(int steps, double beta_start, double beta_end) {
  if (steps < 1) throw ScheduleError("T must be >= 1");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw ScheduleError("need 0 < beta_start <= beta_end < 1");
  }
  std::vector<double> betas(static_cast<std::size_t>(steps));
  if (steps == 1) {
    betas[0] = beta_start;
  } else {
    const double span = beta_end - beta_start;
    for (int t = 0; t < steps; ++t) {
      betas[static_cast<std::size_t>(t)] = beta_start + span * t / (steps - 1);
    }
    betas.back() = beta_end;
  }
  return VarianceSchedule(std::move(betas));
}

VarianceSchedule default_schedule() { return make_linear_schedule(1000, 1e-4, 0.02); }

SubSchedule::SubSchedule(std::vector<int> tau) : tau_(std::move(tau)) {
  if (tau_.size() < 2) throw ScheduleError("sub-schedule needs N >= 1");
  if (tau_.front() != 0) throw ScheduleError("sub-schedule must start at tau_0 = 0");
  for (std::size_t i = 1; i < tau_.size(); ++i) {
    if (tau_[i] <= tau_[i - 1]) {
      throw ScheduleError("sub-schedule not strictly increasing at i = " + std::to_string(i));
    }
  }
}

SubSchedule make_subschedule(const VarianceSchedule& sched, int steps, Spacing spacing) {
  const long long T = sched.steps();
  const long long N = steps;
  if (N < 1 || N > T) {
    throw ScheduleError("sub-schedule length N = " + std::to_string(N) + " must be in [1, " +
                        std::to_string(T) + "]");
  }
  std::vector<int> tau(static_cast<std::size_t>(N + 1));
  for (long long i = 0; i <= N; ++i) {
    // Integer round-half-up of i*T/N (or T*i^2/N^2).
    long long v = 0;
    if (spacing == Spacing::kLinear) {
      v = (2 * i * T + N) / (2 * N);
    } else {
      v = (2 * T * i * i + N * N) / (2 * N * N);
    }
    tau[static_cast<std::size_t>(i)] = static_cast<int>(v);
  }
  for (std::size_t i = 1; i < tau.size(); ++i) {
    if (tau[i] <= tau[i - 1]) {
      throw ScheduleError("rounding collapses tau_" + std::to_string(i - 1) + " and tau_" +
                          std::to_string(i) + " to " + std::to_string(tau[i]) +
                          "; choose fewer steps or linear spacing");
    }
  }
  return SubSchedule(std::move(tau));
}

SigmaPolicy SigmaPolicy::from_eta(double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw DomainError("eta must be finite and >= 0");
  SigmaPolicy p;
  p.eta_ = eta;
  return p;
}

SigmaPolicy SigmaPolicy::explicit_sigmas(std::vector<double> sigma) {
  for (double s : sigma) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("sigma must be finite and >= 0");
  }
  SigmaPolicy p;
  p.sigma_ = std::move(sigma);
  return p;
}

double SigmaPolicy::sigma(const VarianceSchedule& sched, int t, int t_prev) const {
  if (!sigma_.empty()) {
    if (t < 1 || static_cast<std::size_t>(t) > sigma_.size()) {
      throw IndexError("no explicit sigma for step " + std::to_string(t));
    }
    return sigma_[static_cast<std::size_t>(t - 1)];
  }
  if (eta_ == 0.0) return 0.0;
  const double ab_t = sched.alpha_bar(t);
  const double ab_prev = sched.alpha_bar(t_prev);
  return eta_ * std::sqrt((1.0 - ab_prev) / (1.0 - ab_t)) * std::sqrt(1.0 - ab_t / ab_prev);
}

bool SigmaPolicy::deterministic() const {
  if (sigma_.empty()) return eta_ == 0.0;
  for (double s : sigma_) {
    if (s != 0.0) return false;
  }
  return true;
}

StateVector forward_marginal_sample(const StateVector& x0, int t, const VarianceSchedule& sched,
                                    const StateVector& noise) {
  check_step(sched, t, 1, "step");
  if (noise.size() != x0.size()) throw DomainError("noise dimension does not match x0");
  const double ab = sched.alpha_bar(t);
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * noise;
}

StateVector ddpm_posterior_mean(const StateVector& x_t, int t, const VarianceSchedule& sched,
                                const NoisePredictor& predictor, const SemanticCode* z) {
  check_step(sched, t, 1, "step");
  const StateVector eps = predict(predictor, x_t, z, t);
  const double coef = sched.beta(t) / std::sqrt(1.0 - sched.alpha_bar(t));
  return (x_t - coef * eps) / std::sqrt(sched.alpha(t));
}

StateVector ddim_step_general(const StateVector& x_t, int t, int t_prev,
                              const VarianceSchedule& sched, const NoisePredictor& predictor,
                              double sigma_t, const StateVector& noise, const SemanticCode* z) {
  check_step(sched, t, 1, "step");
  if (t_prev < 0 || t_prev >= t) {
    throw IndexError("t_prev = " + std::to_string(t_prev) + " must be in [0, t)");
  }
  if (!(sigma_t >= 0.0)) throw DomainError("sigma_t must be >= 0");
  const StateVector eps = predict(predictor, x_t, z, t);
  StateVector out = ddim_update(x_t, eps, sched.alpha_bar(t), sched.alpha_bar(t_prev), sigma_t);
  if (sigma_t != 0.0) {
    if (noise.size() != x_t.size()) throw DomainError("noise dimension does not match x_t");
    out += sigma_t * noise;
  }
  return out;
}

StateVector ddim_reverse_step(const StateVector& x, const SemanticCode* z, int i,
                              const SubSchedule& sub, const VarianceSchedule& sched,
                              const NoisePredictor& predictor) {
  check_sub_index(sub, sched, i);
  const int t = sub[i];
  const int t_prev = sub[i - 1];
  const StateVector eps = predict(predictor, x, z, t);
  return ddim_update(x, eps, sched.alpha_bar(t), sched.alpha_bar(t_prev), 0.0);
}

StateVector stochastic_encode_step(const StateVector& x, const SemanticCode* z, int i,
                                   const SubSchedule& sub, const VarianceSchedule& sched,
                                   const NoisePredictor& predictor) {
  check_sub_index(sub, sched, i);
  const int t_from = sub[i - 1];
  const int t_to = sub[i];
  const StateVector eps = predict(predictor, x, z, t_from);
  return ddim_update(x, eps, sched.alpha_bar(t_from), sched.alpha_bar(t_to), 0.0);
}

StateVector stochastic_encode(const StateVector& x0, const SemanticCode* z, const SubSchedule& sub,
                              const VarianceSchedule& sched, const NoisePredictor& predictor) {
  StateVector x = x0;
  for (int i = 1; i <= sub.steps(); ++i) x = stochastic_encode_step(x, z, i, sub, sched, predictor);
  return x;
}

StateVector generate(const StateVector& x_T, const SemanticCode* z, const SubSchedule& sub,
                     const VarianceSchedule& sched, const NoisePredictor& predictor) {
  StateVector x = x_T;
  for (int i = sub.steps(); i >= 1; --i) x = ddim_reverse_step(x, z, i, sub, sched, predictor);
  return x;
}

StateVector generate(const StateVector& x_T, const SemanticCode* z, const SubSchedule& sub,
                     const VarianceSchedule& sched, const NoisePredictor& predictor,
                     const SigmaPolicy& policy, std::uint64_t seed) {
  if (policy.deterministic()) return generate(x_T, z, sub, sched, predictor);
  StateVector x = x_T;
  for (int i = sub.steps(); i >= 1; --i) {
    check_sub_index(sub, sched, i);
    const int t = sub[i];
    const int t_prev = sub[i - 1];
    const double sigma = policy.sigma(sched, t, t_prev);
    auto rng = make_stream(seed, static_cast<std::uint64_t>(i));
    const StateVector noise = standard_normal(rng, x.size());
    x = ddim_step_general(x, t, t_prev, sched, predictor, sigma, noise, z);
  }
  return x;
}

}  // namespace diffmorph
