// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

namespace diffmorph {

/// Sample, noised state or noise vector in the (normalized) signal space.
using StateVector = Eigen::VectorXd;
/// Semantic latent code z.
using SemanticCode = Eigen::VectorXd;

/// Discrete variance schedule beta_1..beta_T with cumulative products
/// alpha_bar_0..alpha_bar_T (alpha_bar_0 = 1).
///
/// Throughout the DDIM routines below only alpha_bar is used; beta and the
/// per-step alpha = 1 - beta appear only in the DDPM posterior mean.
class VarianceSchedule {
 public:
  /// Takes beta_1..beta_T. Throws ScheduleError unless every beta is in (0, 1).
  explicit VarianceSchedule(std::vector<double> betas);

  int steps() const { return static_cast<int>(betas_.size()); }
  double beta(int t) const;
  double alpha(int t) const { return 1.0 - beta(t); }
  double alpha_bar(int t) const;

  const std::vector<double>& betas() const { return betas_; }
  const std::vector<double>& alpha_bars() const { return alpha_bar_; }

 private:
  std::vector<double> betas_;
  std::vector<double> alpha_bar_;
};

VarianceSchedule make_linear_schedule(int steps, double beta_start, double beta_end);

/// Schedule used when nothing else is configured: T = 1000, beta linear in [1e-4, 0.02].
VarianceSchedule default_schedule();

enum class Spacing { kLinear, kQuadratic };

/// Timing sub-schedule tau_0 = 0 < tau_1 < ... < tau_N = T.
class SubSchedule {
 public:
  /// Throws ScheduleError unless tau starts at 0 and is strictly increasing.
  explicit SubSchedule(std::vector<int> tau);

  int steps() const { return static_cast<int>(tau_.size()) - 1; }
  int operator[](int i) const { return tau_.at(static_cast<std::size_t>(i)); }
  const std::vector<int>& tau() const { return tau_; }

 private:
  std::vector<int> tau_;
};

/// Linear spacing rounds i*T/N half-up; quadratic rounds T*(i/N)^2 half-up.
/// Collisions after rounding are rejected, never merged.
SubSchedule make_subschedule(const VarianceSchedule& sched, int steps, Spacing spacing);

/// Noise prediction model eps_theta(x, z, t).
///
/// `z` is null for unconditional evaluation. Implementations must be
/// deterministic and safe to call concurrently.
class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;
  virtual StateVector evaluate(const StateVector& x, const SemanticCode* z, int t) const = 0;
};

/// Per-step standard deviation of the DDIM inference family.
class SigmaPolicy {
 public:
  /// eta = 0 is the deterministic sampler.
  static SigmaPolicy from_eta(double eta);
  /// Explicit sigma_1..sigma_T, indexed by the step being left.
  static SigmaPolicy explicit_sigmas(std::vector<double> sigma);

  /// sigma for the transition t -> t_prev.
  double sigma(const VarianceSchedule& sched, int t, int t_prev) const;
  bool deterministic() const;

 private:
  SigmaPolicy() = default;
  double eta_ = 0.0;
  std::vector<double> sigma_;
};

/// x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) noise.
///
/// This is the closed-form marginal of the Markov kernel
/// q(x_t | x_{t-1}) = N(sqrt(1 - beta_t) x_{t-1}, beta_t I): composing t
/// Gaussian kernels scales the mean by prod sqrt(alpha_s) = sqrt(alpha_bar_t)
/// and accumulates variance 1 - alpha_bar_t.
StateVector forward_marginal_sample(const StateVector& x0, int t, const VarianceSchedule& sched,
                                    const StateVector& noise);

/// DDPM mean (1/sqrt(alpha_t)) (x_t - beta_t / sqrt(1 - alpha_bar_t) eps).
StateVector ddpm_posterior_mean(const StateVector& x_t, int t, const VarianceSchedule& sched,
                                const NoisePredictor& predictor, const SemanticCode* z = nullptr);

/// General DDIM transition t -> t_prev with standard deviation sigma_t:
/// predicted x0, the direction pointing back to x_t, and sigma_t * noise.
/// `noise` is ignored when sigma_t == 0.
StateVector ddim_step_general(const StateVector& x_t, int t, int t_prev,
                              const VarianceSchedule& sched, const NoisePredictor& predictor,
                              double sigma_t, const StateVector& noise,
                              const SemanticCode* z = nullptr);

/// Deterministic accelerated step x_{tau_i} -> x_{tau_{i-1}}, 1 <= i <= N.
StateVector ddim_reverse_step(const StateVector& x, const SemanticCode* z, int i,
                              const SubSchedule& sub, const VarianceSchedule& sched,
                              const NoisePredictor& predictor);

/// Deterministic encoder step x_{tau_{i-1}} -> x_{tau_i}, 1 <= i <= N. The
/// noise estimate is taken at the step being left, tau_{i-1}.
StateVector stochastic_encode_step(const StateVector& x, const SemanticCode* z, int i,
                                   const SubSchedule& sub, const VarianceSchedule& sched,
                                   const NoisePredictor& predictor);

/// Maps x0 to its stochastic code x_T. The semantic code must be computed first.
StateVector stochastic_encode(const StateVector& x0, const SemanticCode* z, const SubSchedule& sub,
                              const VarianceSchedule& sched, const NoisePredictor& predictor);

/// Deterministic generation x_T -> x_0 over i = N..1.
StateVector generate(const StateVector& x_T, const SemanticCode* z, const SubSchedule& sub,
                     const VarianceSchedule& sched, const NoisePredictor& predictor);

/// Generation with a (possibly) stochastic sigma policy. Noise for step i is
/// drawn from a stream derived from (seed, i), so the result depends only on
/// the arguments.
StateVector generate(const StateVector& x_T, const SemanticCode* z, const SubSchedule& sub,
                     const VarianceSchedule& sched, const NoisePredictor& predictor,
                     const SigmaPolicy& policy, std::uint64_t seed);

}  // namespace diffmorph
