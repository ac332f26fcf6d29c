// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace diffmorph {

/// Gaussian fit of a feature distribution.
struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  /// Throws DomainError / IndefiniteMatrixError on asymmetric (> 1e-10) or
  /// indefinite (eigenvalue < -1e-8 * trace) covariance.
  void validate() const;
};

/// Sample mean and unbiased (n - 1) covariance. Rows are samples.
GaussianStats fit_gaussian(const Eigen::MatrixXd& samples);
GaussianStats fit_gaussian(std::span<const Eigen::VectorXd> samples);

/// Principal square root of a symmetric PSD matrix via eigendecomposition.
/// Eigenvalues in [-1e-8 * trace, 0) are clamped to zero; anything lower
/// raises IndefiniteMatrixError.
Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m);

/// Squared 2-Wasserstein distance between two Gaussians (the FID value):
///   |mu1 - mu2|^2 + tr(S1 + S2 - 2 (S1^{1/2} S2 S1^{1/2})^{1/2})
double frechet_distance(const GaussianStats& g1, const GaussianStats& g2);

/// Largest observed distance gamma with #{d < gamma} / n <= fmr.
double calibrate_threshold_fmr(std::span<const double> impostor, double fmr);

/// Smallest threshold with #{d >= threshold} / n <= bpcer, taken from the
/// observed distances (or just above the maximum when no bona fide
/// rejection is allowed).
double bpcer_threshold(std::span<const double> genuine, double bpcer);

/// Fraction of attack distances strictly below the threshold.
double apcer_at(std::span<const double> morph, double threshold);

/// Fraction of distances at or above the threshold (rejected bona fides).
double rejection_rate(std::span<const double> genuine, double threshold);

/// Fraction of distances strictly below the threshold (matches).
double match_rate(std::span<const double> distances, double threshold);

struct BonaFideImage {
  std::string identity;
  std::string image_id;
  Eigen::VectorXd features;
};

struct MorphImage {
  std::string image_id;
  std::string identity_a;
  std::string identity_b;
  std::vector<std::string> source_ids;
  Eigen::VectorXd features;
};

/// Face-recognition features of bona fide images grouped by identity, plus
/// morphs tagged with their two component identities.
class EmbeddingTable {
 public:
  /// Feature dimension; 0 while the table is empty.
  int dim() const { return dim_; }

  /// Throws InputError on a duplicate image id or dimension mismatch.
  void add_bona_fide(BonaFideImage img);
  /// Throws InputError additionally when a component identity is unknown.
  /// Bona fide images must therefore be added first.
  void add_morph(MorphImage img);

  const std::map<std::string, std::vector<BonaFideImage>>& bona_fide() const { return bona_; }
  const std::vector<MorphImage>& morphs() const { return morphs_; }
  std::size_t bona_fide_count() const;

 private:
  void claim(const std::string& image_id, const Eigen::VectorXd& f);

  int dim_ = 0;
  std::map<std::string, std::vector<BonaFideImage>> bona_;
  std::vector<MorphImage> morphs_;
  std::map<std::string, int> ids_;
};

/// L2 comparison scores.
struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> impostor;
  std::vector<double> morph;
};

/// All same-identity pairs (genuine), all cross-identity pairs (impostor),
/// and every morph against every remaining bona fide image of its two
/// component identities (morph).
ScoreSet compute_scores(const EmbeddingTable& table);

enum class MissingReference { kError, kSkip };

struct MmpmrResult {
  double value = 0.0;
  std::vector<double> per_morph;
  std::vector<std::string> skipped;  ///< morph ids without remaining references
};

/// ProdAvg-MMPMR: mean over morphs of prod_{k in {a,b}} of the fraction of
/// identity k's bona fide images (excluding the morph's source images) whose
/// feature distance to the morph is < gamma.
///
/// Throws UndefinedMetricError when there are no morphs, or, under
/// MissingReference::kError, when an identity has no remaining image.
MmpmrResult mmpmr_prodavg_detail(const EmbeddingTable& table, double gamma,
                                 MissingReference missing = MissingReference::kError);
double mmpmr_prodavg(const EmbeddingTable& table, double gamma,
                     MissingReference missing = MissingReference::kError);

}  // namespace diffmorph
