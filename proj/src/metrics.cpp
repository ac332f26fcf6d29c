// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffmorph/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "diffmorph/errors.hpp"

namespace diffmorph {
namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kIndefiniteTol = 1e-8;

void check_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DomainError("matrix is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    throw DomainError("matrix is not symmetric within 1e-10");
  }
}

double indefinite_floor(const Eigen::MatrixXd& m) {
  return -kIndefiniteTol * std::max(m.trace(), std::numeric_limits<double>::min());
}

// Eigen-solve with one retry on a diagonally regularized matrix.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen_solve(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() == Eigen::Success) return es;
  const double eps = 1e-10 * m.trace() / static_cast<double>(m.rows());
  Eigen::MatrixXd reg = m;
  reg.diagonal().array() += eps;
  es.compute(reg);
  if (es.info() != Eigen::Success) throw DomainError("eigendecomposition failed");
  return es;
}

std::vector<double> sorted_copy(std::span<const double> v, const char* what) {
  if (v.empty()) throw InputError(std::string(what) + " list is empty");
  std::vector<double> s(v.begin(), v.end());
  for (double d : s) {
    if (!std::isfinite(d)) throw InputError(std::string(what) + " list has a non-finite value");
  }
  std::sort(s.begin(), s.end());
  return s;
}

// Largest k in [0, n] with k / n <= rate.
std::size_t allowed_errors(std::size_t n, double rate) {
  std::size_t k = static_cast<std::size_t>(std::floor(rate * static_cast<double>(n)));
  k = std::min(k, n);
  while (k > 0 && static_cast<double>(k) / static_cast<double>(n) > rate) --k;
  while (k < n && static_cast<double>(k + 1) / static_cast<double>(n) <= rate) ++k;
  return k;
}

}  // namespace

void GaussianStats::validate() const {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw DomainError("covariance shape does not match the mean");
  }
  check_symmetric(cov);
  const auto es = eigen_solve(cov);
  if (es.eigenvalues().size() > 0 && es.eigenvalues().minCoeff() < indefinite_floor(cov)) {
    throw IndefiniteMatrixError("covariance has a significantly negative eigenvalue");
  }
}

GaussianStats fit_gaussian(const Eigen::MatrixXd& samples) {
  if (samples.rows() < 2) throw InputError("fit_gaussian needs at least 2 samples");
  GaussianStats g;
  g.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - g.mean.transpose();
  g.cov = (centered.transpose() * centered) / static_cast<double>(samples.rows() - 1);
  g.cov = 0.5 * (g.cov + g.cov.transpose());
  return g;
}

GaussianStats fit_gaussian(std::span<const Eigen::VectorXd> samples) {
  if (samples.size() < 2) throw InputError("fit_gaussian needs at least 2 samples");
  const Eigen::Index d = samples.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(samples.size()), d);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].size() != d) throw InputError("samples differ in dimension");
    m.row(static_cast<Eigen::Index>(i)) = samples[i].transpose();
  }
  return fit_gaussian(m);
}

Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m) {
  check_symmetric(m);
  if (m.size() == 0) return m;
  const auto es = eigen_solve(m);
  Eigen::VectorXd ev = es.eigenvalues();
  if (ev.minCoeff() < indefinite_floor(m)) {
    throw IndefiniteMatrixError("matrix has eigenvalue " + std::to_string(ev.minCoeff()) +
                                " below -1e-8 * trace");
  }
  ev = ev.cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd& v = es.eigenvectors();
  Eigen::MatrixXd r = v * ev.asDiagonal() * v.transpose();
  return 0.5 * (r + r.transpose());
}

double frechet_distance(const GaussianStats& g1, const GaussianStats& g2) {
  if (g1.mean.size() != g2.mean.size()) throw DomainError("Gaussian dimensions differ");
  g1.validate();
  g2.validate();
  const Eigen::MatrixXd s1_half = matrix_sqrt_psd(g1.cov);
  Eigen::MatrixXd inner = s1_half * g2.cov * s1_half;
  inner = 0.5 * (inner + inner.transpose());
  // tr((S1 S2)^{1/2}) == tr((S1^{1/2} S2 S1^{1/2})^{1/2}); the latter is symmetric PSD.
  const double cross = matrix_sqrt_psd(inner).trace();
  const double d = (g1.mean - g2.mean).squaredNorm() + g1.cov.trace() + g2.cov.trace() -
                   2.0 * cross;
  if (d < 0.0) {
    if (d >= -1e-6) return 0.0;
    throw DomainError("Frechet distance evaluated to " + std::to_string(d));
  }
  return d;
}

double calibrate_threshold_fmr(std::span<const double> impostor, double fmr) {
  if (!(fmr > 0.0 && fmr < 1.0)) throw InputError("fmr must be in (0, 1)");
  const auto s = sorted_copy(impostor, "impostor");
  // #{d < s[k]} <= k for every k, and any larger observed value admits > k.
  return s[allowed_errors(s.size(), fmr)];
}

double bpcer_threshold(std::span<const double> genuine, double bpcer) {
  if (!(bpcer > 0.0 && bpcer < 1.0)) throw InputError("bpcer must be in (0, 1)");
  const auto s = sorted_copy(genuine, "genuine");
  const std::size_t n = s.size();
  const std::size_t k = allowed_errors(n, bpcer);
  if (k == 0) return std::nextafter(s.back(), std::numeric_limits<double>::infinity());
  // Rejected = #{d >= t} = n - lower_bound(t). Start at s[n - k] and move to
  // the next distinct value if ties below it would reject too many.
  double t = s[n - k];
  auto lb = std::lower_bound(s.begin(), s.end(), t);
  if (static_cast<std::size_t>(s.end() - lb) > k) {
    auto ub = std::upper_bound(s.begin(), s.end(), t);
    t = ub == s.end() ? std::nextafter(s.back(), std::numeric_limits<double>::infinity()) : *ub;
  }
  return t;
}

double match_rate(std::span<const double> distances, double threshold) {
  if (distances.empty()) throw InputError("distance list is empty");
  const auto hits = std::count_if(distances.begin(), distances.end(),
                                  [threshold](double d) { return d < threshold; });
  return static_cast<double>(hits) / static_cast<double>(distances.size());
}

double apcer_at(std::span<const double> morph, double threshold) {
  return match_rate(morph, threshold);
}

double rejection_rate(std::span<const double> genuine, double threshold) {
  return 1.0 - match_rate(genuine, threshold);
}

void EmbeddingTable::claim(const std::string& image_id, const Eigen::VectorXd& f) {
  if (image_id.empty()) throw InputError("empty image id");
  if (f.size() == 0) throw InputError("image '" + image_id + "' has no features");
  if (!f.allFinite()) throw InputError("image '" + image_id + "' has non-finite features");
  if (dim_ == 0) {
    dim_ = static_cast<int>(f.size());
  } else if (f.size() != dim_) {
    throw InputError("image '" + image_id + "' has dimension " + std::to_string(f.size()) +
                     ", table has " + std::to_string(dim_));
  }
  if (!ids_.emplace(image_id, 0).second) throw InputError("duplicate image id '" + image_id + "'");
}

void EmbeddingTable::add_bona_fide(BonaFideImage img) {
  if (img.identity.empty()) throw InputError("bona fide image without identity");
  claim(img.image_id, img.features);
  bona_[img.identity].push_back(std::move(img));
}

void EmbeddingTable::add_morph(MorphImage img) {
  for (const auto* id : {&img.identity_a, &img.identity_b}) {
    if (bona_.find(*id) == bona_.end()) {
      throw InputError("morph '" + img.image_id + "' references unknown identity '" + *id + "'");
    }
  }
  claim(img.image_id, img.features);
  morphs_.push_back(std::move(img));
}

std::size_t EmbeddingTable::bona_fide_count() const {
  std::size_t n = 0;
  for (const auto& [id, imgs] : bona_) n += imgs.size();
  return n;
}

ScoreSet compute_scores(const EmbeddingTable& table) {
  ScoreSet s;
  std::vector<const BonaFideImage*> all;
  for (const auto& [id, imgs] : table.bona_fide()) {
    for (const auto& img : imgs) all.push_back(&img);
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const double d = (all[i]->features - all[j]->features).norm();
      (all[i]->identity == all[j]->identity ? s.genuine : s.impostor).push_back(d);
    }
  }
  for (const auto& m : table.morphs()) {
    const std::set<std::string> sources(m.source_ids.begin(), m.source_ids.end());
    for (const auto* id : {&m.identity_a, &m.identity_b}) {
      for (const auto& img : table.bona_fide().at(*id)) {
        if (sources.count(img.image_id)) continue;
        s.morph.push_back((m.features - img.features).norm());
      }
    }
  }
  return s;
}

MmpmrResult mmpmr_prodavg_detail(const EmbeddingTable& table, double gamma,
                                 MissingReference missing) {
  if (table.morphs().empty()) throw UndefinedMetricError("MMPMR needs at least one morph");
  MmpmrResult r;
  double total = 0.0;
  for (const auto& m : table.morphs()) {
    const std::set<std::string> sources(m.source_ids.begin(), m.source_ids.end());
    double product = 1.0;
    bool skip = false;
    for (const auto* id : {&m.identity_a, &m.identity_b}) {
      std::size_t count = 0;
      std::size_t hits = 0;
      for (const auto& img : table.bona_fide().at(*id)) {
        if (sources.count(img.image_id)) continue;
        ++count;
        if ((m.features - img.features).norm() < gamma) ++hits;
      }
      if (count == 0) {
        if (missing == MissingReference::kError) {
          throw UndefinedMetricError("morph '" + m.image_id + "': identity '" + *id +
                                     "' has no bona fide image left after excluding sources");
        }
        skip = true;
        break;
      }
      product *= static_cast<double>(hits) / static_cast<double>(count);
    }
    if (skip) {
      r.skipped.push_back(m.image_id);
      continue;
    }
    r.per_morph.push_back(product);
    total += product;
  }
  if (r.per_morph.empty()) throw UndefinedMetricError("every morph was skipped");
  r.value = total / static_cast<double>(r.per_morph.size());
  return r;
}

double mmpmr_prodavg(const EmbeddingTable& table, double gamma, MissingReference missing) {
  return mmpmr_prodavg_detail(table, gamma, missing).value;
}

}  // namespace diffmorph
