// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace diffmorph {

/// Binary decisions of the detector trained on attack `detector` when shown
/// the morphs of attack `attack`. 1 = morph detected, 0 = bona fide.
struct DecisionRecord {
  std::string detector;
  std::string attack;
  std::map<std::string, int> decisions;  ///< pair id -> decision

  /// Throws InputError on a duplicate pair id or a decision outside {0, 1}.
  void add(const std::string& pair_id, int decision);
};

struct TransferOptions {
  /// Add one to both the joint and the marginal detection counts.
  bool laplace_smoothing = false;
};

/// T(alpha, beta) = #{pairs where f^alpha flags both the alpha and the beta
/// morph} / #{pairs where f^alpha flags the alpha morph}.
///
/// `self` is f^alpha on alpha, `cross` is f^alpha on beta; both must cover
/// the same pair ids. A zero denominator throws UndefinedMetricError unless
/// smoothing is enabled.
double transferability(const DecisionRecord& self, const DecisionRecord& cross,
                       const TransferOptions& opts = {});

/// Relative strength ln(T(alpha, beta) / T(beta, alpha)). Throws
/// UndefinedMetricError naming the vanishing transferability.
double rsm(double t_ab, double t_ba);

struct RsmMatrix {
  std::vector<std::string> attacks;  ///< sorted labels, row/column order
  Eigen::MatrixXd transfer;          ///< transfer(i, j) = T(attacks[i], attacks[j])
  Eigen::MatrixXd delta;             ///< delta(i, j) = RSM(attacks[i] || attacks[j])
};

/// Pairwise RSM over every attack that appears as a detector. Needs the
/// record (alpha on beta) for every ordered pair including alpha == beta;
/// missing records are reported together in one InputError.
RsmMatrix rsm_matrix(const std::vector<DecisionRecord>& records, const TransferOptions& opts = {});

}  // namespace diffmorph
