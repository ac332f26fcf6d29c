// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffmorph/rsm.hpp"

#include <cmath>
#include <set>

#include "diffmorph/errors.hpp"

namespace diffmorph {

void DecisionRecord::add(const std::string& pair_id, int decision) {
  if (decision != 0 && decision != 1) {
    throw InputError("decision for pair '" + pair_id + "' must be 0 or 1");
  }
  if (!decisions.emplace(pair_id, decision).second) {
    throw InputError("duplicate pair id '" + pair_id + "' for detector '" + detector +
                     "' on attack '" + attack + "'");
  }
}

double transferability(const DecisionRecord& self, const DecisionRecord& cross,
                       const TransferOptions& opts) {
  if (self.detector != cross.detector) {
    throw InputError("records come from different detectors ('" + self.detector + "', '" +
                     cross.detector + "')");
  }
  if (self.decisions.size() != cross.decisions.size()) {
    throw InputError("pair ids of '" + self.attack + "' and '" + cross.attack +
                     "' records differ in count");
  }
  long joint = 0;
  long marginal = 0;
  for (const auto& [pair, own] : self.decisions) {
    const auto it = cross.decisions.find(pair);
    if (it == cross.decisions.end()) {
      throw InputError("pair '" + pair + "' missing from detector '" + cross.detector +
                       "' on attack '" + cross.attack + "'");
    }
    if (own == 1) {
      ++marginal;
      if (it->second == 1) ++joint;
    }
  }
  if (opts.laplace_smoothing) {
    ++joint;
    ++marginal;
  }
  if (marginal == 0) {
    throw UndefinedMetricError("transferability " + self.detector + " -> " + cross.attack +
                               " undefined: detector '" + self.detector +
                               "' flags none of its own attack's morphs");
  }
  return static_cast<double>(joint) / static_cast<double>(marginal);
}

double rsm(double t_ab, double t_ba) {
  for (double t : {t_ab, t_ba}) {
    if (!(t >= 0.0 && t <= 1.0)) throw InputError("transferability must be in [0, 1]");
  }
  if (t_ab == 0.0 && t_ba == 0.0) {
    throw UndefinedMetricError("RSM undefined: both transferabilities are zero");
  }
  if (t_ab == 0.0) throw UndefinedMetricError("RSM undefined: T(alpha, beta) is zero");
  if (t_ba == 0.0) throw UndefinedMetricError("RSM undefined: T(beta, alpha) is zero");
  // Difference of logs keeps rsm(a, b) == -rsm(b, a) exact in floating point.
  return std::log(t_ab) - std::log(t_ba);
}

RsmMatrix rsm_matrix(const std::vector<DecisionRecord>& records, const TransferOptions& opts) {
  std::map<std::pair<std::string, std::string>, const DecisionRecord*> index;
  std::set<std::string> attacks;
  for (const auto& r : records) {
    if (!index.emplace(std::make_pair(r.detector, r.attack), &r).second) {
      throw InputError("duplicate record for detector '" + r.detector + "' on attack '" +
                       r.attack + "'");
    }
    attacks.insert(r.detector);
  }
  if (attacks.empty()) throw InputError("no decision records");

  std::string gaps;
  for (const auto& a : attacks) {
    for (const auto& b : attacks) {
      if (!index.count({a, b})) gaps += " (" + a + " on " + b + ")";
    }
  }
  if (!gaps.empty()) throw InputError("missing decision records:" + gaps);

  RsmMatrix m;
  m.attacks.assign(attacks.begin(), attacks.end());
  const auto n = static_cast<Eigen::Index>(m.attacks.size());
  m.transfer.resize(n, n);
  m.delta = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& a = m.attacks[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& b = m.attacks[static_cast<std::size_t>(j)];
      m.transfer(i, j) = transferability(*index.at({a, a}), *index.at({a, b}), opts);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = rsm(m.transfer(i, j), m.transfer(j, i));
      m.delta(i, j) = d;
      m.delta(j, i) = -d;
    }
  }
  return m;
}

}  // namespace diffmorph
