// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace diffmorph {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid variance schedule or sub-schedule parameters.
class ScheduleError : public Error {
 public:
  using Error::Error;
};

/// Step or sub-step index outside the schedule.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Numerical domain violation (negative radicand, zero-norm slerp input, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Covariance or matrix with an eigenvalue below -1e-8 * trace.
class IndefiniteMatrixError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Malformed input file, missing data, or a contract violation on user input.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Metric has no defined value on the given data (e.g. zero denominator).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace diffmorph
