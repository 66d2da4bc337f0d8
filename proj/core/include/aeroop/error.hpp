// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace aeroop {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform to an operation's rule.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf values, divergence, or an ill-posed numeric request.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed, truncated or inconsistent file or dataset.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or unknown configuration key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input whose content cannot be used (too short, degenerate).
class DataError : public Error {
 public:
  using Error::Error;
};

/// The request is well-formed but not supported for this model or data.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace aeroop
