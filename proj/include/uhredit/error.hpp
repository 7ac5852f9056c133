// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace uhredit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad shape, out-of-range value).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A file could not be read, written, or decoded.
class IoError : public Error {
 public:
  using Error::Error;
};

/// An external score/embedding/flow provider could not serve a request.
class ProviderError : public Error {
 public:
  using Error::Error;
};

/// Invalid pipeline configuration; reported before any work starts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace uhredit
