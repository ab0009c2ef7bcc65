// Copyright 2026 The teleclass Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace teleclass {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration, malformed input files, violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class TaxonomyError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A key that is absent from a lookup table (vectors, classes, documents).
class LookupError : public Error {
 public:
  using Error::Error;
};

// LLM output that could not be interpreted. Keeps the raw response around.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string raw)
      : Error(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

// Failures of the completion backend after retries were exhausted.
class BackendError : public Error {
 public:
  BackendError(const std::string& what, int attempts)
      : Error(what), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

class RateLimitError : public BackendError {
 public:
  using BackendError::BackendError;
};

// Numerical failure during training or loss evaluation.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace teleclass
