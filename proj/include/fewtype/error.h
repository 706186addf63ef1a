// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace fewtype {

// Base of every error raised by the library. The CLI maps each subclass to an
// exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed textual input (label paths, patterns).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or hyperparameter values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Bad data files: malformed JSONL lines, unknown labels, too few examples.
class DataError : public Error {
 public:
  using Error::Error;
};

// Violated precondition of an operation (e.g. a prompt with no masks).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Provider could not be reached or answered garbage. Retryable.
class TransportError : public Error {
 public:
  using Error::Error;
  bool retryable() const { return true; }
};

}  // namespace fewtype
