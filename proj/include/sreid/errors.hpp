// Copyright 2026 The salient-reid Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SREID_ERRORS_HPP_
#define SREID_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace sreid {

/// Root of every error thrown by the library. The CLI maps the subclasses
/// below onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed argument to a pure operation (empty map, zero-norm vector, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A precondition guaranteed by an upstream component was broken, e.g. a
/// negative activation reaching P-pooling or a batch that violates the
/// identity-balanced sampler contract.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Bad or inconsistent configuration. Exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Missing, unreadable or malformed data on disk. Exit code 3.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values during training or evaluation. Exit code 4.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Unknown or ambiguous layer tap name.
class TapError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace sreid

#endif  // SREID_ERRORS_HPP_
