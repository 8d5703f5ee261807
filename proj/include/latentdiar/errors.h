// latentdiar/errors.h
//
// Copyright 2026  The latentdiar Authors
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

#ifndef LATENTDIAR_ERRORS_H_
#define LATENTDIAR_ERRORS_H_

#include <stdexcept>
#include <string>

namespace latentdiar {

// Base of every error raised by the library. The CLI maps subclasses onto
// exit codes, so new error kinds should derive from one of the groups below.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes that do not chain, or inputs whose width does not match a model.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An operation was called in the wrong state (e.g. backward without forward).
class StateError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or preconditions on arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Bad input data: malformed files, misaligned rows, unusable values.
class DataError : public Error {
 public:
  using Error::Error;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class AlignmentError : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateVectorError : public DataError {
 public:
  using DataError::DataError;
};

// Non-finite values showed up in losses, gradients or parameters.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace latentdiar

#endif  // LATENTDIAR_ERRORS_H_
