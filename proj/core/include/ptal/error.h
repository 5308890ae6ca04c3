// Copyright 2026 The PTAL Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PTAL_ERROR_H_
#define PTAL_ERROR_H_

#include <stdexcept>
#include <string>

namespace ptal {

// Base class for every error raised by the library. The command-line tool
// maps all of these onto the "data/model error" exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor or model shapes that do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid or infeasible configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf in gradients or parameters.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Missing or malformed point/category annotations.
class AnnotationError : public Error {
 public:
  using Error::Error;
};

// Training diverged or failed to reach its acceptance target.
class TrainingError : public Error {
 public:
  using Error::Error;
};

// Malformed checkpoint, manifest or prediction files, or I/O failures.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace ptal

#endif  // PTAL_ERROR_H_
