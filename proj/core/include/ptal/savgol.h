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

// Savitzky-Golay smoothing along the time axis.

#ifndef PTAL_SAVGOL_H_
#define PTAL_SAVGOL_H_

#include <vector>

#include "ptal/tensor.h"

namespace ptal {

struct SavGolConfig {
  int window = 5;
  int order = 2;

  // window odd and >= 1, 0 <= order < window; throws ConfigError otherwise.
  void Validate() const;
};

// Convolution weights that evaluate, at the window centre, the least-squares
// polynomial of degree `order` fitted to `window` samples. Index 0 is the
// leftmost tap.
std::vector<double> SavGolCoefficients(const SavGolConfig& config);

// Smooths every column of `signal` (rows are time) with mirror padding at both
// ends (x[-k] = x[k], x[T-1+k] = x[T-1-k]), then clamps to [0, 1]. When the
// window is longer than the signal the input is returned unchanged.
Matrix SmoothHeatmap(const Matrix& signal, const SavGolConfig& config);

}  // namespace ptal

#endif  // PTAL_SAVGOL_H_
