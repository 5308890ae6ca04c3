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

#include "ptal/savgol.h"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <string>

#include "ptal/error.h"

namespace ptal {

void SavGolConfig::Validate() const {
  if (window < 1 || window % 2 == 0) {
    throw ConfigError("Savitzky-Golay window must be odd and >= 1, got " +
                      std::to_string(window));
  }
  if (order < 0 || order >= window) {
    throw ConfigError("Savitzky-Golay order must satisfy 0 <= order < window");
  }
}

std::vector<double> SavGolCoefficients(const SavGolConfig& config) {
  config.Validate();
  const int half = config.window / 2;
  Eigen::MatrixXd vandermonde(config.window, config.order + 1);
  for (int i = 0; i < config.window; ++i) {
    double x = 1.0;
    for (int k = 0; k <= config.order; ++k) {
      vandermonde(i, k) = x;
      x *= static_cast<double>(i - half);
    }
  }
  // Row 0 of the pseudo-inverse maps samples to the fitted constant term,
  // i.e. the polynomial's value at the centre.
  const Eigen::MatrixXd pinv = vandermonde.householderQr().solve(
      Eigen::MatrixXd::Identity(config.window, config.window));
  return std::vector<double>(pinv.row(0).begin(), pinv.row(0).end());
}

Matrix SmoothHeatmap(const Matrix& signal, const SavGolConfig& config) {
  config.Validate();
  const Eigen::Index frames = signal.rows();
  if (config.window > frames) return signal;
  const std::vector<double> coeffs = SavGolCoefficients(config);
  const Eigen::Index half = config.window / 2;
  auto mirror = [frames](Eigen::Index i) {
    if (i < 0) return -i;
    if (i >= frames) return 2 * (frames - 1) - i;
    return i;
  };

  Matrix out(frames, signal.cols());
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index c = 0; c < signal.cols(); ++c) {
      // The taps sum to one, so smoothing the deviations from the centre
      // sample reproduces constant stretches bit for bit.
      const double centre = signal(t, c);
      double acc = 0.0;
      for (Eigen::Index j = 0; j < config.window; ++j) {
        acc += coeffs[j] * (signal(mirror(t + j - half), c) - centre);
      }
      out(t, c) = std::clamp(centre + acc, 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace ptal
