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

#include "ptal/loss.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "ptal/error.h"

namespace ptal::nn {
namespace {

void CheckLengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw DimensionError("prediction length " + std::to_string(a) +
                         " != target length " + std::to_string(b));
  }
}

}  // namespace

double ClampProb(double p) { return std::clamp(p, kProbEps, 1.0 - kProbEps); }

double BinaryCrossEntropy(double pred, double target) {
  const double p = ClampProb(pred);
  return -(target * std::log(p) + (1.0 - target) * std::log(1.0 - p));
}

// Past the clamp the true derivative is zero, which would stall training on
// saturated mistakes; the clamped-point derivative keeps a usable signal.
double BinaryCrossEntropyGrad(double pred, double target) {
  const double p = ClampProb(pred);
  return -target / p + (1.0 - target) / (1.0 - p);
}

double CrossEntropy(std::span<const double> pred,
                    std::span<const double> target) {
  CheckLengths(pred.size(), target.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (target[i] != 0.0) loss -= target[i] * std::log(ClampProb(pred[i]));
  }
  return loss;
}

void CrossEntropyGrad(std::span<const double> pred,
                      std::span<const double> target, std::span<double> grad) {
  CheckLengths(pred.size(), target.size());
  CheckLengths(pred.size(), grad.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    grad[i] = target[i] == 0.0 ? 0.0 : -target[i] / ClampProb(pred[i]);
  }
}

double BinaryCrossEntropySum(std::span<const double> pred,
                             std::span<const double> target) {
  CheckLengths(pred.size(), target.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    loss += BinaryCrossEntropy(pred[i], target[i]);
  }
  return loss;
}

}  // namespace ptal::nn
