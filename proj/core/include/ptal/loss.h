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

#ifndef PTAL_LOSS_H_
#define PTAL_LOSS_H_

#include <span>

namespace ptal::nn {

// Probabilities are clamped to [kProbEps, 1 - kProbEps] inside every log.
inline constexpr double kProbEps = 1e-7;

double ClampProb(double p);

// -[t log p + (1 - t) log(1 - p)].
double BinaryCrossEntropy(double pred, double target);

// d/dp of BinaryCrossEntropy, evaluated at the clamped probability.
double BinaryCrossEntropyGrad(double pred, double target);

// -sum_i target_i log pred_i. Throws DimensionError on length mismatch.
double CrossEntropy(std::span<const double> pred,
                    std::span<const double> target);

// d/dpred_i of CrossEntropy, written into `grad` (same length as pred).
void CrossEntropyGrad(std::span<const double> pred,
                      std::span<const double> target, std::span<double> grad);

// Element-wise binary cross-entropy summed over the vectors.
double BinaryCrossEntropySum(std::span<const double> pred,
                             std::span<const double> target);

}  // namespace ptal::nn

#endif  // PTAL_LOSS_H_
