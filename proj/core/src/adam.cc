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

#include "ptal/adam.h"

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "ptal/error.h"

namespace ptal::nn {

Adam::Adam(AdamConfig config, std::size_t num_params)
    : config_(config), m_(num_params, 0.0), v_(num_params, 0.0) {
  if (!(config_.lr > 0.0) || !(config_.eps > 0.0) || config_.beta1 < 0.0 ||
      config_.beta1 >= 1.0 || config_.beta2 < 0.0 || config_.beta2 >= 1.0) {
    throw ConfigError("invalid Adam hyper-parameters");
  }
}

void Adam::Step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw DimensionError("Adam expects " + std::to_string(m_.size()) +
                         " parameters, got " + std::to_string(params.size()) +
                         " params and " + std::to_string(grads.size()) +
                         " grads");
  }
  Eigen::Map<const Eigen::ArrayXd> g(grads.data(),
                                     static_cast<Eigen::Index>(grads.size()));
  // g - g is NaN exactly where g is NaN or infinite.
  if (std::isnan((g - g).sum())) {
    Eigen::Index bad = 0;
    while (std::isfinite(g[bad])) ++bad;
    throw NumericError("non-finite gradient at index " + std::to_string(bad));
  }
  ++step_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  // A plain loop: Eigen would peel unaligned heads into scalar code while
  // fusing multiply-adds in the vector body, so the rounding of an element
  // would depend on the buffer's address.
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grads[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grads[i] * grads[i];
    params[i] -= config_.lr * (m_[i] / correction1) /
                 (std::sqrt(v_[i] / correction2) + config_.eps);
  }
}

}  // namespace ptal::nn
