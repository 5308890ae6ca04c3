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

#ifndef PTAL_ADAM_H_
#define PTAL_ADAM_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ptal::nn {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Not thread-safe; one instance per parameter
// vector.
class Adam {
 public:
  Adam(AdamConfig config, std::size_t num_params);

  // Applies one update in place. Throws DimensionError on length mismatch and
  // NumericError (leaving params untouched) on a non-finite gradient.
  void Step(std::span<double> params, std::span<const double> grads);

  const AdamConfig& config() const { return config_; }
  std::int64_t step() const { return step_; }
  const std::vector<double>& m() const { return m_; }
  const std::vector<double>& v() const { return v_; }

 private:
  AdamConfig config_;
  std::int64_t step_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace ptal::nn

#endif  // PTAL_ADAM_H_
