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

#ifndef PTAL_TENSOR_H_
#define PTAL_TENSOR_H_

#include <vector>

#include <Eigen/Core>

namespace ptal {

// Row-major dense matrix. Rows are frames (time) or batch items, columns are
// feature channels.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Flat parameter storage. The fixed base alignment keeps Eigen's vectorised
// kernels on the same code path for every allocation, so results do not
// depend on where the heap placed the buffer.
using ParamVector = std::vector<double, Eigen::aligned_allocator<double>>;

}  // namespace ptal

#endif  // PTAL_TENSOR_H_
