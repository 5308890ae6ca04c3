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

// A small feed-forward network engine with exact analytic gradients.
//
// A network maps a (rows x in_dim) matrix to a (rows' x out_dim) matrix.
// Dense layers act on every row independently, so rows can be either batch
// items or frames of a sequence. Conv1d layers treat rows as time and use
// zero padding, preserving the sequence length. A mean-pool layer collapses
// the time axis to a single row.
//
// All parameters live in one flat vector; layer l owns the slice starting at
// ParamOffset(l), weights first (row-major, in x out for dense, and
// (kernel * in) x out for conv1d with tap-major rows), then the bias.

#ifndef PTAL_NETWORK_H_
#define PTAL_NETWORK_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ptal/tensor.h"

namespace ptal::nn {

enum class LayerKind : std::uint8_t {
  kDense = 0,
  kConv1d = 1,
  kMeanPool = 2,
};

enum class Activation : std::uint8_t {
  kNone = 0,
  kRelu = 1,
  kSigmoid = 2,
  kSoftmax = 3,
};

std::string ToString(LayerKind kind);
std::string ToString(Activation activation);

struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  int in_dim = 1;
  int out_dim = 1;
  int kernel = 1;  // conv1d only; odd
  Activation activation = Activation::kNone;
  bool trainable = true;

  static LayerSpec Dense(int in_dim, int out_dim, Activation activation);
  static LayerSpec Conv1d(int in_dim, int out_dim, int kernel,
                          Activation activation);
  static LayerSpec MeanPool(int dim);

  std::size_t WeightCount() const;
  std::size_t BiasCount() const;
  std::size_t ParamCount() const { return WeightCount() + BiasCount(); }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Per-layer inputs and post-activation outputs recorded by Forward, consumed
// by Backward.
struct ForwardTrace {
  std::vector<Matrix> inputs;
  std::vector<Matrix> outputs;
};

struct Gradients {
  std::vector<double> params;
  Matrix input;
};

class Network {
 public:
  Network() = default;

  // Validates the layer stack and draws Glorot-uniform weights from `seed`.
  // Biases start at zero. Throws ConfigError on an invalid stack.
  Network(std::vector<LayerSpec> layers, std::uint64_t seed);

  // Rebuilds a network from stored parameters (checkpoint loading).
  static Network FromParams(std::vector<LayerSpec> layers,
                            std::vector<double> params,
                            std::uint64_t seed = 0);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  std::span<const double> params() const { return params_; }
  std::span<double> mutable_params() { return params_; }
  std::size_t num_params() const { return params_.size(); }
  std::uint64_t seed() const { return seed_; }
  bool empty() const { return layers_.empty(); }

  int input_dim() const;
  int output_dim() const;
  std::size_t ParamOffset(std::size_t layer) const;

  // Marks every layer (non-)trainable. Frozen layers report zero parameter
  // gradients but still propagate input gradients.
  void SetTrainable(bool trainable);
  void SetLayerTrainable(std::size_t layer, bool trainable);
  bool frozen() const;

  Matrix Forward(const Matrix& input) const;
  Matrix Forward(const Matrix& input, ForwardTrace* trace) const;

  // Gradient of the scalar loss whose derivative w.r.t. the network output is
  // `upstream`.
  Gradients Backward(const ForwardTrace& trace, const Matrix& upstream) const;
  Gradients Backward(const Matrix& input, const Matrix& upstream) const;

  // Adds parameter gradients into `param_grads` (size num_params()) and, when
  // `input_grad` is non-null, stores the input gradient there.
  void BackwardAccumulate(const ForwardTrace& trace, const Matrix& upstream,
                          std::span<double> param_grads,
                          Matrix* input_grad) const;

 private:
  void Validate() const;
  void CheckInput(const Matrix& input) const;

  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> offsets_;
  ParamVector params_;
  std::uint64_t seed_ = 0;
};

}  // namespace ptal::nn

#endif  // PTAL_NETWORK_H_
