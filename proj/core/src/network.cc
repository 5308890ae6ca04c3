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

#include "ptal/network.h"

#include <cmath>
#include <random>
#include <utility>

#include "ptal/error.h"

namespace ptal::nn {
namespace {

using ConstMatrixMap = Eigen::Map<const Matrix>;
using ConstRowMap = Eigen::Map<const RowVector>;
using MatrixMap = Eigen::Map<Matrix>;
using RowMap = Eigen::Map<RowVector>;

// Rows of the result hold the zero-padded receptive field of each frame,
// tap-major: column j * in + i is channel i at offset j - kernel / 2.
Matrix Im2Col(const Matrix& x, int kernel) {
  const Eigen::Index frames = x.rows();
  const Eigen::Index in = x.cols();
  const int half = kernel / 2;
  Matrix cols = Matrix::Zero(frames, in * kernel);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int j = 0; j < kernel; ++j) {
      const Eigen::Index src = t + j - half;
      if (src < 0 || src >= frames) continue;
      cols.block(t, j * in, 1, in) = x.row(src);
    }
  }
  return cols;
}

void Col2ImAdd(const Matrix& cols, int kernel, Eigen::Index in, Matrix* x) {
  const Eigen::Index frames = x->rows();
  const int half = kernel / 2;
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int j = 0; j < kernel; ++j) {
      const Eigen::Index src = t + j - half;
      if (src < 0 || src >= frames) continue;
      x->row(src) += cols.block(t, j * in, 1, in);
    }
  }
}

void ApplyActivation(Activation activation, Matrix* z) {
  switch (activation) {
    case Activation::kNone:
      return;
    case Activation::kRelu:
      *z = z->cwiseMax(0.0);
      return;
    case Activation::kSigmoid:
      *z = z->unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
      return;
    case Activation::kSoftmax:
      for (Eigen::Index r = 0; r < z->rows(); ++r) {
        auto row = z->row(r);
        const double peak = row.maxCoeff();
        row = (row.array() - peak).exp();
        row /= row.sum();
      }
      return;
  }
}

// Turns d(loss)/d(output) into d(loss)/d(pre-activation).
Matrix ActivationBackward(Activation activation, const Matrix& output,
                          const Matrix& upstream) {
  switch (activation) {
    case Activation::kNone:
      return upstream;
    case Activation::kRelu:
      return (output.array() > 0.0).select(upstream, 0.0);
    case Activation::kSigmoid:
      return upstream.array() * output.array() * (1.0 - output.array());
    case Activation::kSoftmax: {
      Matrix grad(output.rows(), output.cols());
      for (Eigen::Index r = 0; r < output.rows(); ++r) {
        const double dot = upstream.row(r).dot(output.row(r));
        grad.row(r) =
            output.row(r).array() * (upstream.row(r).array() - dot);
      }
      return grad;
    }
  }
  return upstream;
}

}  // namespace

std::string ToString(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense:
      return "dense";
    case LayerKind::kConv1d:
      return "conv1d";
    case LayerKind::kMeanPool:
      return "mean_pool";
  }
  return "unknown";
}

std::string ToString(Activation activation) {
  switch (activation) {
    case Activation::kNone:
      return "none";
    case Activation::kRelu:
      return "relu";
    case Activation::kSigmoid:
      return "sigmoid";
    case Activation::kSoftmax:
      return "softmax";
  }
  return "unknown";
}

LayerSpec LayerSpec::Dense(int in_dim, int out_dim, Activation activation) {
  return {LayerKind::kDense, in_dim, out_dim, 1, activation, true};
}

LayerSpec LayerSpec::Conv1d(int in_dim, int out_dim, int kernel,
                            Activation activation) {
  return {LayerKind::kConv1d, in_dim, out_dim, kernel, activation, true};
}

LayerSpec LayerSpec::MeanPool(int dim) {
  return {LayerKind::kMeanPool, dim, dim, 1, Activation::kNone, true};
}

std::size_t LayerSpec::WeightCount() const {
  switch (kind) {
    case LayerKind::kDense:
      return static_cast<std::size_t>(in_dim) * out_dim;
    case LayerKind::kConv1d:
      return static_cast<std::size_t>(kernel) * in_dim * out_dim;
    case LayerKind::kMeanPool:
      return 0;
  }
  return 0;
}

std::size_t LayerSpec::BiasCount() const {
  return kind == LayerKind::kMeanPool ? 0 : static_cast<std::size_t>(out_dim);
}

Network::Network(std::vector<LayerSpec> layers, std::uint64_t seed)
    : layers_(std::move(layers)), seed_(seed) {
  Validate();
  std::size_t total = 0;
  for (const LayerSpec& layer : layers_) {
    offsets_.push_back(total);
    total += layer.ParamCount();
  }
  params_.assign(total, 0.0);

  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerSpec& layer = layers_[l];
    if (layer.WeightCount() == 0) continue;
    const double fan_in = static_cast<double>(layer.kernel) * layer.in_dim;
    const double fan_out = static_cast<double>(layer.kernel) * layer.out_dim;
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    double* w = params_.data() + offsets_[l];
    for (std::size_t i = 0; i < layer.WeightCount(); ++i) w[i] = dist(rng);
  }
}

Network Network::FromParams(std::vector<LayerSpec> layers,
                            std::vector<double> params, std::uint64_t seed) {
  Network net;
  net.layers_ = std::move(layers);
  net.seed_ = seed;
  net.Validate();
  std::size_t total = 0;
  for (const LayerSpec& layer : net.layers_) {
    net.offsets_.push_back(total);
    total += layer.ParamCount();
  }
  if (params.size() != total) {
    throw DimensionError("parameter count " + std::to_string(params.size()) +
                         " does not match layer specs (" +
                         std::to_string(total) + ")");
  }
  net.params_.assign(params.begin(), params.end());
  return net;
}

void Network::Validate() const {
  if (layers_.empty()) throw ConfigError("network needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerSpec& layer = layers_[l];
    const std::string where = "layer " + std::to_string(l) + ": ";
    if (layer.in_dim < 1 || layer.out_dim < 1) {
      throw ConfigError(where + "dimensions must be >= 1");
    }
    if (layer.kernel < 1 || layer.kernel % 2 == 0) {
      throw ConfigError(where + "kernel must be odd and >= 1");
    }
    if (layer.kind == LayerKind::kMeanPool &&
        (layer.in_dim != layer.out_dim ||
         layer.activation != Activation::kNone)) {
      throw ConfigError(where + "mean_pool keeps its width and has no activation");
    }
    if (layer.activation == Activation::kSoftmax && l + 1 != layers_.size()) {
      throw ConfigError(where + "softmax is only allowed on the final layer");
    }
    if (l > 0 && layers_[l - 1].out_dim != layer.in_dim) {
      throw ConfigError(where + "input width " + std::to_string(layer.in_dim) +
                        " does not match previous output " +
                        std::to_string(layers_[l - 1].out_dim));
    }
  }
}

int Network::input_dim() const {
  return layers_.empty() ? 0 : layers_.front().in_dim;
}

int Network::output_dim() const {
  return layers_.empty() ? 0 : layers_.back().out_dim;
}

std::size_t Network::ParamOffset(std::size_t layer) const {
  return offsets_.at(layer);
}

void Network::SetTrainable(bool trainable) {
  for (LayerSpec& layer : layers_) layer.trainable = trainable;
}

void Network::SetLayerTrainable(std::size_t layer, bool trainable) {
  layers_.at(layer).trainable = trainable;
}

bool Network::frozen() const {
  for (const LayerSpec& layer : layers_) {
    if (layer.trainable) return false;
  }
  return true;
}

void Network::CheckInput(const Matrix& input) const {
  if (layers_.empty()) throw DimensionError("forward on an empty network");
  if (input.cols() != input_dim()) {
    throw DimensionError("input has " + std::to_string(input.cols()) +
                         " columns, network expects " +
                         std::to_string(input_dim()));
  }
  if (input.rows() < 1) throw DimensionError("input has no rows");
}

Matrix Network::Forward(const Matrix& input) const {
  return Forward(input, nullptr);
}

Matrix Network::Forward(const Matrix& input, ForwardTrace* trace) const {
  CheckInput(input);
  if (trace != nullptr) {
    trace->inputs.clear();
    trace->outputs.clear();
  }
  Matrix x = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerSpec& layer = layers_[l];
    const double* base = params_.data() + offsets_[l];
    Matrix z;
    switch (layer.kind) {
      case LayerKind::kDense: {
        ConstMatrixMap w(base, layer.in_dim, layer.out_dim);
        ConstRowMap b(base + layer.WeightCount(), layer.out_dim);
        z.noalias() = x * w;
        z.rowwise() += b;
        break;
      }
      case LayerKind::kConv1d: {
        ConstMatrixMap w(base, static_cast<Eigen::Index>(layer.kernel) *
                                   layer.in_dim,
                         layer.out_dim);
        ConstRowMap b(base + layer.WeightCount(), layer.out_dim);
        if (layer.kernel == 1) {
          z.noalias() = x * w;
        } else {
          z.noalias() = Im2Col(x, layer.kernel) * w;
        }
        z.rowwise() += b;
        break;
      }
      case LayerKind::kMeanPool:
        z = x.colwise().mean();
        break;
    }
    ApplyActivation(layer.activation, &z);
    if (trace != nullptr) {
      trace->inputs.push_back(std::move(x));
      trace->outputs.push_back(z);
    }
    x = std::move(z);
  }
  return x;
}

Gradients Network::Backward(const ForwardTrace& trace,
                            const Matrix& upstream) const {
  Gradients grads;
  grads.params.assign(params_.size(), 0.0);
  BackwardAccumulate(trace, upstream, grads.params, &grads.input);
  return grads;
}

Gradients Network::Backward(const Matrix& input, const Matrix& upstream) const {
  ForwardTrace trace;
  Forward(input, &trace);
  return Backward(trace, upstream);
}

void Network::BackwardAccumulate(const ForwardTrace& trace,
                                 const Matrix& upstream,
                                 std::span<double> param_grads,
                                 Matrix* input_grad) const {
  if (trace.outputs.size() != layers_.size()) {
    throw DimensionError("trace does not belong to this network");
  }
  if (param_grads.size() != params_.size()) {
    throw DimensionError("gradient buffer has wrong length");
  }
  const Matrix& out = trace.outputs.back();
  if (upstream.rows() != out.rows() || upstream.cols() != out.cols()) {
    throw DimensionError("upstream gradient is " +
                         std::to_string(upstream.rows()) + "x" +
                         std::to_string(upstream.cols()) + ", output is " +
                         std::to_string(out.rows()) + "x" +
                         std::to_string(out.cols()));
  }

  Matrix grad = upstream;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const LayerSpec& layer = layers_[l];
    const Matrix& x = trace.inputs[l];
    const bool need_input_grad = l > 0 || input_grad != nullptr;
    Matrix dz = ActivationBackward(layer.activation, trace.outputs[l], grad);
    const double* base = params_.data() + offsets_[l];
    double* gbase = param_grads.data() + offsets_[l];

    switch (layer.kind) {
      case LayerKind::kDense: {
        if (layer.trainable) {
          MatrixMap dw(gbase, layer.in_dim, layer.out_dim);
          RowMap db(gbase + layer.WeightCount(), layer.out_dim);
          // Evaluated into an owned temporary first: accumulating a product
          // straight into a caller buffer rounds differently depending on
          // the buffer's alignment.
          dw += Matrix(x.transpose() * dz);
          db += RowVector(dz.colwise().sum());
        }
        if (need_input_grad) {
          ConstMatrixMap w(base, layer.in_dim, layer.out_dim);
          grad.noalias() = dz * w.transpose();
        }
        break;
      }
      case LayerKind::kConv1d: {
        const Eigen::Index rows =
            static_cast<Eigen::Index>(layer.kernel) * layer.in_dim;
        const Matrix cols = layer.kernel == 1 ? x : Im2Col(x, layer.kernel);
        if (layer.trainable) {
          MatrixMap dw(gbase, rows, layer.out_dim);
          RowMap db(gbase + layer.WeightCount(), layer.out_dim);
          dw += Matrix(cols.transpose() * dz);
          db += RowVector(dz.colwise().sum());
        }
        if (need_input_grad) {
          ConstMatrixMap w(base, rows, layer.out_dim);
          Matrix dcols = dz * w.transpose();
          if (layer.kernel == 1) {
            grad = std::move(dcols);
          } else {
            grad = Matrix::Zero(x.rows(), x.cols());
            Col2ImAdd(dcols, layer.kernel, layer.in_dim, &grad);
          }
        }
        break;
      }
      case LayerKind::kMeanPool: {
        const double scale = 1.0 / static_cast<double>(x.rows());
        grad = Matrix(x.rows(), x.cols());
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
          grad.row(r) = dz.row(0) * scale;
        }
        break;
      }
    }
  }
  if (input_grad != nullptr) *input_grad = std::move(grad);
}

}  // namespace ptal::nn
