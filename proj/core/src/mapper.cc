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

#include "ptal/mapper.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "ptal/adam.h"
#include "ptal/error.h"
#include "ptal/loss.h"

namespace ptal::mapper {
namespace {

void CheckMapper(const nn::Network& mapper, int ts) {
  if (mapper.empty() || mapper.input_dim() != 2 || mapper.output_dim() != ts) {
    throw DimensionError("mapper maps " + std::to_string(mapper.input_dim()) +
                         " -> " + std::to_string(mapper.output_dim()) +
                         " but a 2 -> " + std::to_string(ts) +
                         " mapper is required");
  }
}

// Spreads the hidden-layer biases; the first layer's over the encoded
// boundary range.
void SpreadHiddenBiases(std::uint64_t seed, nn::Network* net) {
  std::mt19937_64 rng(seed ^ 0x62696173ULL);
  const auto& layers = net->layers();
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const double half = l == 0 ? 0.5 * kBoundaryScale : 0.5;
    std::uniform_real_distribution<double> dist(-half, half);
    double* bias =
        net->mutable_params().data() + net->ParamOffset(l) + layers[l].WeightCount();
    for (int i = 0; i < layers[l].out_dim; ++i) bias[i] = dist(rng);
  }
}

}  // namespace

double Proposal::start() const {
  return std::clamp(center - 0.5 * length, 0.0, 1.0);
}

double Proposal::end() const {
  return std::clamp(center + 0.5 * length, 0.0, 1.0);
}

Matrix EncodeProposals(std::span<const Proposal> proposals) {
  Matrix encoded(static_cast<Eigen::Index>(proposals.size()), 2);
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const Proposal& p = proposals[i];
    encoded(i, 0) = kBoundaryScale * (p.center - 0.5 * p.length - 0.5);
    encoded(i, 1) = kBoundaryScale * (p.center + 0.5 * p.length - 0.5);
  }
  return encoded;
}

std::vector<double> MaskFromProposal(const Proposal& proposal, int ts) {
  if (ts < 2) throw ConfigError("T_s must be >= 2");
  const double lo = proposal.center - 0.5 * proposal.length;
  const double hi = proposal.center + 0.5 * proposal.length;
  std::vector<double> mask(ts, 0.0);
  for (int t = 0; t < ts; ++t) {
    const double x = static_cast<double>(t) / static_cast<double>(ts - 1);
    if (lo <= x && x <= hi) mask[t] = 1.0;
  }
  return mask;
}

std::vector<MapperPair> SimulatePairs(std::size_t n, int ts,
                                      std::uint64_t seed) {
  if (ts < 2) throw ConfigError("T_s must be >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> center(0.0, 1.0);
  std::uniform_real_distribution<double> length(1.0 / ts, 1.0);
  std::vector<MapperPair> pairs(n);
  for (MapperPair& pair : pairs) {
    pair.input.center = center(rng);
    pair.input.length = length(rng);
    pair.target = MaskFromProposal(pair.input, ts);
  }
  return pairs;
}

double MapperLoss(std::span<const double> pred, std::span<const double> target) {
  std::vector<double> unused(pred.size());
  return MapperLossWithGrad(pred, target, unused);
}

double MapperLossWithGrad(std::span<const double> pred,
                          std::span<const double> target,
                          std::span<double> grad) {
  if (pred.size() != target.size() || grad.size() != pred.size()) {
    throw DimensionError("mapper loss: mismatched lengths");
  }
  std::size_t num_pos = 0;
  for (double t : target) num_pos += t > 0.5 ? 1 : 0;
  const std::size_t num_neg = target.size() - num_pos;
  const double w_pos = num_pos > 0 ? 1.0 / static_cast<double>(num_pos) : 0.0;
  const double w_neg = num_neg > 0 ? 1.0 / static_cast<double>(num_neg) : 0.0;
  double pos_sum = 0.0;
  double neg_sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (target[i] > 0.5) {
      pos_sum += nn::BinaryCrossEntropy(pred[i], 1.0);
      grad[i] = w_pos * nn::BinaryCrossEntropyGrad(pred[i], 1.0);
    } else {
      neg_sum += nn::BinaryCrossEntropy(pred[i], 0.0);
      grad[i] = w_neg * nn::BinaryCrossEntropyGrad(pred[i], 0.0);
    }
  }
  return w_pos * pos_sum + w_neg * neg_sum;
}

std::vector<nn::LayerSpec> MapperLayers(int ts, const MapperArch& arch) {
  std::vector<nn::LayerSpec> layers;
  int width = 2;
  for (int i = 0; i < arch.depth; ++i) {
    layers.push_back(
        nn::LayerSpec::Dense(width, arch.hidden, nn::Activation::kRelu));
    width = arch.hidden;
  }
  layers.push_back(nn::LayerSpec::Dense(width, ts, nn::Activation::kSigmoid));
  return layers;
}

nn::Network TrainMapper(std::span<const MapperPair> pairs,
                        const MapperTrainConfig& config, MapperReport* report,
                        const MapperEpochCallback& on_epoch) {
  if (pairs.empty()) throw ConfigError("mapper training needs at least one pair");
  if (config.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  const int ts = config.ts;
  for (const MapperPair& pair : pairs) {
    if (static_cast<int>(pair.target.size()) != ts) {
      throw DimensionError("mapper pair target length differs from T_s");
    }
  }
  nn::Network net(MapperLayers(ts, config.arch), config.seed);
  SpreadHiddenBiases(config.seed, &net);
  const std::vector<MapperPair> holdout = SimulatePairs(
      config.num_holdout, ts, config.seed ^ 0x686f6c646f7574ULL);

  nn::Adam adam({.lr = config.lr}, net.num_params());
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed ^ 0x6d6170706572ULL);
  std::vector<double> grads(net.num_params());
  nn::ForwardTrace trace;
  std::vector<Proposal> batch;

  MapperReport local;
  local.holdout_accuracy = holdout.empty() ? 0.0 : MaskAccuracy(net, holdout);
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t begin = 0; begin < order.size();
         begin += config.batch_size) {
      const std::size_t count =
          std::min<std::size_t>(config.batch_size, order.size() - begin);
      batch.clear();
      for (std::size_t b = 0; b < count; ++b) {
        batch.push_back(pairs[order[begin + b]].input);
      }
      const Matrix out = net.Forward(EncodeProposals(batch), &trace);
      Matrix upstream(count, ts);
      const double scale = 1.0 / static_cast<double>(count);
      for (std::size_t b = 0; b < count; ++b) {
        const auto& target = pairs[order[begin + b]].target;
        std::span<const double> pred(out.data() + b * ts, ts);
        std::span<double> g(upstream.data() + b * ts, ts);
        total += MapperLossWithGrad(pred, target, g);
        for (double& v : g) v *= scale;
      }
      std::fill(grads.begin(), grads.end(), 0.0);
      net.BackwardAccumulate(trace, upstream, grads, nullptr);
      adam.Step(net.mutable_params(), grads);
    }
    local.epochs = epoch + 1;
    local.final_loss = total / static_cast<double>(pairs.size());
    if (!std::isfinite(local.final_loss)) {
      throw TrainingError("mapper training diverged in epoch " +
                          std::to_string(epoch + 1));
    }
    local.holdout_accuracy = holdout.empty() ? 1.0 : MaskAccuracy(net, holdout);
    if (on_epoch) on_epoch(local.epochs, local.final_loss, local.holdout_accuracy);
    if (local.holdout_accuracy >= config.stop_accuracy) break;
  }
  if (report != nullptr) *report = local;
  if (local.holdout_accuracy < config.min_accuracy) {
    std::ostringstream msg;
    msg << "mapper reached held-out frame accuracy " << local.holdout_accuracy
        << " < " << config.min_accuracy << " after " << local.epochs
        << " epochs (final loss " << local.final_loss << ", " << pairs.size()
        << " pairs, lr " << config.lr << ", batch " << config.batch_size
        << ")";
    throw TrainingError(msg.str());
  }
  net.SetTrainable(false);
  return net;
}

double MaskAccuracy(const nn::Network& mapper,
                    std::span<const MapperPair> pairs) {
  if (pairs.empty()) return 1.0;
  const int ts = mapper.output_dim();
  CheckMapper(mapper, ts);
  constexpr std::size_t kChunk = 1024;
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t begin = 0; begin < pairs.size(); begin += kChunk) {
    const std::size_t count = std::min(kChunk, pairs.size() - begin);
    std::vector<Proposal> batch;
    for (std::size_t b = 0; b < count; ++b) {
      batch.push_back(pairs[begin + b].input);
    }
    const Matrix out = mapper.Forward(EncodeProposals(batch));
    for (std::size_t b = 0; b < count; ++b) {
      const auto& target = pairs[begin + b].target;
      if (static_cast<int>(target.size()) != ts) {
        throw DimensionError("mapper pair target length differs from T_s");
      }
      for (int t = 0; t < ts; ++t) {
        correct += (out(b, t) > 0.5) == (target[t] > 0.5) ? 1 : 0;
      }
      total += ts;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

std::vector<double> MapperForward(const nn::Network& mapper,
                                  const Proposal& proposal, int ts) {
  CheckMapper(mapper, ts);
  const Matrix out = mapper.Forward(EncodeProposals({&proposal, 1}));
  return std::vector<double>(out.data(), out.data() + out.size());
}

ProposalGrad MapperInputGrad(const nn::Network& mapper, const Proposal& proposal,
                             std::span<const double> upstream) {
  CheckMapper(mapper, static_cast<int>(upstream.size()));
  Matrix up(1, upstream.size());
  std::copy(upstream.begin(), upstream.end(), up.data());
  const nn::Gradients grads =
      mapper.Backward(EncodeProposals({&proposal, 1}), up);
  // Chain through u = s (c - l / 2 - 1 / 2), v = s (c + l / 2 - 1 / 2).
  const double du = grads.input(0, 0);
  const double dv = grads.input(0, 1);
  return {kBoundaryScale * (du + dv), 0.5 * kBoundaryScale * (dv - du)};
}

}  // namespace ptal::mapper
