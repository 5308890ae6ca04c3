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

// The mapper: an MLP pre-trained to turn a (center, length) proposal into a
// soft T_s-frame temporal mask, standing in for the non-differentiable
// rectangular mask so that classification errors can reach the location
// predictor. After pre-training it is frozen.
//
// Proposal coordinates are normalised to [0, 1] over the short video; frame t
// of a T_s-frame short video sits at t / (T_s - 1).
//
// The network itself does not see (center, length) directly but the fixed
// encoding (kBoundaryScale * (r_a - 0.5), kBoundaryScale * (r_b - 0.5)) of the
// unclipped boundaries r_a = center - length / 2, r_b = center + length / 2.
// All functions below take proposals and apply the encoding internally.

#ifndef PTAL_MAPPER_H_
#define PTAL_MAPPER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ptal/network.h"

namespace ptal::mapper {

inline constexpr double kBoundaryScale = 16.0;

struct Proposal {
  double center = 0.5;
  double length = 1.0;

  // Left / right boundaries center -/+ length / 2, clipped to [0, 1].
  double start() const;
  double end() const;
};

// One encoded row per proposal.
Matrix EncodeProposals(std::span<const Proposal> proposals);

// The analytic rectangular mask: frame t is 1 iff
// start <= t / (T_s - 1) <= end. Throws ConfigError when ts < 2.
std::vector<double> MaskFromProposal(const Proposal& proposal, int ts);

struct MapperPair {
  Proposal input;
  std::vector<double> target;
};

// center ~ U(0, 1), length ~ U(1 / ts, 1), targets from MaskFromProposal.
std::vector<MapperPair> SimulatePairs(std::size_t n, int ts, std::uint64_t seed);

// Positive frames and negative frames each contribute their mean binary
// cross-entropy; an empty set contributes 0.
double MapperLoss(std::span<const double> pred, std::span<const double> target);
double MapperLossWithGrad(std::span<const double> pred,
                          std::span<const double> target,
                          std::span<double> grad);

struct MapperArch {
  int hidden = 128;
  int depth = 2;  // hidden ReLU layers
};

std::vector<nn::LayerSpec> MapperLayers(int ts, const MapperArch& arch);

struct MapperTrainConfig {
  int ts = 64;
  double lr = 1e-5;
  int batch_size = 32;
  int max_epochs = 300;
  std::size_t num_holdout = 2000;
  // Training stops once the held-out frame accuracy reaches stop_accuracy and
  // fails unless it reaches min_accuracy by max_epochs.
  double stop_accuracy = 0.991;
  double min_accuracy = 0.99;
  std::uint64_t seed = 7;
  MapperArch arch;
};

struct MapperReport {
  int epochs = 0;
  double holdout_accuracy = 0.0;
  double final_loss = 0.0;
};

using MapperEpochCallback =
    std::function<void(int epoch, double mean_loss, double holdout_accuracy)>;

// Trains with Adam on minibatches (per-pair normalised loss averaged over the
// batch). Hidden biases start spread over the encoded input range so the ReLU
// kinks initially tile the short video. The returned network is frozen.
// Throws TrainingError when the held-out accuracy stays below min_accuracy or
// the loss diverges.
nn::Network TrainMapper(std::span<const MapperPair> pairs,
                        const MapperTrainConfig& config,
                        MapperReport* report = nullptr,
                        const MapperEpochCallback& on_epoch = {});

// Fraction of frames where (output > 0.5) equals the binary target.
double MaskAccuracy(const nn::Network& mapper, std::span<const MapperPair> pairs);

// Soft mask for one proposal. Throws DimensionError when the network does not
// map 2 inputs to ts outputs.
std::vector<double> MapperForward(const nn::Network& mapper,
                                  const Proposal& proposal, int ts);

struct ProposalGrad {
  double d_center = 0.0;
  double d_length = 0.0;
};

// Gradient, w.r.t. (center, length), of sum_t upstream[t] * mask[t].
ProposalGrad MapperInputGrad(const nn::Network& mapper, const Proposal& proposal,
                             std::span<const double> upstream);

}  // namespace ptal::mapper

#endif  // PTAL_MAPPER_H_
