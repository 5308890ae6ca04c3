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

#include "ptal/localizer.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>

#include "ptal/adam.h"
#include "ptal/error.h"
#include "ptal/loss.h"

namespace ptal::localizer {
namespace {

// Below this total weight a pooled feature is treated as empty.
constexpr double kMinPoolWeight = 1e-12;

void CheckMask(const Matrix& features, std::span<const double> mask) {
  if (static_cast<Eigen::Index>(mask.size()) != features.rows()) {
    throw DimensionError("mask has " + std::to_string(mask.size()) +
                         " frames but the features have " +
                         std::to_string(features.rows()));
  }
}

RowVector WeightedPool(const Matrix& features, const Vector& weights,
                       PoolDivisor divisor) {
  const double denom = divisor == PoolDivisor::kFrames
                           ? static_cast<double>(features.rows())
                           : weights.sum();
  if (divisor == PoolDivisor::kMaskSum && denom < kMinPoolWeight) {
    return RowVector::Zero(features.cols());
  }
  return (weights.transpose() * features) / denom;
}

void CheckShortVideo(const LocalizerModel& model, const Matrix& features) {
  if (features.rows() != model.ts || features.cols() != model.feature_dim()) {
    throw DimensionError("short video is " + std::to_string(features.rows()) +
                         "x" + std::to_string(features.cols()) +
                         " but the localizer expects " +
                         std::to_string(model.ts) + "x" +
                         std::to_string(model.feature_dim()));
  }
}

}  // namespace

std::string ToString(PoolDivisor divisor) {
  return divisor == PoolDivisor::kFrames ? "frames" : "mask_sum";
}

PoolDivisor ParsePoolDivisor(const std::string& name) {
  if (name == "frames") return PoolDivisor::kFrames;
  if (name == "mask_sum") return PoolDivisor::kMaskSum;
  throw ConfigError("unknown pooling divisor '" + name +
                    "' (expected frames or mask_sum)");
}

std::vector<nn::LayerSpec> PredictorLayers(int feature_dim,
                                           const PredictorArch& arch) {
  return {
      nn::LayerSpec::Conv1d(feature_dim, arch.hidden, arch.kernel,
                            nn::Activation::kRelu),
      nn::LayerSpec::MeanPool(arch.hidden),
      nn::LayerSpec::Dense(arch.hidden, arch.hidden, nn::Activation::kRelu),
      nn::LayerSpec::Dense(arch.hidden, 2, nn::Activation::kNone),
  };
}

std::vector<nn::LayerSpec> ClassifierLayers(int feature_dim, int num_classes,
                                            const ClassifierArch& arch) {
  return {
      nn::LayerSpec::Dense(feature_dim, arch.hidden, nn::Activation::kRelu),
      nn::LayerSpec::Dense(arch.hidden, num_classes + 1,
                           nn::Activation::kSoftmax),
  };
}

mapper::Proposal ProposalFromRaw(double keypoint_pos, double raw_offset,
                                 double raw_length, bool use_center_offset) {
  const double offset = use_center_offset ? 0.5 * std::tanh(raw_offset) : 0.0;
  mapper::Proposal p;
  p.center = std::clamp(keypoint_pos + offset, 0.0, 1.0);
  p.length = 1.0 / (1.0 + std::exp(-raw_length));
  return p;
}

mapper::Proposal PredictProposal(const LocalizerModel& model,
                                 const keypoint::ShortVideo& sv) {
  CheckShortVideo(model, sv.features);
  const Matrix raw = model.predictor.Forward(sv.features);
  return ProposalFromRaw(sv.keypoint_pos, raw(0, 0), raw(0, 1),
                         model.use_center_offset);
}

RowVector PoolForeground(const Matrix& features, std::span<const double> mask,
                         PoolDivisor divisor) {
  CheckMask(features, mask);
  const Vector m = Eigen::Map<const Vector>(mask.data(), mask.size());
  return WeightedPool(features, m, divisor);
}

RowVector PoolBackground(const Matrix& features, std::span<const double> mask,
                         PoolDivisor divisor) {
  CheckMask(features, mask);
  const Vector m = Eigen::Map<const Vector>(mask.data(), mask.size());
  return WeightedPool(features, (1.0 - m.array()).matrix(), divisor);
}

double BetaPreset(const std::string& name) {
  if (name == "thumos" || name == "beoid") return 1.25;
  if (name == "gtea") return 2.0;
  throw ConfigError("unknown beta preset '" + name +
                    "' (expected thumos, beoid or gtea)");
}

double ClassificationLoss(std::span<const double> fg_pred,
                          std::span<const double> bg_pred, int target_class,
                          double beta) {
  if (fg_pred.size() != bg_pred.size() || fg_pred.size() < 2) {
    throw DimensionError("classification loss needs two (C+1)-vectors");
  }
  const int background = static_cast<int>(fg_pred.size()) - 1;
  if (target_class < 0 || target_class >= background) {
    throw AnnotationError("class id " + std::to_string(target_class) +
                          " outside [0, " + std::to_string(background) + ")");
  }
  return -std::log(nn::ClampProb(bg_pred[background])) -
         beta * std::log(nn::ClampProb(fg_pred[target_class]));
}

std::vector<TrainingSample> BuildTrainingSamples(
    const data::Video& video, std::span<const keypoint::Keypoint> keypoints,
    int ts, int* skipped) {
  std::vector<keypoint::ShortVideo> shorts =
      keypoint::SegmentVideo(video.features, keypoints, ts, video.id);
  std::vector<TrainingSample> samples;
  int dropped = 0;
  for (keypoint::ShortVideo& sv : shorts) {
    const data::PointLabel* best = nullptr;
    for (const data::PointLabel& point : video.points) {
      if (point.t < sv.orig_start || point.t > sv.orig_end) continue;
      if (best == nullptr || std::abs(point.t - sv.keypoint_frame) <
                                 std::abs(best->t - sv.keypoint_frame)) {
        best = &point;
      }
    }
    if (best == nullptr) {
      ++dropped;
      continue;
    }
    const int label = best->class_id;
    samples.push_back({std::move(sv), label});
  }
  if (skipped != nullptr) *skipped = dropped;
  return samples;
}

SampleGradients ComputeSampleGradients(const LocalizerModel& model,
                                       const TrainingSample& sample,
                                       const LocalizerTrainConfig& config) {
  const Matrix& x = sample.video.features;
  CheckShortVideo(model, x);
  const int ts = model.ts;
  const int classes = model.num_classes;
  if (sample.label < 0 || sample.label >= classes) {
    throw AnnotationError("training label " + std::to_string(sample.label) +
                          " outside [0, " + std::to_string(classes) + ")");
  }

  // Forward.
  nn::ForwardTrace pred_trace;
  const Matrix raw = model.predictor.Forward(x, &pred_trace);
  const mapper::Proposal proposal = ProposalFromRaw(
      sample.video.keypoint_pos, raw(0, 0), raw(0, 1), model.use_center_offset);
  const std::vector<double> mask =
      mapper::MapperForward(model.mapper, proposal, ts);
  const Vector m = Eigen::Map<const Vector>(mask.data(), ts);
  const Vector w = (1.0 - m.array()).matrix();
  Matrix pooled(2, x.cols());
  pooled.row(0) = WeightedPool(x, m, model.divisor);
  pooled.row(1) = WeightedPool(x, w, model.divisor);
  nn::ForwardTrace cls_trace;
  const Matrix probs = model.classifier.Forward(pooled, &cls_trace);

  SampleGradients out;
  const double fg_p = nn::ClampProb(probs(0, sample.label));
  const double bg_p = nn::ClampProb(probs(1, classes));
  out.fg_loss = -std::log(fg_p);
  out.bg_loss = -std::log(bg_p);
  const double bg_weight = config.use_background_loss ? 1.0 : 0.0;
  out.loss = bg_weight * out.bg_loss + config.beta * out.fg_loss;

  // Backward through the classifier (both pooled rows share its weights).
  Matrix up = Matrix::Zero(2, classes + 1);
  up(0, sample.label) = -config.beta / fg_p;
  up(1, classes) = -bg_weight / bg_p;
  out.classifier.assign(model.classifier.num_params(), 0.0);
  Matrix d_pooled;
  model.classifier.BackwardAccumulate(cls_trace, up, out.classifier, &d_pooled);

  // d loss / d m_t.
  std::vector<double> d_mask(ts);
  if (model.divisor == PoolDivisor::kFrames) {
    const Vector proj = x * (d_pooled.row(0) - d_pooled.row(1)).transpose();
    for (int t = 0; t < ts; ++t) d_mask[t] = proj[t] / ts;
  } else {
    const double fg_sum = m.sum();
    const double bg_sum = w.sum();
    for (int t = 0; t < ts; ++t) {
      double g = 0.0;
      if (fg_sum >= kMinPoolWeight) {
        g += d_pooled.row(0).dot(x.row(t) - pooled.row(0)) / fg_sum;
      }
      if (bg_sum >= kMinPoolWeight) {
        g -= d_pooled.row(1).dot(x.row(t) - pooled.row(1)) / bg_sum;
      }
      d_mask[t] = g;
    }
  }

  // Through the frozen mapper to (center, length), then to the raw outputs.
  const mapper::ProposalGrad pg =
      mapper::MapperInputGrad(model.mapper, proposal, d_mask);
  Matrix d_raw = Matrix::Zero(1, 2);
  if (model.use_center_offset) {
    const double th = std::tanh(raw(0, 0));
    const double unclamped = sample.video.keypoint_pos + 0.5 * th;
    if (unclamped > 0.0 && unclamped < 1.0) {
      d_raw(0, 0) = pg.d_center * 0.5 * (1.0 - th * th);
    }
  }
  d_raw(0, 1) = pg.d_length * proposal.length * (1.0 - proposal.length);
  out.predictor.assign(model.predictor.num_params(), 0.0);
  model.predictor.BackwardAccumulate(pred_trace, d_raw, out.predictor, nullptr);
  out.mapper.assign(model.mapper.num_params(), 0.0);
  return out;
}

LocalizerModel TrainLocalizer(std::span<const TrainingSample> samples,
                              const nn::Network& mapper, int feature_dim,
                              int num_classes,
                              const LocalizerTrainConfig& config,
                              const LocalizerEpochCallback& on_epoch) {
  if (!mapper.frozen()) throw ConfigError("the mapper must be frozen");
  if (mapper.input_dim() != 2 || mapper.output_dim() < 2) {
    throw DimensionError("mapper must map 2 inputs to T_s >= 2 outputs");
  }
  if (config.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(config.beta >= 0.0)) throw ConfigError("beta must be >= 0");

  LocalizerModel model;
  model.ts = mapper.output_dim();
  model.num_classes = num_classes;
  model.use_center_offset = config.use_center_offset;
  model.divisor = config.divisor;
  model.mapper = mapper;
  std::seed_seq seq{config.seed, std::uint64_t{0x6c6f63}};
  std::uint64_t seeds[3];
  {
    std::uint32_t raw[6];
    seq.generate(std::begin(raw), std::end(raw));
    for (int i = 0; i < 3; ++i) {
      seeds[i] = (std::uint64_t{raw[2 * i]} << 32) | raw[2 * i + 1];
    }
  }
  model.predictor =
      nn::Network(PredictorLayers(feature_dim, config.predictor), seeds[0]);
  // Zero output layer: every proposal starts at offset 0 and length 0.5.
  {
    const std::size_t last = model.predictor.layers().size() - 1;
    auto params = model.predictor.mutable_params();
    std::fill(params.begin() + model.predictor.ParamOffset(last), params.end(),
              0.0);
  }
  model.classifier = nn::Network(
      ClassifierLayers(feature_dim, num_classes, config.classifier), seeds[1]);
  if (config.epochs <= 0 || samples.empty()) return model;

  nn::Adam pred_adam({.lr = config.lr}, model.predictor.num_params());
  nn::Adam cls_adam({.lr = config.lr}, model.classifier.num_params());
  std::vector<double> pred_grad(model.predictor.num_params());
  std::vector<double> cls_grad(model.classifier.num_params());
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seeds[2]);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    double fg_total = 0.0;
    double bg_total = 0.0;
    for (std::size_t begin = 0; begin < order.size();
         begin += config.batch_size) {
      const std::size_t count =
          std::min<std::size_t>(config.batch_size, order.size() - begin);
      std::fill(pred_grad.begin(), pred_grad.end(), 0.0);
      std::fill(cls_grad.begin(), cls_grad.end(), 0.0);
      for (std::size_t b = 0; b < count; ++b) {
        const SampleGradients g =
            ComputeSampleGradients(model, samples[order[begin + b]], config);
        if (!std::isfinite(g.loss)) {
          throw TrainingError("localizer diverged (loss=" +
                              std::to_string(g.loss) + ") in epoch " +
                              std::to_string(epoch + 1));
        }
        total += g.loss;
        fg_total += g.fg_loss;
        bg_total += g.bg_loss;
        for (std::size_t i = 0; i < pred_grad.size(); ++i) {
          pred_grad[i] += g.predictor[i];
        }
        for (std::size_t i = 0; i < cls_grad.size(); ++i) {
          cls_grad[i] += g.classifier[i];
        }
      }
      const double scale = 1.0 / static_cast<double>(count);
      for (double& v : pred_grad) v *= scale;
      for (double& v : cls_grad) v *= scale;
      pred_adam.Step(model.predictor.mutable_params(), pred_grad);
      cls_adam.Step(model.classifier.mutable_params(), cls_grad);
    }
    if (on_epoch) {
      const double n = static_cast<double>(samples.size());
      on_epoch(epoch + 1, total / n, fg_total / n, bg_total / n);
    }
  }
  return model;
}

}  // namespace ptal::localizer
