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

#include "ptal/keypoint.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ptal/adam.h"
#include "ptal/error.h"
#include "ptal/loss.h"

namespace ptal::keypoint {
namespace {

// Marks the annotated entries; returns the number of distinct positives.
long MarkPositives(const Matrix& heatmap,
                   std::span<const data::PointLabel> labels,
                   Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>* mask) {
  if (labels.empty()) {
    throw AnnotationError("keypoint loss needs at least one point label");
  }
  mask->setConstant(heatmap.rows(), heatmap.cols(), false);
  long positives = 0;
  for (const data::PointLabel& label : labels) {
    if (label.t < 0 || label.t >= heatmap.rows() || label.class_id < 0 ||
        label.class_id >= heatmap.cols()) {
      throw AnnotationError("point label (t=" + std::to_string(label.t) +
                            ", class=" + std::to_string(label.class_id) +
                            ") lies outside the " +
                            std::to_string(heatmap.rows()) + "x" +
                            std::to_string(heatmap.cols()) + " heatmap");
    }
    bool& slot = (*mask)(label.t, label.class_id);
    if (!slot) {
      slot = true;
      ++positives;
    }
  }
  return positives;
}

}  // namespace

std::vector<nn::LayerSpec> DetectorLayers(int feature_dim, int num_classes,
                                          const DetectorConfig& config) {
  if (config.depth < 0) throw ConfigError("detector depth must be >= 0");
  std::vector<nn::LayerSpec> layers;
  int width = feature_dim;
  for (int i = 0; i < config.depth; ++i) {
    layers.push_back(nn::LayerSpec::Conv1d(width, config.hidden, config.kernel,
                                           nn::Activation::kRelu));
    width = config.hidden;
  }
  layers.push_back(nn::LayerSpec::Conv1d(width, num_classes, config.kernel,
                                         nn::Activation::kSigmoid));
  return layers;
}

double KeypointLoss(const Matrix& heatmap,
                    std::span<const data::PointLabel> labels) {
  return KeypointLossWithGrad(heatmap, labels, nullptr);
}

double KeypointLossWithGrad(const Matrix& heatmap,
                            std::span<const data::PointLabel> labels,
                            Matrix* grad) {
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> positive;
  const long num_pos = MarkPositives(heatmap, labels, &positive);
  const long num_neg = static_cast<long>(heatmap.size()) - num_pos;
  const double w_pos = 1.0 / static_cast<double>(num_pos);
  const double w_neg = num_neg > 0 ? 1.0 / static_cast<double>(num_neg) : 0.0;

  if (grad != nullptr) grad->resize(heatmap.rows(), heatmap.cols());
  double pos_sum = 0.0;
  double neg_sum = 0.0;
  for (Eigen::Index t = 0; t < heatmap.rows(); ++t) {
    for (Eigen::Index c = 0; c < heatmap.cols(); ++c) {
      const double p = heatmap(t, c);
      if (positive(t, c)) {
        pos_sum += nn::BinaryCrossEntropy(p, 1.0);
        if (grad != nullptr) {
          (*grad)(t, c) = w_pos * nn::BinaryCrossEntropyGrad(p, 1.0);
        }
      } else {
        neg_sum += nn::BinaryCrossEntropy(p, 0.0);
        if (grad != nullptr) {
          (*grad)(t, c) = w_neg * nn::BinaryCrossEntropyGrad(p, 0.0);
        }
      }
    }
  }
  return w_pos * pos_sum + w_neg * neg_sum;
}

nn::Network TrainKeypointDetector(std::span<const data::Video* const> videos,
                                  int num_classes,
                                  const KeypointTrainConfig& config,
                                  const EpochCallback& on_epoch) {
  if (videos.empty()) throw AnnotationError("no training videos");
  const int feature_dim = static_cast<int>(videos.front()->features.cols());
  nn::Network net(DetectorLayers(feature_dim, num_classes, config.arch),
                  config.seed);
  if (config.epochs <= 0) return net;

  nn::Adam adam({.lr = config.lr}, net.num_params());
  std::vector<std::size_t> order(videos.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed ^ 0x6b65797074ULL);
  std::vector<double> grads(net.num_params());
  nn::ForwardTrace trace;
  Matrix heat_grad;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t idx : order) {
      const data::Video& video = *videos[idx];
      if (video.points.empty()) {
        throw AnnotationError("video " + video.id + " has no point labels");
      }
      const Matrix heatmap = net.Forward(video.features, &trace);
      const double loss = KeypointLossWithGrad(heatmap, video.points, &heat_grad);
      if (!std::isfinite(loss)) {
        throw TrainingError("keypoint detector diverged (loss=" +
                            std::to_string(loss) + ") in epoch " +
                            std::to_string(epoch + 1));
      }
      total += loss;
      std::fill(grads.begin(), grads.end(), 0.0);
      net.BackwardAccumulate(trace, heat_grad, grads, nullptr);
      adam.Step(net.mutable_params(), grads);
    }
    if (on_epoch) on_epoch(epoch + 1, total / static_cast<double>(videos.size()));
  }
  return net;
}

Matrix PredictHeatmap(const nn::Network& detector, const Matrix& features) {
  return detector.Forward(features);
}

std::vector<Keypoint> ExtractKeypoints(const Matrix& heatmap, double theta) {
  const Eigen::Index frames = heatmap.rows();
  std::vector<double> curve(frames);
  std::vector<int> cls(frames);
  for (Eigen::Index t = 0; t < frames; ++t) {
    Eigen::Index arg = 0;
    curve[t] = heatmap.row(t).maxCoeff(&arg);
    cls[t] = static_cast<int>(arg);
  }
  std::vector<Keypoint> keypoints;
  for (Eigen::Index t = 0; t < frames; ++t) {
    const double m = curve[t];
    if (!(m > theta)) continue;
    if (t > 0 && !(m > curve[t - 1])) continue;
    if (t + 1 < frames && !(m >= curve[t + 1])) continue;
    keypoints.push_back({static_cast<int>(t), cls[t], m});
  }
  return keypoints;
}

double ThetaPreset(const std::string& name) {
  if (name == "thumos") return 0.15;
  if (name == "beoid") return 0.01;
  if (name == "gtea") return 0.0;
  throw ConfigError("unknown theta preset '" + name +
                    "' (expected thumos, beoid or gtea)");
}

Matrix Resample(const Matrix& span, int target_frames) {
  if (target_frames < 2) {
    throw ConfigError("short videos need at least 2 frames, got " +
                      std::to_string(target_frames));
  }
  if (span.rows() < 1) throw DimensionError("cannot resample an empty span");
  Matrix out(target_frames, span.cols());
  const Eigen::Index rows = span.rows();
  if (rows == 1) {
    for (int i = 0; i < target_frames; ++i) out.row(i) = span.row(0);
    return out;
  }
  const double step =
      static_cast<double>(rows - 1) / static_cast<double>(target_frames - 1);
  for (int i = 0; i < target_frames; ++i) {
    const double pos = i * step;
    Eigen::Index lo = static_cast<Eigen::Index>(std::floor(pos));
    lo = std::min(lo, rows - 1);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= rows || frac == 0.0) {
      out.row(i) = span.row(lo);
    } else {
      out.row(i) = (1.0 - frac) * span.row(lo) + frac * span.row(lo + 1);
    }
  }
  return out;
}

std::vector<ShortVideo> SegmentVideo(const Matrix& features,
                                     std::span<const Keypoint> keypoints,
                                     int target_frames,
                                     const std::string& video_id) {
  std::vector<ShortVideo> shorts;
  const int frames = static_cast<int>(features.rows());
  for (std::size_t j = 0; j < keypoints.size(); ++j) {
    const Keypoint& kp = keypoints[j];
    if (kp.t < 0 || kp.t >= frames) {
      throw DimensionError("keypoint at frame " + std::to_string(kp.t) +
                           " outside a " + std::to_string(frames) +
                           "-frame video");
    }
    if (j > 0 && keypoints[j - 1].t >= kp.t) {
      throw ConfigError("keypoints must be strictly increasing in t");
    }
    ShortVideo sv;
    sv.orig_start = j == 0 ? 0 : keypoints[j - 1].t + 1;
    sv.orig_end = j + 1 == keypoints.size() ? frames - 1 : keypoints[j + 1].t - 1;
    // Keypoints one frame apart would leave an empty interval; keep at least
    // the keypoint itself.
    sv.orig_start = std::min(sv.orig_start, kp.t);
    sv.orig_end = std::max(sv.orig_end, kp.t);
    sv.keypoint_frame = kp.t;
    sv.keypoint_pos =
        sv.orig_end == sv.orig_start
            ? 0.5
            : static_cast<double>(kp.t - sv.orig_start) /
                  static_cast<double>(sv.orig_end - sv.orig_start);
    sv.class_id = kp.class_id;
    sv.score = kp.prob;
    sv.video_id = video_id;
    sv.features = Resample(
        features.middleRows(sv.orig_start, sv.orig_end - sv.orig_start + 1),
        target_frames);
    shorts.push_back(std::move(sv));
  }
  return shorts;
}

}  // namespace ptal::keypoint
