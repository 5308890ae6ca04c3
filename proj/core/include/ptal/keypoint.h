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

// Keypoint stage: a fully convolutional detector trained from point labels
// produces a per-frame, per-class key heatmap; its peaks become anchor
// keypoints, and the frames between neighbouring keypoints are cut into
// fixed-length short videos, one per keypoint.

#ifndef PTAL_KEYPOINT_H_
#define PTAL_KEYPOINT_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ptal/datagen.h"
#include "ptal/network.h"
#include "ptal/tensor.h"

namespace ptal::keypoint {

struct Keypoint {
  int t = 0;
  int class_id = 0;
  double prob = 0.0;

  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

struct ShortVideo {
  Matrix features;            // target_frames x D
  double keypoint_pos = 0.5;  // keypoint location in [0, 1] over the span
  int keypoint_frame = 0;
  int class_id = 0;           // keypoint class (inference) or label class
  double score = 0.0;         // keypoint probability
  std::string video_id;
  int orig_start = 0;         // inclusive span in original frames
  int orig_end = 0;
};

// Detector architecture: `depth` conv1d layers of width `hidden` with ReLU,
// followed by a conv1d output layer with a per-frame sigmoid over C classes.
struct DetectorConfig {
  int hidden = 64;
  int kernel = 3;
  int depth = 1;
};

std::vector<nn::LayerSpec> DetectorLayers(int feature_dim, int num_classes,
                                          const DetectorConfig& config);

// Weighted binary cross-entropy over the T x C heatmap: positives are exactly
// the annotated (t, class) entries, everything else is negative, and each set
// is averaged on its own. Duplicate labels count once. Throws AnnotationError
// on an empty label list or a label outside the heatmap.
double KeypointLoss(const Matrix& heatmap, std::span<const data::PointLabel> labels);

// Same as KeypointLoss; also writes d(loss)/d(heatmap) into `grad`.
double KeypointLossWithGrad(const Matrix& heatmap,
                            std::span<const data::PointLabel> labels,
                            Matrix* grad);

struct KeypointTrainConfig {
  int epochs = 50;
  double lr = 1e-4;
  std::uint64_t seed = 7;
  DetectorConfig arch;
};

// Called after every epoch with the mean per-video loss.
using EpochCallback = std::function<void(int epoch, double mean_loss)>;

// Trains with Adam, one step per video, videos visited in a seeded shuffled
// order. Throws TrainingError on a non-finite loss.
nn::Network TrainKeypointDetector(std::span<const data::Video* const> videos,
                                  int num_classes,
                                  const KeypointTrainConfig& config,
                                  const EpochCallback& on_epoch = {});

// T x C key probabilities.
Matrix PredictHeatmap(const nn::Network& detector, const Matrix& features);

// Peaks of the class-wise max curve m(t) = max_c heatmap(t, c). Frame t is
// kept iff m(t) > theta, m(t) > m(t-1) and m(t) >= m(t+1), where a missing
// neighbour at either end of the video is ignored. On a plateau of equal
// values this keeps only the leftmost frame. The class is the first argmax;
// the result is sorted by t.
std::vector<Keypoint> ExtractKeypoints(const Matrix& heatmap, double theta);

// Keypoint thresholds for the named benchmark presets: "thumos" (0.15),
// "beoid" (0.01), "gtea" (0.0). Throws ConfigError for other names.
double ThetaPreset(const std::string& name);

// Linear resampling of `span` (rows are frames) to `target_frames` rows;
// output row i samples source position i * (rows - 1) / (target_frames - 1).
// A single-row span is broadcast. Throws ConfigError when target_frames < 2
// and DimensionError on an empty span.
Matrix Resample(const Matrix& span, int target_frames);

// One short video per keypoint. Keypoint j covers original frames
// [p_{j-1} + 1, p_{j+1} - 1], with frame 0 / T - 1 standing in for a missing
// neighbour. Keypoints must be sorted by t.
std::vector<ShortVideo> SegmentVideo(const Matrix& features,
                                     std::span<const Keypoint> keypoints,
                                     int target_frames,
                                     const std::string& video_id = "");

}  // namespace ptal::keypoint

#endif  // PTAL_KEYPOINT_H_
