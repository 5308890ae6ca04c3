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

// Inference: heatmap -> smoothing -> keypoints -> short videos -> one
// proposal per keypoint, mapped back to original frames. Every keypoint
// yields exactly one detection scored with its key probability; nothing is
// suppressed or thresholded afterwards.

#ifndef PTAL_INFERENCE_H_
#define PTAL_INFERENCE_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ptal/eval.h"
#include "ptal/keypoint.h"
#include "ptal/localizer.h"
#include "ptal/network.h"
#include "ptal/savgol.h"

namespace ptal::inference {

struct InferConfig {
  double theta = 0.15;
  // Wider than the longest synthetic instance, so a plateau-shaped response
  // is reduced to one peak near its centre.
  SavGolConfig smoothing{33, 2};
  // When set, every proposal uses this length with zero centre offset
  // instead of the predictor output (the fixed-length baseline).
  std::optional<double> fixed_length;
  int threads = 1;
};

// frame = orig_start + coord * (orig_end - orig_start), rounded half-up and
// clamped to [0, frames - 1].
int ToFrame(double coord, int orig_start, int orig_end, int frames);

// Smoothed heatmap and its keypoints for one video.
std::vector<keypoint::Keypoint> DetectKeypoints(const nn::Network& detector,
                                                const Matrix& features,
                                                double theta,
                                                const SavGolConfig& smoothing);

// Detection for one short video. The class is the argmax of the classifier
// over the C action classes (background excluded) on the foreground feature.
eval::Detection LocalizeShortVideo(const localizer::LocalizerModel& model,
                                   const keypoint::ShortVideo& sv, int frames,
                                   const InferConfig& config);

// Throws DimensionError when the models disagree on D, C or T_s.
std::vector<eval::Detection> Infer(const Matrix& features,
                                   const std::string& video_id,
                                   const nn::Network& detector,
                                   const localizer::LocalizerModel& model,
                                   const InferConfig& config);

// Runs Infer over several videos (optionally on config.threads threads) and
// concatenates the results in input order.
std::vector<eval::Detection> InferVideos(
    std::span<const data::Video* const> videos, const nn::Network& detector,
    const localizer::LocalizerModel& model, const InferConfig& config);

}  // namespace ptal::inference

#endif  // PTAL_INFERENCE_H_
