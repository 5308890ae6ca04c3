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

#include "ptal/inference.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "ptal/error.h"

namespace ptal::inference {

int ToFrame(double coord, int orig_start, int orig_end, int frames) {
  const double pos =
      static_cast<double>(orig_start) +
      coord * static_cast<double>(orig_end - orig_start);
  const int frame = static_cast<int>(std::floor(pos + 0.5));
  return std::clamp(frame, 0, frames - 1);
}

std::vector<keypoint::Keypoint> DetectKeypoints(const nn::Network& detector,
                                                const Matrix& features,
                                                double theta,
                                                const SavGolConfig& smoothing) {
  const Matrix heat = keypoint::PredictHeatmap(detector, features);
  return keypoint::ExtractKeypoints(SmoothHeatmap(heat, smoothing), theta);
}

eval::Detection LocalizeShortVideo(const localizer::LocalizerModel& model,
                                   const keypoint::ShortVideo& sv, int frames,
                                   const InferConfig& config) {
  mapper::Proposal proposal;
  if (config.fixed_length.has_value()) {
    proposal.center = sv.keypoint_pos;
    proposal.length = *config.fixed_length;
  } else {
    proposal = localizer::PredictProposal(model, sv);
  }
  const std::vector<double> mask =
      mapper::MapperForward(model.mapper, proposal, model.ts);
  Matrix pooled = localizer::PoolForeground(sv.features, mask, model.divisor);
  const Matrix probs = model.classifier.Forward(pooled);
  Eigen::Index cls = 0;
  probs.row(0).head(model.num_classes).maxCoeff(&cls);

  eval::Detection d;
  d.video_id = sv.video_id;
  d.start = ToFrame(proposal.start(), sv.orig_start, sv.orig_end, frames);
  d.end = ToFrame(proposal.end(), sv.orig_start, sv.orig_end, frames);
  d.class_id = static_cast<int>(cls);
  d.score = sv.score;
  return d;
}

std::vector<eval::Detection> Infer(const Matrix& features,
                                   const std::string& video_id,
                                   const nn::Network& detector,
                                   const localizer::LocalizerModel& model,
                                   const InferConfig& config) {
  if (detector.input_dim() != features.cols() ||
      model.feature_dim() != features.cols()) {
    throw DimensionError("features have D=" + std::to_string(features.cols()) +
                         " but the detector expects " +
                         std::to_string(detector.input_dim()) +
                         " and the localizer " +
                         std::to_string(model.feature_dim()));
  }
  if (detector.output_dim() != model.num_classes ||
      model.classifier.output_dim() != model.num_classes + 1) {
    throw DimensionError("detector and classifier disagree on the class count");
  }
  if (model.mapper.output_dim() != model.ts) {
    throw DimensionError("mapper T_s differs from the localizer T_s");
  }
  const std::vector<keypoint::Keypoint> keypoints =
      DetectKeypoints(detector, features, config.theta, config.smoothing);
  const std::vector<keypoint::ShortVideo> shorts =
      keypoint::SegmentVideo(features, keypoints, model.ts, video_id);
  std::vector<eval::Detection> out;
  out.reserve(shorts.size());
  const int frames = static_cast<int>(features.rows());
  for (const keypoint::ShortVideo& sv : shorts) {
    out.push_back(LocalizeShortVideo(model, sv, frames, config));
  }
  return out;
}

std::vector<eval::Detection> InferVideos(
    std::span<const data::Video* const> videos, const nn::Network& detector,
    const localizer::LocalizerModel& model, const InferConfig& config) {
  std::vector<std::vector<eval::Detection>> per_video(videos.size());
  const std::size_t workers = std::min<std::size_t>(
      static_cast<std::size_t>(std::max(config.threads, 1)),
      std::max<std::size_t>(videos.size(), 1));
  auto work = [&](std::size_t first) {
    for (std::size_t i = first; i < videos.size(); i += workers) {
      per_video[i] = Infer(videos[i]->features, videos[i]->id, detector, model,
                           config);
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::vector<eval::Detection> out;
  for (auto& dets : per_video) {
    out.insert(out.end(), std::make_move_iterator(dets.begin()),
               std::make_move_iterator(dets.end()));
  }
  return out;
}

}  // namespace ptal::inference
