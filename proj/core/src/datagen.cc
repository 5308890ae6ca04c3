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

#include "ptal/datagen.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "ptal/error.h"

namespace ptal::data {
namespace {

// Independent, reproducible random streams per (seed, purpose, index).
std::mt19937_64 MakeStream(std::uint64_t seed, std::uint32_t purpose,
                           std::uint32_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), purpose, index};
  return std::mt19937_64(seq);
}

enum StreamPurpose : std::uint32_t {
  kPrototypes = 1,
  kLayout = 2,
  kNoise = 3,
  kPoints = 4,
};

int UniformInt(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

std::vector<Segment> LayOutSegments(const SyntheticConfig& cfg,
                                    std::mt19937_64& rng) {
  const int count = UniformInt(rng, cfg.instances_per_video.min,
                               cfg.instances_per_video.max);
  std::vector<int> lengths(count);
  int occupied = 0;
  for (int& len : lengths) {
    len = UniformInt(rng, cfg.length_range.min, cfg.length_range.max);
    occupied += len;
  }
  const int slack = cfg.frames - occupied - (count + 1) * cfg.gap_min;
  // Split the slack into count + 1 extra gaps (stars and bars).
  std::vector<int> cuts(count);
  for (int& c : cuts) c = UniformInt(rng, 0, slack);
  std::sort(cuts.begin(), cuts.end());

  std::vector<Segment> segments;
  int cursor = 0;
  int previous_cut = 0;
  for (int i = 0; i < count; ++i) {
    cursor += cfg.gap_min + (cuts[i] - previous_cut);
    previous_cut = cuts[i];
    Segment seg;
    seg.start = cursor;
    seg.end = cursor + lengths[i] - 1;
    seg.class_id = UniformInt(rng, 0, cfg.num_classes - 1);
    segments.push_back(seg);
    cursor = seg.end + 1;
  }
  return segments;
}

}  // namespace

std::string ToString(PointDistribution distribution) {
  return distribution == PointDistribution::kUniform ? "uniform" : "gaussian";
}

PointDistribution ParsePointDistribution(const std::string& name) {
  if (name == "uniform") return PointDistribution::kUniform;
  if (name == "gaussian") return PointDistribution::kGaussian;
  throw ConfigError("unknown point distribution '" + name +
                    "' (expected uniform or gaussian)");
}

std::string ToString(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

Split ParseSplit(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "test") return Split::kTest;
  throw FormatError("unknown split '" + name + "'");
}

void SyntheticConfig::Validate() const {
  if (num_videos < 1 || frames < 1 || feature_dim < 1 || num_classes < 1) {
    throw ConfigError("num_videos, T, D and C must all be >= 1");
  }
  if (num_test < 0 || num_test > num_videos) {
    throw ConfigError("num_test must lie in [0, num_videos]");
  }
  if (instances_per_video.min < 1 ||
      instances_per_video.max < instances_per_video.min) {
    throw ConfigError("instances_per_video must be a range with min >= 1");
  }
  if (length_range.min < 1 || length_range.max < length_range.min) {
    throw ConfigError("length_range must be a range with min >= 1");
  }
  if (length_range.max > frames) {
    throw ConfigError("length_range does not fit inside T");
  }
  if (gap_min < 1) throw ConfigError("gap_min must be >= 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ConfigError("noise_sigma must be finite and >= 0");
  }
  const long worst = static_cast<long>(instances_per_video.max) *
                         length_range.max +
                     static_cast<long>(instances_per_video.max + 1) * gap_min;
  if (worst > frames) {
    throw ConfigError("infeasible packing: " +
                      std::to_string(instances_per_video.max) + " x " +
                      std::to_string(length_range.max) + " frames plus gaps (" +
                      std::to_string(worst) + ") exceed T=" +
                      std::to_string(frames));
  }
}

std::vector<const Video*> Corpus::SplitVideos(Split split) const {
  std::vector<const Video*> out;
  for (const Video& v : videos) {
    if (v.split == split) out.push_back(&v);
  }
  return out;
}

Corpus GenerateDataset(const SyntheticConfig& cfg) {
  cfg.Validate();
  Corpus corpus;
  corpus.frames = cfg.frames;
  corpus.feature_dim = cfg.feature_dim;
  corpus.num_classes = cfg.num_classes;
  corpus.config = cfg;

  {
    auto rng = MakeStream(cfg.seed, kPrototypes, 0);
    std::normal_distribution<double> unit(0.0, 1.0);
    corpus.prototypes.resize(cfg.num_classes + 1, cfg.feature_dim);
    for (Eigen::Index r = 0; r < corpus.prototypes.rows(); ++r) {
      for (Eigen::Index c = 0; c < corpus.prototypes.cols(); ++c) {
        corpus.prototypes(r, c) = unit(rng);
      }
    }
  }

  const int num_train = cfg.num_videos - cfg.num_test;
  for (int v = 0; v < cfg.num_videos; ++v) {
    Video video;
    char id[32];
    std::snprintf(id, sizeof(id), "video_%04d", v);
    video.id = id;
    video.split = v < num_train ? Split::kTrain : Split::kTest;

    auto layout_rng = MakeStream(cfg.seed, kLayout, v);
    video.segments = LayOutSegments(cfg, layout_rng);

    std::vector<int> frame_class(cfg.frames, cfg.num_classes);
    for (const Segment& seg : video.segments) {
      std::fill(frame_class.begin() + seg.start,
                frame_class.begin() + seg.end + 1, seg.class_id);
    }
    auto noise_rng = MakeStream(cfg.seed, kNoise, v);
    std::normal_distribution<double> noise(0.0, 1.0);
    video.features.resize(cfg.frames, cfg.feature_dim);
    for (int t = 0; t < cfg.frames; ++t) {
      video.features.row(t) = corpus.prototypes.row(frame_class[t]);
      if (cfg.noise_sigma > 0.0) {
        for (int d = 0; d < cfg.feature_dim; ++d) {
          video.features(t, d) += cfg.noise_sigma * noise(noise_rng);
        }
      }
    }

    const std::uint64_t point_seed =
        cfg.seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(v + 1));
    video.points = SimulatePointLabels(video.segments, cfg.point_distribution,
                                       point_seed);
    corpus.videos.push_back(std::move(video));
  }
  return corpus;
}

std::vector<PointLabel> SimulatePointLabels(std::span<const Segment> segments,
                                            PointDistribution distribution,
                                            std::uint64_t seed) {
  if (segments.empty()) {
    throw AnnotationError("cannot simulate point labels without segments");
  }
  auto rng = MakeStream(seed, kPoints, 0);
  std::vector<PointLabel> labels;
  labels.reserve(segments.size());
  for (const Segment& seg : segments) {
    if (seg.end < seg.start) throw AnnotationError("segment with end < start");
    PointLabel label;
    label.class_id = seg.class_id;
    if (seg.start == seg.end) {
      label.t = seg.start;
    } else if (distribution == PointDistribution::kUniform) {
      label.t = UniformInt(rng, seg.start, seg.end);
    } else {
      const double mid = 0.5 * (seg.start + seg.end);
      const double sigma = (seg.end - seg.start) / 6.0;
      std::normal_distribution<double> gauss(mid, sigma);
      for (;;) {
        const double t = std::floor(gauss(rng) + 0.5);
        if (t >= seg.start && t <= seg.end) {
          label.t = static_cast<int>(t);
          break;
        }
      }
    }
    labels.push_back(label);
  }
  return labels;
}

}  // namespace ptal::data
