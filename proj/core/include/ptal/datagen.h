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

// Synthetic untrimmed-video corpora with point-level annotations.
//
// Each class c owns a random prototype feature vector, and so does the
// background. A frame inside a class-c segment is that prototype plus
// isotropic Gaussian noise; every other frame is the background prototype
// plus noise. Segments never overlap and are separated from each other and
// from the video ends by at least `gap_min` background frames.

#ifndef PTAL_DATAGEN_H_
#define PTAL_DATAGEN_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ptal/tensor.h"

namespace ptal::data {

// Inclusive frame interval [start, end] labelled with an action class.
struct Segment {
  int start = 0;
  int end = 0;
  int class_id = 0;

  int length() const { return end - start + 1; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

// A single annotated frame.
struct PointLabel {
  int t = 0;
  int class_id = 0;

  friend bool operator==(const PointLabel&, const PointLabel&) = default;
};

enum class PointDistribution { kUniform, kGaussian };

std::string ToString(PointDistribution distribution);
PointDistribution ParsePointDistribution(const std::string& name);

struct IntRange {
  int min = 1;
  int max = 1;

  friend bool operator==(const IntRange&, const IntRange&) = default;
};

struct SyntheticConfig {
  int num_videos = 50;
  int num_test = 10;  // the last num_test videos form the held-out split
  int frames = 256;
  int feature_dim = 32;
  int num_classes = 5;
  IntRange instances_per_video{2, 4};
  IntRange length_range{12, 32};
  int gap_min = 16;
  double noise_sigma = 0.1;
  PointDistribution point_distribution = PointDistribution::kGaussian;
  std::uint64_t seed = 7;

  // Throws ConfigError for invalid or infeasible settings.
  void Validate() const;

  friend bool operator==(const SyntheticConfig&,
                         const SyntheticConfig&) = default;
};

enum class Split { kTrain, kTest };

std::string ToString(Split split);
Split ParseSplit(const std::string& name);

struct Video {
  std::string id;
  Split split = Split::kTrain;
  Matrix features;  // frames x feature_dim
  std::vector<Segment> segments;
  std::vector<PointLabel> points;  // one per segment, same order
};

struct Corpus {
  int frames = 0;
  int feature_dim = 0;
  int num_classes = 0;
  SyntheticConfig config;
  // (num_classes + 1) x feature_dim; the last row is the background.
  Matrix prototypes;
  std::vector<Video> videos;

  std::vector<const Video*> SplitVideos(Split split) const;
};

// Deterministic in cfg (including cfg.seed).
Corpus GenerateDataset(const SyntheticConfig& cfg);

// One label per segment, in segment order, always inside its segment.
// Uniform draws t from [start, end]; Gaussian draws from
// Normal((start + end) / 2, (end - start) / 6), rounds to the nearest frame
// and resamples until the frame falls inside the segment.
// Throws AnnotationError on an empty segment list.
std::vector<PointLabel> SimulatePointLabels(std::span<const Segment> segments,
                                            PointDistribution distribution,
                                            std::uint64_t seed);

}  // namespace ptal::data

#endif  // PTAL_DATAGEN_H_
