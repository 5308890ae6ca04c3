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

// Run configuration shared by every stage of the workflow. It is serialised
// into every artifact so that each output records how it was produced.

#ifndef PTAL_RUN_CONFIG_H_
#define PTAL_RUN_CONFIG_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ptal/datagen.h"
#include "ptal/keypoint.h"
#include "ptal/localizer.h"
#include "ptal/mapper.h"
#include "ptal/savgol.h"

namespace ptal {

struct RunConfig {
  std::uint64_t seed = 7;
  int ts = 64;
  double theta = 0.15;
  double beta = 1.25;
  double lr_main = 1e-4;
  double lr_mapper = 1e-5;
  int sg_window = 33;
  int sg_order = 2;
  std::vector<double> iou_thresholds = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  double stats_iou = 0.5;

  // Keypoint detector.
  int keypoint_epochs = 50;
  keypoint::DetectorConfig detector;

  // Mapper.
  std::size_t mapper_pairs = 100000;
  int mapper_batch = 32;
  int mapper_max_epochs = 300;
  double mapper_stop_accuracy = 0.991;
  double mapper_min_accuracy = 0.99;
  mapper::MapperArch mapper_arch;

  // Localizer.
  int localizer_epochs = 50;
  int localizer_batch = 1;
  bool use_center_offset = true;
  bool use_background_loss = true;
  localizer::PoolDivisor pool_divisor = localizer::PoolDivisor::kFrames;
  localizer::PredictorArch predictor;
  localizer::ClassifierArch classifier;
  double baseline_length = 0.5;

  data::SyntheticConfig data;
  int threads = 1;
  std::map<std::string, std::string> paths;

  SavGolConfig smoothing() const { return {sg_window, sg_order}; }

  // Range and consistency checks; throws ConfigError.
  void Validate() const;

  // Compact JSON object with every field, in a fixed key order.
  std::string ToJson() const;

  // Overrides the fields present in `json_text` (an object using the keys
  // of ToJson); unknown keys and ill-typed values raise ConfigError.
  void MergeJson(const std::string& json_text);
};

// Reads a JSON config file and merges it over `base`. Throws FormatError when
// the file cannot be read and ConfigError on invalid content.
RunConfig LoadRunConfig(const std::string& path, RunConfig base = {});

// Thread count from the PTAL_THREADS environment variable, or `fallback`
// when it is unset. Throws ConfigError when it is not a positive integer.
int ThreadsFromEnv(int fallback = 1);

}  // namespace ptal

#endif  // PTAL_RUN_CONFIG_H_
