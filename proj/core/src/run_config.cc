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

#include "ptal/run_config.h"

#include <cstdlib>
#include <fstream>
#include <set>

#include "json.hpp"
#include "ptal/error.h"

namespace ptal {
namespace {

using json = nlohmann::ordered_json;

// Assigns j[key] to *out when present; records the key as consumed.
template <typename T>
void Take(const json& j, const char* key, T* out, std::set<std::string>* seen) {
  auto it = j.find(key);
  if (it == j.end()) return;
  seen->insert(key);
  try {
    *out = it->template get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key +
                      "' has the wrong type");
  }
}

void RejectUnknown(const json& j, const std::set<std::string>& seen,
                   const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!seen.contains(it.key())) {
      throw ConfigError("unknown config key '" + where + it.key() + "'");
    }
  }
}

void TakeRange(const json& j, const char* key, data::IntRange* out,
               std::set<std::string>* seen) {
  std::vector<int> pair;
  Take(j, key, &pair, seen);
  if (j.contains(key)) {
    if (pair.size() != 2) {
      throw ConfigError(std::string("config key '") + key +
                        "' must be a [min, max] pair");
    }
    *out = {pair[0], pair[1]};
  }
}

json DataToJson(const data::SyntheticConfig& d) {
  return {{"num_videos", d.num_videos},
          {"num_test", d.num_test},
          {"T", d.frames},
          {"D", d.feature_dim},
          {"C", d.num_classes},
          {"instances_per_video",
           {d.instances_per_video.min, d.instances_per_video.max}},
          {"length_range", {d.length_range.min, d.length_range.max}},
          {"gap_min", d.gap_min},
          {"noise_sigma", d.noise_sigma},
          {"point_distribution", data::ToString(d.point_distribution)},
          {"seed", d.seed}};
}

void MergeData(const json& j, data::SyntheticConfig* d) {
  if (!j.is_object()) throw ConfigError("config key 'data' must be an object");
  std::set<std::string> seen;
  Take(j, "num_videos", &d->num_videos, &seen);
  Take(j, "num_test", &d->num_test, &seen);
  Take(j, "T", &d->frames, &seen);
  Take(j, "D", &d->feature_dim, &seen);
  Take(j, "C", &d->num_classes, &seen);
  TakeRange(j, "instances_per_video", &d->instances_per_video, &seen);
  TakeRange(j, "length_range", &d->length_range, &seen);
  Take(j, "gap_min", &d->gap_min, &seen);
  Take(j, "noise_sigma", &d->noise_sigma, &seen);
  std::string dist = data::ToString(d->point_distribution);
  Take(j, "point_distribution", &dist, &seen);
  d->point_distribution = data::ParsePointDistribution(dist);
  Take(j, "seed", &d->seed, &seen);
  RejectUnknown(j, seen, "data.");
}

}  // namespace

void RunConfig::Validate() const {
  if (ts < 2) throw ConfigError("T_s must be >= 2");
  if (!(theta >= 0.0 && theta < 1.0)) throw ConfigError("theta must lie in [0, 1)");
  if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
  if (!(lr_main > 0.0) || !(lr_mapper > 0.0)) {
    throw ConfigError("learning rates must be > 0");
  }
  smoothing().Validate();
  if (iou_thresholds.empty()) throw ConfigError("no IoU thresholds");
  for (double t : iou_thresholds) {
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError("IoU thresholds must lie in (0, 1]");
  }
  if (!(stats_iou > 0.0 && stats_iou <= 1.0)) {
    throw ConfigError("stats IoU must lie in (0, 1]");
  }
  if (keypoint_epochs < 0 || localizer_epochs < 0 || mapper_max_epochs < 0) {
    throw ConfigError("epoch counts must be >= 0");
  }
  if (mapper_pairs < 1) throw ConfigError("mapper pair count must be >= 1");
  if (mapper_batch < 1 || localizer_batch < 1) {
    throw ConfigError("batch sizes must be >= 1");
  }
  if (detector.hidden < 1 || detector.kernel < 1 || detector.kernel % 2 == 0 ||
      detector.depth < 0) {
    throw ConfigError("invalid detector architecture");
  }
  if (predictor.hidden < 1 || predictor.kernel < 1 ||
      predictor.kernel % 2 == 0 || classifier.hidden < 1 ||
      mapper_arch.hidden < 1 || mapper_arch.depth < 1) {
    throw ConfigError("invalid network architecture");
  }
  if (!(baseline_length > 0.0 && baseline_length <= 1.0)) {
    throw ConfigError("baseline length must lie in (0, 1]");
  }
  if (threads < 1) throw ConfigError("threads must be >= 1");
  data.Validate();
}

std::string RunConfig::ToJson() const {
  json j;
  j["seed"] = seed;
  j["T_s"] = ts;
  j["theta"] = theta;
  j["beta"] = beta;
  j["lr_main"] = lr_main;
  j["lr_mapper"] = lr_mapper;
  j["sg_window"] = sg_window;
  j["sg_order"] = sg_order;
  j["iou_thresholds"] = iou_thresholds;
  j["stats_iou"] = stats_iou;
  j["keypoint_epochs"] = keypoint_epochs;
  j["detector_hidden"] = detector.hidden;
  j["detector_kernel"] = detector.kernel;
  j["detector_depth"] = detector.depth;
  j["mapper_pairs"] = mapper_pairs;
  j["mapper_batch"] = mapper_batch;
  j["mapper_max_epochs"] = mapper_max_epochs;
  j["mapper_stop_accuracy"] = mapper_stop_accuracy;
  j["mapper_min_accuracy"] = mapper_min_accuracy;
  j["mapper_hidden"] = mapper_arch.hidden;
  j["mapper_depth"] = mapper_arch.depth;
  j["localizer_epochs"] = localizer_epochs;
  j["localizer_batch"] = localizer_batch;
  j["use_center_offset"] = use_center_offset;
  j["use_background_loss"] = use_background_loss;
  j["pool_divisor"] = localizer::ToString(pool_divisor);
  j["predictor_hidden"] = predictor.hidden;
  j["predictor_kernel"] = predictor.kernel;
  j["classifier_hidden"] = classifier.hidden;
  j["baseline_length"] = baseline_length;
  j["data"] = DataToJson(data);
  j["threads"] = threads;
  j["paths"] = paths;
  return j.dump();
}

void RunConfig::MergeJson(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  std::set<std::string> seen;
  Take(j, "seed", &seed, &seen);
  Take(j, "T_s", &ts, &seen);
  Take(j, "theta", &theta, &seen);
  Take(j, "beta", &beta, &seen);
  Take(j, "lr_main", &lr_main, &seen);
  Take(j, "lr_mapper", &lr_mapper, &seen);
  Take(j, "sg_window", &sg_window, &seen);
  Take(j, "sg_order", &sg_order, &seen);
  Take(j, "iou_thresholds", &iou_thresholds, &seen);
  Take(j, "stats_iou", &stats_iou, &seen);
  Take(j, "keypoint_epochs", &keypoint_epochs, &seen);
  Take(j, "detector_hidden", &detector.hidden, &seen);
  Take(j, "detector_kernel", &detector.kernel, &seen);
  Take(j, "detector_depth", &detector.depth, &seen);
  Take(j, "mapper_pairs", &mapper_pairs, &seen);
  Take(j, "mapper_batch", &mapper_batch, &seen);
  Take(j, "mapper_max_epochs", &mapper_max_epochs, &seen);
  Take(j, "mapper_stop_accuracy", &mapper_stop_accuracy, &seen);
  Take(j, "mapper_min_accuracy", &mapper_min_accuracy, &seen);
  Take(j, "mapper_hidden", &mapper_arch.hidden, &seen);
  Take(j, "mapper_depth", &mapper_arch.depth, &seen);
  Take(j, "localizer_epochs", &localizer_epochs, &seen);
  Take(j, "localizer_batch", &localizer_batch, &seen);
  Take(j, "use_center_offset", &use_center_offset, &seen);
  Take(j, "use_background_loss", &use_background_loss, &seen);
  std::string divisor = localizer::ToString(pool_divisor);
  Take(j, "pool_divisor", &divisor, &seen);
  pool_divisor = localizer::ParsePoolDivisor(divisor);
  Take(j, "predictor_hidden", &predictor.hidden, &seen);
  Take(j, "predictor_kernel", &predictor.kernel, &seen);
  Take(j, "classifier_hidden", &classifier.hidden, &seen);
  Take(j, "baseline_length", &baseline_length, &seen);
  if (j.contains("data")) {
    seen.insert("data");
    MergeData(j.at("data"), &data);
  }
  Take(j, "threads", &threads, &seen);
  Take(j, "paths", &paths, &seen);
  RejectUnknown(j, seen, "");
}

RunConfig LoadRunConfig(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read config file " + path);
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  base.MergeJson(text);
  return base;
}

int ThreadsFromEnv(int fallback) {
  const char* value = std::getenv("PTAL_THREADS");
  if (value == nullptr || *value == '\0') return fallback;
  char* end = nullptr;
  const long n = std::strtol(value, &end, 10);
  if (*end != '\0' || n < 1 || n > 1024) {
    throw ConfigError(std::string("PTAL_THREADS must be a positive integer, got '") +
                      value + "'");
  }
  return static_cast<int>(n);
}

}  // namespace ptal
