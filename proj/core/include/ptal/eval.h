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

// Detection metrics over inclusive frame intervals: temporal IoU, average
// precision with greedy matching and all-point interpolation, mAP over IoU
// thresholds, and false-alarm / precision / recall / F-measure.

#ifndef PTAL_EVAL_H_
#define PTAL_EVAL_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ptal/datagen.h"
#include "ptal/tensor.h"

namespace ptal::eval {

struct Detection {
  std::string video_id;
  int start = 0;
  int end = 0;
  int class_id = 0;
  double score = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct GroundTruth {
  std::string video_id;
  int start = 0;
  int end = 0;
  int class_id = 0;
};

// Ground truths of every video of `split`.
std::vector<GroundTruth> CollectGroundTruth(const data::Corpus& corpus,
                                            data::Split split);

// |a ∩ b| / |a ∪ b| on inclusive intervals; 0 when disjoint.
double TemporalIoU(int a_start, int a_end, int b_start, int b_end);

// Descending score, then earlier start, then smaller video id; the returned
// indices refer to `detections`.
std::vector<std::size_t> RankDetections(std::span<const Detection> detections);

// Result of greedy matching. For each ranked detection, `matched_gt` holds the
// ground-truth index it claimed or -1.
struct Matching {
  std::vector<std::size_t> order;
  std::vector<int> matched_gt;
};

// Walks detections in rank order; each one claims the unmatched ground truth
// of the same class and video with the highest IoU (lowest index on ties),
// provided that IoU >= iou_threshold.
Matching GreedyMatch(std::span<const Detection> detections,
                     std::span<const GroundTruth> ground_truth,
                     double iou_threshold);

// AP of one class: detections and ground truths of other classes are
// ignored. Returns 0 and sets *no_ground_truth when the class has no ground
// truth.
double AveragePrecision(std::span<const Detection> detections,
                        std::span<const GroundTruth> ground_truth,
                        int class_id, double iou_threshold,
                        bool* no_ground_truth = nullptr);

struct MeanApResult {
  Matrix ap;                      // classes x thresholds
  std::vector<double> map;        // per threshold
  double avg_map = 0.0;
  std::vector<int> evaluated_classes;  // classes with at least one gt
};

// Throws ConfigError on an empty threshold list or a threshold outside
// (0, 1].
MeanApResult MeanAp(std::span<const Detection> detections,
                    std::span<const GroundTruth> ground_truth,
                    int num_classes, std::span<const double> thresholds);

struct DetectionStats {
  double false_alarm = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  int true_positives = 0;
  int false_positives = 0;
  int num_ground_truth = 0;
  bool no_predictions = false;
};

DetectionStats ComputeDetectionStats(std::span<const Detection> detections,
                                     std::span<const GroundTruth> ground_truth,
                                     double iou_threshold);

struct EvalReport {
  std::vector<double> thresholds;
  MeanApResult map;
  double stats_iou = 0.5;
  DetectionStats stats;
  int num_detections = 0;
};

EvalReport Evaluate(std::span<const Detection> detections,
                    std::span<const GroundTruth> ground_truth, int num_classes,
                    std::span<const double> thresholds,
                    double stats_iou = 0.5);

// JSON object text for the report.
std::string ReportToJson(const EvalReport& report);

// Predictions file: {"run_config": {...}, "predictions": [{video_id, start,
// end, class_id, score}, ...]}. A bare JSON array is accepted on read.
void WriteDetections(const std::filesystem::path& path,
                     std::span<const Detection> detections,
                     const std::string& run_config_json = "");
std::vector<Detection> ReadDetections(const std::filesystem::path& path);

}  // namespace ptal::eval

#endif  // PTAL_EVAL_H_
