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

#include "ptal/eval.h"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "ptal/error.h"

namespace ptal::eval {
namespace {

using json = nlohmann::ordered_json;

template <typename T>
std::vector<T> FilterClass(std::span<const T> items, int class_id) {
  std::vector<T> out;
  for (const T& item : items) {
    if (item.class_id == class_id) out.push_back(item);
  }
  return out;
}

json StatsJson(const DetectionStats& s) {
  return {{"false_alarm", s.false_alarm},
          {"precision", s.precision},
          {"recall", s.recall},
          {"f_measure", s.f_measure},
          {"true_positives", s.true_positives},
          {"false_positives", s.false_positives},
          {"num_ground_truth", s.num_ground_truth},
          {"no_predictions", s.no_predictions}};
}

}  // namespace

std::vector<GroundTruth> CollectGroundTruth(const data::Corpus& corpus,
                                            data::Split split) {
  std::vector<GroundTruth> gts;
  for (const data::Video* video : corpus.SplitVideos(split)) {
    for (const data::Segment& s : video->segments) {
      gts.push_back({video->id, s.start, s.end, s.class_id});
    }
  }
  return gts;
}

double TemporalIoU(int a_start, int a_end, int b_start, int b_end) {
  const int inter = std::min(a_end, b_end) - std::max(a_start, b_start) + 1;
  if (inter <= 0) return 0.0;
  const int uni = (a_end - a_start + 1) + (b_end - b_start + 1) - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::size_t> RankDetections(std::span<const Detection> detections) {
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const Detection& x = detections[a];
                     const Detection& y = detections[b];
                     if (x.score != y.score) return x.score > y.score;
                     if (x.start != y.start) return x.start < y.start;
                     return x.video_id < y.video_id;
                   });
  return order;
}

Matching GreedyMatch(std::span<const Detection> detections,
                     std::span<const GroundTruth> ground_truth,
                     double iou_threshold) {
  Matching result;
  result.order = RankDetections(detections);
  result.matched_gt.assign(result.order.size(), -1);
  std::vector<bool> taken(ground_truth.size(), false);
  for (std::size_t rank = 0; rank < result.order.size(); ++rank) {
    const Detection& d = detections[result.order[rank]];
    int best = -1;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      const GroundTruth& gt = ground_truth[g];
      if (taken[g] || gt.class_id != d.class_id || gt.video_id != d.video_id) {
        continue;
      }
      const double iou = TemporalIoU(d.start, d.end, gt.start, gt.end);
      if (iou >= iou_threshold && iou > best_iou) {
        best = static_cast<int>(g);
        best_iou = iou;
      }
    }
    if (best >= 0) {
      taken[best] = true;
      result.matched_gt[rank] = best;
    }
  }
  return result;
}

double AveragePrecision(std::span<const Detection> detections,
                        std::span<const GroundTruth> ground_truth,
                        int class_id, double iou_threshold,
                        bool* no_ground_truth) {
  const std::vector<Detection> dets = FilterClass(detections, class_id);
  const std::vector<GroundTruth> gts = FilterClass(ground_truth, class_id);
  if (no_ground_truth != nullptr) *no_ground_truth = gts.empty();
  if (gts.empty() || dets.empty()) return 0.0;

  const Matching match = GreedyMatch(dets, gts, iou_threshold);
  const std::size_t n = dets.size();
  std::vector<double> precision(n);
  std::vector<double> recall(n);
  int tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (match.matched_gt[k] >= 0) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(gts.size());
  }
  for (std::size_t k = n - 1; k > 0; --k) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    ap += (recall[k] - prev_recall) * precision[k];
    prev_recall = recall[k];
  }
  return ap;
}

MeanApResult MeanAp(std::span<const Detection> detections,
                    std::span<const GroundTruth> ground_truth, int num_classes,
                    std::span<const double> thresholds) {
  if (thresholds.empty()) throw ConfigError("no IoU thresholds given");
  for (double thr : thresholds) {
    if (!(thr > 0.0 && thr <= 1.0)) {
      throw ConfigError("IoU threshold " + std::to_string(thr) +
                        " outside (0, 1]");
    }
  }
  MeanApResult result;
  const Eigen::Index k = static_cast<Eigen::Index>(thresholds.size());
  result.ap = Matrix::Zero(num_classes, k);
  result.map.assign(thresholds.size(), 0.0);
  for (int c = 0; c < num_classes; ++c) {
    const bool has_gt =
        std::any_of(ground_truth.begin(), ground_truth.end(),
                    [c](const GroundTruth& g) { return g.class_id == c; });
    if (has_gt) result.evaluated_classes.push_back(c);
    for (Eigen::Index j = 0; j < k; ++j) {
      result.ap(c, j) =
          AveragePrecision(detections, ground_truth, c, thresholds[j]);
    }
  }
  if (!result.evaluated_classes.empty()) {
    for (Eigen::Index j = 0; j < k; ++j) {
      double sum = 0.0;
      for (int c : result.evaluated_classes) sum += result.ap(c, j);
      result.map[j] =
          sum / static_cast<double>(result.evaluated_classes.size());
    }
  }
  result.avg_map =
      std::accumulate(result.map.begin(), result.map.end(), 0.0) /
      static_cast<double>(result.map.size());
  return result;
}

DetectionStats ComputeDetectionStats(std::span<const Detection> detections,
                                     std::span<const GroundTruth> ground_truth,
                                     double iou_threshold) {
  DetectionStats s;
  s.num_ground_truth = static_cast<int>(ground_truth.size());
  const Matching match = GreedyMatch(detections, ground_truth, iou_threshold);
  for (int g : match.matched_gt) {
    if (g >= 0) {
      ++s.true_positives;
    } else {
      ++s.false_positives;
    }
  }
  const int num_pred = s.true_positives + s.false_positives;
  if (num_pred == 0) {
    s.no_predictions = true;
  } else {
    s.precision = static_cast<double>(s.true_positives) / num_pred;
    s.false_alarm = static_cast<double>(s.false_positives) / num_pred;
  }
  if (s.num_ground_truth > 0) {
    s.recall = static_cast<double>(s.true_positives) / s.num_ground_truth;
  }
  const double pr = s.precision + s.recall;
  s.f_measure = pr > 0.0 ? 2.0 * s.precision * s.recall / pr : 0.0;
  return s;
}

EvalReport Evaluate(std::span<const Detection> detections,
                    std::span<const GroundTruth> ground_truth, int num_classes,
                    std::span<const double> thresholds, double stats_iou) {
  EvalReport report;
  report.thresholds.assign(thresholds.begin(), thresholds.end());
  report.map = MeanAp(detections, ground_truth, num_classes, thresholds);
  report.stats_iou = stats_iou;
  report.stats = ComputeDetectionStats(detections, ground_truth, stats_iou);
  report.num_detections = static_cast<int>(detections.size());
  return report;
}

std::string ReportToJson(const EvalReport& report) {
  json ap = json::array();
  for (Eigen::Index c = 0; c < report.map.ap.rows(); ++c) {
    json row = json::array();
    for (Eigen::Index j = 0; j < report.map.ap.cols(); ++j) {
      row.push_back(report.map.ap(c, j));
    }
    ap.push_back(row);
  }
  json out;
  out["iou_thresholds"] = report.thresholds;
  out["ap_per_class_per_iou"] = ap;
  out["map_per_iou"] = report.map.map;
  out["avg_map"] = report.map.avg_map;
  out["evaluated_classes"] = report.map.evaluated_classes;
  out["num_detections"] = report.num_detections;
  out["stats_iou"] = report.stats_iou;
  out["detection_stats"] = StatsJson(report.stats);
  return out.dump();
}

void WriteDetections(const std::filesystem::path& path,
                     std::span<const Detection> detections,
                     const std::string& run_config_json) {
  json preds = json::array();
  for (const Detection& d : detections) {
    preds.push_back({{"video_id", d.video_id},
                     {"start", d.start},
                     {"end", d.end},
                     {"class_id", d.class_id},
                     {"score", d.score}});
  }
  json out;
  out["run_config"] =
      run_config_json.empty() ? json::object() : json::parse(run_config_json);
  out["predictions"] = std::move(preds);
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw FormatError("cannot write " + path.string());
  file << out.dump(2) << "\n";
  if (!file) throw FormatError("failed writing " + path.string());
}

std::vector<Detection> ReadDetections(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw FormatError("cannot read " + path.string());
  try {
    const json doc = json::parse(file);
    const json& preds = doc.is_array() ? doc : doc.at("predictions");
    std::vector<Detection> out;
    for (const json& p : preds) {
      Detection d;
      d.video_id = p.at("video_id").get<std::string>();
      d.start = p.at("start").get<int>();
      d.end = p.at("end").get<int>();
      d.class_id = p.at("class_id").get<int>();
      d.score = p.at("score").get<double>();
      if (d.start > d.end) {
        throw FormatError("prediction with start > end in " + d.video_id);
      }
      out.push_back(std::move(d));
    }
    return out;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace ptal::eval
