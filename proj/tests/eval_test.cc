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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "json.hpp"
#include "oracles.h"
#include "ptal/error.h"

namespace ptal::eval {
namespace {

struct Instance {
  std::vector<Detection> dets;
  std::vector<GroundTruth> gts;
};

// Random detections and ground truths over a few short videos; scores are
// drawn from a small set so ties occur.
Instance RandomInstance(std::mt19937_64& rng, int num_dets, int num_gts,
                        int classes) {
  Instance inst;
  const char* videos[] = {"a", "b", "c"};
  auto interval = [&](int& s, int& e) {
    s = static_cast<int>(rng() % 40);
    e = s + static_cast<int>(rng() % 12);
  };
  for (int i = 0; i < num_gts; ++i) {
    GroundTruth g;
    g.video_id = videos[rng() % 3];
    interval(g.start, g.end);
    g.class_id = static_cast<int>(rng() % classes);
    inst.gts.push_back(g);
  }
  for (int i = 0; i < num_dets; ++i) {
    Detection d;
    if (!inst.gts.empty() && rng() % 3 != 0) {
      // Jitter a ground truth so true positives are common.
      const GroundTruth& g = inst.gts[rng() % inst.gts.size()];
      d.video_id = g.video_id;
      d.start = std::max(0, g.start + static_cast<int>(rng() % 5) - 2);
      d.end = std::max(d.start, g.end + static_cast<int>(rng() % 5) - 2);
      d.class_id = rng() % 4 == 0 ? static_cast<int>(rng() % classes) : g.class_id;
    } else {
      d.video_id = videos[rng() % 3];
      interval(d.start, d.end);
      d.class_id = static_cast<int>(rng() % classes);
    }
    d.score = static_cast<double>(rng() % 6) / 5.0;
    inst.dets.push_back(d);
  }
  return inst;
}

TEST(TemporalIouTest, Examples) {
  EXPECT_EQ(TemporalIoU(3, 9, 3, 9), 1.0);
  EXPECT_EQ(TemporalIoU(0, 4, 5, 9), 0.0);
  EXPECT_DOUBLE_EQ(TemporalIoU(0, 9, 5, 14), 5.0 / 15.0);
  EXPECT_DOUBLE_EQ(TemporalIoU(2, 2, 0, 3), 0.25);
}

TEST(TemporalIouTest, MatchesFrameCount) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    const int a0 = rng() % 50, a1 = a0 + rng() % 20;
    const int b0 = rng() % 50, b1 = b0 + rng() % 20;
    EXPECT_EQ(TemporalIoU(a0, a1, b0, b1), oracle::Iou(a0, a1, b0, b1));
    EXPECT_EQ(TemporalIoU(a0, a1, b0, b1), TemporalIoU(b0, b1, a0, a1));
  }
}

TEST(RankTest, ScoreThenStartThenVideo) {
  const std::vector<Detection> d = {
      {"b", 5, 9, 0, 0.5}, {"a", 5, 9, 0, 0.5}, {"a", 2, 9, 0, 0.5},
      {"z", 0, 1, 0, 0.9}};
  EXPECT_EQ(RankDetections(d), (std::vector<std::size_t>{3, 2, 1, 0}));
}

TEST(GreedyMatchTest, ClaimsHighestIouThenLowestIndex) {
  const std::vector<GroundTruth> g = {
      {"v", 0, 9, 0}, {"v", 2, 11, 0}, {"v", 0, 9, 0}};
  const std::vector<Detection> d = {{"v", 2, 11, 0, 0.9}, {"v", 0, 9, 0, 0.8},
                                    {"v", 0, 9, 0, 0.7}, {"v", 0, 9, 0, 0.6}};
  const Matching m = GreedyMatch(d, g, 0.5);
  EXPECT_EQ(m.matched_gt, (std::vector<int>{1, 0, 2, -1}));
}

TEST(GreedyMatchTest, InjectiveAndAgreesWithOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    const Instance inst = RandomInstance(rng, 1 + rng() % 10, 1 + rng() % 6, 2);
    const double thr = 0.1 * (1 + rng() % 7);
    const Matching m = GreedyMatch(inst.dets, inst.gts, thr);
    std::vector<int> seen;
    for (int g : m.matched_gt) {
      if (g < 0) continue;
      ASSERT_EQ(std::count(seen.begin(), seen.end(), g), 0);
      seen.push_back(g);
    }
    const oracle::RankedMatch ref = oracle::Match(inst.dets, inst.gts, thr);
    ASSERT_EQ(m.order.size(), ref.ranked.size());
    for (std::size_t k = 0; k < m.order.size(); ++k) {
      EXPECT_EQ(inst.dets[m.order[k]], ref.ranked[k]);
      EXPECT_EQ(m.matched_gt[k], ref.matched[k]);
    }
  }
}

TEST(AveragePrecisionTest, PerfectAndEmpty) {
  const std::vector<GroundTruth> g = {{"a", 0, 9, 1}, {"b", 5, 9, 1}};
  const std::vector<Detection> perfect = {{"a", 0, 9, 1, 0.3}, {"b", 5, 9, 1, 0.8}};
  EXPECT_EQ(AveragePrecision(perfect, g, 1, 0.5), 1.0);
  EXPECT_EQ(AveragePrecision({}, g, 1, 0.5), 0.0);
  bool no_gt = false;
  EXPECT_EQ(AveragePrecision(perfect, g, 0, 0.5, &no_gt), 0.0);
  EXPECT_TRUE(no_gt);
}

TEST(AveragePrecisionTest, HandComputedRanking) {
  // Ranks: TP, FP, TP with 3 gts -> 1/3 * 1 + 1/3 * 2/3.
  const std::vector<GroundTruth> g = {
      {"a", 0, 9, 0}, {"a", 20, 29, 0}, {"a", 40, 49, 0}};
  const std::vector<Detection> d = {
      {"a", 0, 9, 0, 0.9}, {"a", 60, 69, 0, 0.8}, {"a", 20, 29, 0, 0.7}};
  EXPECT_NEAR(AveragePrecision(d, g, 0, 0.5), 1.0 / 3 + 2.0 / 9, 1e-15);
}

TEST(AveragePrecisionTest, FiveDetectionsThreeGtMatchRankByRankOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const Instance inst = RandomInstance(rng, 5, 3, 1);
    const double thr = 0.1 * (1 + rng() % 7);
    EXPECT_NEAR(AveragePrecision(inst.dets, inst.gts, 0, thr),
                oracle::AveragePrecision(inst.dets, inst.gts, 0, thr), 1e-12);
  }
}

TEST(AveragePrecisionTest, InvariantUnderMonotoneScoreTransform) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    Instance inst = RandomInstance(rng, 8, 4, 2);
    const double before = AveragePrecision(inst.dets, inst.gts, 0, 0.3);
    for (Detection& d : inst.dets) d.score = 1.0 / (1.0 + std::exp(-3.0 * d.score + 1.0));
    EXPECT_EQ(AveragePrecision(inst.dets, inst.gts, 0, 0.3), before);
    EXPECT_GE(before, 0.0);
    EXPECT_LE(before, 1.0);
  }
}

TEST(MeanApTest, PerfectSingleClass) {
  const std::vector<GroundTruth> g = {{"a", 0, 9, 0}};
  const std::vector<Detection> d = {{"a", 0, 9, 0, 0.5}};
  const std::vector<double> thr = {0.1, 0.5, 0.7};
  const MeanApResult r = MeanAp(d, g, 1, thr);
  for (double m : r.map) EXPECT_EQ(m, 1.0);
  EXPECT_EQ(r.avg_map, 1.0);
}

TEST(MeanApTest, SingleThresholdEqualsAveragePrecision) {
  std::mt19937_64 rng(5);
  const Instance inst = RandomInstance(rng, 10, 5, 1);
  const std::vector<double> thr = {0.5};
  const MeanApResult r = MeanAp(inst.dets, inst.gts, 1, thr);
  EXPECT_EQ(r.map[0], AveragePrecision(inst.dets, inst.gts, 0, 0.5));
  EXPECT_EQ(r.avg_map, r.map[0]);
}

TEST(MeanApTest, MatchesOracleAndSkipsClassesWithoutGroundTruth) {
  std::mt19937_64 rng(6);
  const std::vector<double> thr = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  for (int trial = 0; trial < 100; ++trial) {
    Instance inst = RandomInstance(rng, 12, 6, 3);
    // Class 3 never has a ground truth but may be predicted.
    inst.dets.push_back({"a", 0, 5, 3, 0.99});
    const MeanApResult r = MeanAp(inst.dets, inst.gts, 4, thr);
    std::vector<int> with_gt;
    for (int c = 0; c < 4; ++c) {
      if (std::any_of(inst.gts.begin(), inst.gts.end(),
                      [c](const GroundTruth& g) { return g.class_id == c; })) {
        with_gt.push_back(c);
      }
    }
    EXPECT_EQ(r.evaluated_classes, with_gt);
    double avg = 0.0;
    for (std::size_t j = 0; j < thr.size(); ++j) {
      double sum = 0.0;
      for (int c : with_gt) {
        sum += oracle::AveragePrecision(inst.dets, inst.gts, c, thr[j]);
      }
      EXPECT_NEAR(r.map[j], sum / with_gt.size(), 1e-12);
      avg += r.map[j];
    }
    EXPECT_NEAR(r.avg_map, avg / thr.size(), 1e-12);
  }
}

TEST(MeanApTest, InvalidThresholdsThrow) {
  const std::vector<double> empty;
  EXPECT_THROW(MeanAp({}, {}, 1, empty), ConfigError);
  const std::vector<double> zero = {0.0};
  EXPECT_THROW(MeanAp({}, {}, 1, zero), ConfigError);
}

TEST(DetectionStatsTest, AllMatched) {
  const std::vector<GroundTruth> g = {{"a", 0, 9, 0}, {"a", 20, 29, 1}};
  const std::vector<Detection> d = {{"a", 0, 9, 0, 0.5}, {"a", 20, 29, 1, 0.4}};
  const DetectionStats s = ComputeDetectionStats(d, g, 0.5);
  EXPECT_EQ(s.false_alarm, 0.0);
  EXPECT_EQ(s.precision, 1.0);
  EXPECT_EQ(s.recall, 1.0);
  EXPECT_EQ(s.f_measure, 1.0);
}

TEST(DetectionStatsTest, AllWrongClass) {
  const std::vector<GroundTruth> g = {{"a", 0, 9, 0}};
  const std::vector<Detection> d = {{"a", 0, 9, 1, 0.5}, {"a", 0, 9, 2, 0.4}};
  const DetectionStats s = ComputeDetectionStats(d, g, 0.5);
  EXPECT_EQ(s.false_alarm, 1.0);
  EXPECT_EQ(s.precision, 0.0);
  EXPECT_EQ(s.recall, 0.0);
  EXPECT_EQ(s.f_measure, 0.0);
}

TEST(DetectionStatsTest, NoPredictionsFlagged) {
  const std::vector<GroundTruth> g = {{"a", 0, 9, 0}};
  const DetectionStats s = ComputeDetectionStats({}, g, 0.5);
  EXPECT_TRUE(s.no_predictions);
  EXPECT_EQ(s.precision, 0.0);
  EXPECT_EQ(s.false_alarm, 0.0);
}

TEST(DetectionStatsTest, IdentitiesOnFuzzedInstances) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const Instance inst = RandomInstance(rng, 1 + rng() % 15, rng() % 8, 3);
    const DetectionStats s = ComputeDetectionStats(inst.dets, inst.gts, 0.5);
    ASSERT_EQ(s.false_alarm + s.precision, 1.0);
    const double pr = s.precision + s.recall;
    const double f = pr > 0 ? 2 * s.precision * s.recall / pr : 0.0;
    ASSERT_NEAR(s.f_measure, f, 1e-12);
    for (double v : {s.false_alarm, s.precision, s.recall, s.f_measure}) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
  }
}

TEST(DetectionsFileTest, RoundTripAndBareArray) {
  const auto dir = std::filesystem::temp_directory_path() / "ptal_eval_io";
  std::filesystem::create_directories(dir);
  const std::vector<Detection> d = {{"a", 0, 9, 1, 0.125}, {"b", 3, 4, 0, 1.0 / 3}};
  WriteDetections(dir / "p.json", d, R"({"seed":1})");
  EXPECT_EQ(ReadDetections(dir / "p.json"), d);
  {
    std::ofstream out(dir / "bare.json");
    out << R"([{"video_id":"x","start":1,"end":2,"class_id":0,"score":0.5}])";
  }
  const auto bare = ReadDetections(dir / "bare.json");
  ASSERT_EQ(bare.size(), 1u);
  EXPECT_EQ(bare[0].video_id, "x");
  EXPECT_THROW(ReadDetections(dir / "missing.json"), FormatError);
  std::filesystem::remove_all(dir);
}

TEST(ReportTest, JsonHasAllFields) {
  const std::vector<GroundTruth> g = {{"a", 0, 9, 0}};
  const std::vector<Detection> d = {{"a", 0, 9, 0, 0.5}};
  const std::vector<double> thr = {0.3, 0.5};
  const auto j = nlohmann::json::parse(ReportToJson(Evaluate(d, g, 2, thr)));
  for (const char* key : {"iou_thresholds", "ap_per_class_per_iou", "map_per_iou",
                          "avg_map", "detection_stats"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["ap_per_class_per_iou"].size(), 2u);
  EXPECT_EQ(j["avg_map"].get<double>(), 1.0);
}

}  // namespace
}  // namespace ptal::eval
