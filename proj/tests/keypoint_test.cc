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


#include "ptal/keypoint.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "oracles.h"
#include "ptal/datagen.h"
#include "ptal/error.h"
#include "ptal/savgol.h"

namespace ptal::keypoint {
namespace {

using data::PointLabel;

Matrix RandomHeat(int frames, int classes, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(frames, classes);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

std::vector<PointLabel> RandomLabels(int frames, int classes, int n,
                                     std::mt19937_64& rng) {
  std::vector<PointLabel> labels;
  for (int i = 0; i < n; ++i) {
    labels.push_back({static_cast<int>(rng() % frames),
                      static_cast<int>(rng() % classes)});
  }
  return labels;
}

TEST(KeypointLossTest, PerfectDetectorIsNearZero) {
  Matrix heat = Matrix::Zero(20, 3);
  const std::vector<PointLabel> labels = {{3, 0}, {10, 2}};
  for (const auto& l : labels) heat(l.t, l.class_id) = 1.0;
  // Clamping leaves -ln(1 - 1e-7) per term.
  EXPECT_NEAR(KeypointLoss(heat, labels), -2.0 * std::log1p(-1e-7), 1e-15);
}

TEST(KeypointLossTest, UniformHalfIsTwoLn2) {
  const Matrix heat = Matrix::Constant(20, 3, 0.5);
  EXPECT_NEAR(KeypointLoss(heat, std::vector<PointLabel>{{3, 0}, {10, 2}}),
              2.0 * std::log(2.0), 1e-12);
}

TEST(KeypointLossTest, MatchesNaiveDoubleLoop) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int frames = 1 + static_cast<int>(rng() % 30);
    const int classes = 1 + static_cast<int>(rng() % 5);
    const Matrix heat = RandomHeat(frames, classes, rng);
    const auto labels = RandomLabels(frames, classes, 1 + rng() % 4, rng);
    EXPECT_NEAR(KeypointLoss(heat, labels), oracle::KeypointLoss(heat, labels),
                1e-12);
  }
}

TEST(KeypointLossTest, PermutationInvariant) {
  std::mt19937_64 rng(3);
  const Matrix heat = RandomHeat(40, 4, rng);
  auto labels = RandomLabels(40, 4, 6, rng);
  const double base = KeypointLoss(heat, labels);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(labels.begin(), labels.end(), rng);
    EXPECT_EQ(KeypointLoss(heat, labels), base);
  }
}

TEST(KeypointLossTest, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  Matrix heat = RandomHeat(12, 3, rng);
  const auto labels = RandomLabels(12, 3, 3, rng);
  Matrix grad;
  KeypointLossWithGrad(heat, labels, &grad);
  for (int i = 0; i < heat.size(); ++i) {
    const double fd = oracle::CentralDifference(
        [&] { return KeypointLoss(heat, labels); }, heat.data() + i, 1e-6);
    EXPECT_LE(oracle::RelativeError(grad.data()[i], fd), 1e-5);
  }
}

TEST(KeypointLossTest, InvalidLabelsThrow) {
  const Matrix heat = Matrix::Constant(5, 2, 0.5);
  EXPECT_THROW(KeypointLoss(heat, std::vector<PointLabel>{}), AnnotationError);
  EXPECT_THROW(KeypointLoss(heat, std::vector<PointLabel>{{5, 0}}),
               AnnotationError);
  EXPECT_THROW(KeypointLoss(heat, std::vector<PointLabel>{{0, 2}}),
               AnnotationError);
}

TEST(KeypointLossTest, ExtraEmptyClassesKeepOriginalTerms) {
  // Doubling C with empty classes: the detector's first C outputs are the
  // same network slice, so the loss restricted to those classes is equal.
  const data::Corpus corpus = data::GenerateDataset({.num_videos = 2,
                                                     .num_test = 0,
                                                     .frames = 64,
                                                     .feature_dim = 6,
                                                     .num_classes = 2,
                                                     .instances_per_video = {1, 2},
                                                     .length_range = {5, 10},
                                                     .gap_min = 4});
  const auto& video = corpus.videos[0];
  nn::Network small(DetectorLayers(6, 2, {.hidden = 8}), 3);
  nn::Network big(DetectorLayers(6, 4, {.hidden = 8}), 3);
  // Copy the shared slice: hidden layer identical, output columns 0..1.
  auto sp = small.mutable_params();
  auto bp = big.mutable_params();
  const std::size_t hidden = small.ParamOffset(1);
  std::copy(sp.begin(), sp.begin() + hidden, bp.begin());
  const int rows = 3 * 8;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < 2; ++c) {
      bp[hidden + r * 4 + c] = sp[hidden + r * 2 + c];
    }
  }
  const Matrix hs = small.Forward(video.features);
  const Matrix hb = big.Forward(video.features);
  EXPECT_LE((hb.leftCols(2) - hs).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(KeypointLoss(hb.leftCols(2), video.points),
              KeypointLoss(hs, video.points), 1e-9);
}

TEST(TrainKeypointTest, ZeroEpochsReturnsInitialNet) {
  const data::Corpus corpus = data::GenerateDataset({.num_videos = 3, .num_test = 1});
  const auto videos = corpus.SplitVideos(data::Split::kTrain);
  KeypointTrainConfig cfg;
  cfg.epochs = 0;
  cfg.seed = 9;
  const nn::Network net = TrainKeypointDetector(videos, 5, cfg);
  const nn::Network init(DetectorLayers(32, 5, {}), 9);
  EXPECT_TRUE(std::equal(net.params().begin(), net.params().end(),
                         init.params().begin()));
}

TEST(TrainKeypointTest, ZeroNoiseCorpusFindsHeldOutPoints) {
  data::SyntheticConfig cfg;
  cfg.noise_sigma = 0.0;
  const data::Corpus corpus = data::GenerateDataset(cfg);
  std::vector<double> losses;
  const nn::Network net = TrainKeypointDetector(
      corpus.SplitVideos(data::Split::kTrain), cfg.num_classes, {},
      [&](int, double loss) { losses.push_back(loss); });
  ASSERT_EQ(losses.size(), 50u);
  EXPECT_LT(losses.back(), losses.front());
  for (const data::Video* v : corpus.SplitVideos(data::Split::kTest)) {
    const Matrix heat = PredictHeatmap(net, v->features);
    EXPECT_GE(heat.minCoeff(), 0.0);
    EXPECT_LE(heat.maxCoeff(), 1.0);
    for (const PointLabel& p : v->points) {
      EXPECT_GT(heat(p.t, p.class_id), 0.15) << v->id << " t=" << p.t;
    }
  }
}

TEST(ExtractKeypointsTest, TriangularBump) {
  Matrix heat = Matrix::Zero(15, 2);
  for (int t = 0; t < 15; ++t) heat(t, 1) = std::max(0.0, 0.9 - 0.2 * std::abs(t - 7));
  const auto kps = ExtractKeypoints(heat, 0.15);
  ASSERT_EQ(kps.size(), 1u);
  EXPECT_EQ(kps[0].t, 7);
  EXPECT_EQ(kps[0].class_id, 1);
  EXPECT_DOUBLE_EQ(kps[0].prob, 0.9);
}

TEST(ExtractKeypointsTest, BelowThresholdIsEmpty) {
  Matrix heat = Matrix::Constant(10, 3, 0.15);
  heat(4, 1) = 0.1;
  EXPECT_TRUE(ExtractKeypoints(heat, 0.15).empty());
}

TEST(ExtractKeypointsTest, PlateauKeepsLeftmostFrame) {
  Matrix heat = Matrix::Zero(10, 1);
  for (int t = 3; t <= 6; ++t) heat(t, 0) = 0.8;
  const auto kps = ExtractKeypoints(heat, 0.15);
  ASSERT_EQ(kps.size(), 1u);
  EXPECT_EQ(kps[0].t, 3);
}

TEST(ExtractKeypointsTest, BoundaryFramesCompareToOneNeighbour) {
  Matrix heat(5, 1);
  heat << 0.9, 0.5, 0.2, 0.4, 0.6;
  const auto kps = ExtractKeypoints(heat, 0.15);
  ASSERT_EQ(kps.size(), 2u);
  EXPECT_EQ(kps[0].t, 0);
  EXPECT_EQ(kps[1].t, 4);
}

TEST(ExtractKeypointsTest, MatchesBruteForceScan) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const int frames = 1 + static_cast<int>(rng() % 40);
    Matrix heat = RandomHeat(frames, 1 + static_cast<int>(rng() % 4), rng);
    // Quantise so plateaus and ties occur.
    heat = (heat * 4.0).array().round() / 4.0;
    const double theta = (rng() % 4) * 0.25;
    const auto got = ExtractKeypoints(heat, theta);
    const auto want = oracle::Peaks(heat, theta);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].t, std::get<0>(want[i]));
      EXPECT_EQ(got[i].class_id, std::get<1>(want[i]));
      EXPECT_EQ(got[i].prob, std::get<2>(want[i]));
      if (i > 0) {
        EXPECT_GT(got[i].t, got[i - 1].t);
      }
    }
  }
}

TEST(ThetaPresetTest, Values) {
  EXPECT_EQ(ThetaPreset("thumos"), 0.15);
  EXPECT_EQ(ThetaPreset("beoid"), 0.01);
  EXPECT_EQ(ThetaPreset("gtea"), 0.0);
  EXPECT_THROW(ThetaPreset("kinetics"), ConfigError);
}

TEST(ResampleTest, SameLengthIsIdentity) {
  const Matrix m = Matrix::Random(16, 3);
  EXPECT_EQ(Resample(m, 16), m);
}

TEST(ResampleTest, ConstantStaysConstant) {
  const Matrix m = Matrix::Constant(7, 2, 0.3);
  const Matrix r = Resample(m, 20);
  EXPECT_LE((r.array() - 0.3).abs().maxCoeff(), 1e-15);
  const Matrix one = Resample(Matrix::Constant(1, 2, 0.7), 5);
  EXPECT_TRUE((one.array() == 0.7).all());
}

TEST(ResampleTest, LinearInputGivesClosedFormOutput) {
  const int span = 13, ts = 64;
  Matrix m(span, 2);
  for (int t = 0; t < span; ++t) {
    m(t, 0) = 2.0 + 0.5 * t;
    m(t, 1) = -1.0 * t;
  }
  const Matrix r = Resample(m, ts);
  for (int i = 0; i < ts; ++i) {
    const double pos = i * (span - 1.0) / (ts - 1.0);
    EXPECT_NEAR(r(i, 0), 2.0 + 0.5 * pos, 1e-12);
    EXPECT_NEAR(r(i, 1), -pos, 1e-12);
  }
}

TEST(ResampleTest, TooFewTargetFramesThrows) {
  EXPECT_THROW(Resample(Matrix::Zero(5, 1), 1), ConfigError);
}

TEST(SegmentVideoTest, SingleKeypointSpansWholeVideo) {
  const Matrix f = Matrix::Random(256, 4);
  const std::vector<Keypoint> kps = {{50, 1, 0.9}};
  const auto sv = SegmentVideo(f, kps, 64, "v");
  ASSERT_EQ(sv.size(), 1u);
  EXPECT_EQ(sv[0].orig_start, 0);
  EXPECT_EQ(sv[0].orig_end, 255);
  EXPECT_DOUBLE_EQ(sv[0].keypoint_pos, 50.0 / 255.0);
  EXPECT_EQ(sv[0].features.rows(), 64);
  EXPECT_EQ(sv[0].video_id, "v");
  EXPECT_EQ(sv[0].score, 0.9);
}

TEST(SegmentVideoTest, MiddleSpanFollowsNeighbours) {
  const Matrix f = Matrix::Random(100, 2);
  const std::vector<Keypoint> kps = {{10, 0, 0.5}, {50, 1, 0.6}, {90, 2, 0.7}};
  const auto sv = SegmentVideo(f, kps, 32);
  ASSERT_EQ(sv.size(), 3u);
  EXPECT_EQ(sv[1].orig_start, 11);
  EXPECT_EQ(sv[1].orig_end, 89);
  EXPECT_EQ(sv[0].orig_start, 0);
  EXPECT_EQ(sv[0].orig_end, 49);
  EXPECT_EQ(sv[2].orig_start, 51);
  EXPECT_EQ(sv[2].orig_end, 99);
  EXPECT_EQ(sv[1].features, Resample(f.middleRows(11, 79), 32));
}

TEST(SegmentVideoTest, CloseKeypointsMatchFormula) {
  const Matrix f = Matrix::Random(30, 2);
  const std::vector<Keypoint> kps = {{5, 0, 0.5}, {7, 0, 0.5}, {9, 0, 0.5},
                                     {10, 0, 0.5}, {20, 0, 0.5}};
  const auto sv = SegmentVideo(f, kps, 8);
  ASSERT_EQ(sv.size(), kps.size());
  for (std::size_t j = 0; j < kps.size(); ++j) {
    const int lo = j == 0 ? 0 : kps[j - 1].t + 1;
    const int hi = j + 1 == kps.size() ? 29 : kps[j + 1].t - 1;
    EXPECT_EQ(sv[j].orig_start, std::min(lo, kps[j].t));
    EXPECT_EQ(sv[j].orig_end, std::max(hi, kps[j].t));
    EXPECT_LE(sv[j].orig_start, kps[j].t);
    EXPECT_GE(sv[j].orig_end, kps[j].t);
    EXPECT_GE(sv[j].keypoint_pos, 0.0);
    EXPECT_LE(sv[j].keypoint_pos, 1.0);
  }
  // Keypoints 7 and 9 leave the single frame 8 between them.
  EXPECT_EQ(sv[1].orig_start, 6);
  EXPECT_EQ(sv[1].orig_end, 8);
  EXPECT_DOUBLE_EQ(sv[1].keypoint_pos, 0.5);
}

TEST(SegmentVideoTest, EmptyAndInvalidInput) {
  const Matrix f = Matrix::Random(30, 2);
  EXPECT_TRUE(SegmentVideo(f, {}, 8).empty());
  const std::vector<Keypoint> unsorted = {{9, 0, 0.5}, {3, 0, 0.5}};
  EXPECT_THROW(SegmentVideo(f, unsorted, 8), ConfigError);
  const std::vector<Keypoint> outside = {{30, 0, 0.5}};
  EXPECT_THROW(SegmentVideo(f, outside, 8), DimensionError);
}

}  // namespace
}  // namespace ptal::keypoint
