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


#include "ptal/checkpoint.h"

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "gtest/gtest.h"
#include "ptal/error.h"
#include "ptal/localizer.h"
#include "ptal/mapper.h"
#include "ptal/model_io.h"

namespace ptal::nn {
namespace {

namespace fs = std::filesystem;

fs::path TempDir() {
  fs::path dir = fs::temp_directory_path() /
                 ("ptal_ckpt_" + std::to_string(::testing::UnitTest::GetInstance()
                                                    ->random_seed()) +
                  "_" + ::testing::UnitTest::GetInstance()
                            ->current_test_info()
                            ->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Little-endian byte builder for hand-made checkpoint files.
struct Bytes {
  std::string s;
  template <typename T>
  Bytes& Put(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      s.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
    }
    return *this;
  }
  Bytes& Str(const std::string& v) {
    Put<std::uint32_t>(static_cast<std::uint32_t>(v.size()));
    s += v;
    return *this;
  }
};

// One dense 3 -> 2 layer with `params` stored parameters.
std::string DenseFile(std::uint64_t params) {
  Bytes b;
  b.s = "PTALNET1";
  b.Put<std::uint32_t>(1).Str("net").Put<std::uint32_t>(1);
  b.Put<std::uint8_t>(0).Put<std::uint8_t>(0).Put<std::uint8_t>(1).Put<std::uint8_t>(0);
  b.Put<std::int32_t>(3).Put<std::int32_t>(2).Put<std::int32_t>(1);
  b.Put<std::uint64_t>(5).Put<std::uint64_t>(params);
  for (std::uint64_t i = 0; i < params; ++i) {
    b.Put<std::uint64_t>(std::bit_cast<std::uint64_t>(0.25 * static_cast<double>(i)));
  }
  b.Str("{}");
  return b.s;
}

TEST(CheckpointTest, HandWrittenFileDecodes) {
  const Checkpoint c = DecodeCheckpoint(DenseFile(8));
  ASSERT_EQ(c.networks.size(), 1u);
  const Network& net = c.Get("net");
  EXPECT_EQ(net.input_dim(), 3);
  EXPECT_EQ(net.output_dim(), 2);
  EXPECT_EQ(net.seed(), 5u);
  EXPECT_EQ(net.params()[7], 1.75);
  EXPECT_EQ(c.metadata, "{}");
}

TEST(CheckpointTest, RoundTripIsExact) {
  Network a({LayerSpec::Conv1d(4, 6, 3, Activation::kRelu),
             LayerSpec::MeanPool(6), LayerSpec::Dense(6, 3, Activation::kSoftmax)},
            42);
  a.mutable_params()[0] = 1.0 / 3.0;
  a.SetLayerTrainable(2, false);
  Network b({LayerSpec::Dense(2, 2, Activation::kSigmoid)}, 1);
  Checkpoint c;
  c.networks.emplace_back("a", a);
  c.networks.emplace_back("b", b);
  c.metadata = R"({"kind":"x"})";
  const fs::path path = TempDir() / "c.bin";
  SaveCheckpoint(path, c);
  const Checkpoint d = LoadCheckpoint(path);
  ASSERT_EQ(d.networks.size(), 2u);
  EXPECT_EQ(d.networks[0].first, "a");
  EXPECT_EQ(d.Get("a").layers(), a.layers());
  EXPECT_TRUE(std::equal(a.params().begin(), a.params().end(),
                         d.Get("a").params().begin()));
  EXPECT_EQ(d.Get("a").seed(), 42u);
  EXPECT_EQ(d.metadata, c.metadata);
  EXPECT_EQ(EncodeCheckpoint(d), EncodeCheckpoint(c));
  EXPECT_THROW(d.Get("missing"), FormatError);
}

TEST(CheckpointTest, RejectsBadInput) {
  std::string bad = DenseFile(8);
  bad[0] = 'X';
  EXPECT_THROW(DecodeCheckpoint(bad), FormatError);
  EXPECT_THROW(DecodeCheckpoint("PTAL"), FormatError);
  // Declared layer needs 8 parameters.
  EXPECT_THROW(DecodeCheckpoint(DenseFile(5)), FormatError);
  const std::string good = DenseFile(8);
  EXPECT_THROW(DecodeCheckpoint(good.substr(0, good.size() - 5)), FormatError);
  EXPECT_THROW(DecodeCheckpoint(good + "x"), FormatError);
  EXPECT_THROW(LoadCheckpoint("/nonexistent/ptal.bin"), FormatError);
}

TEST(ModelIoTest, TypedCheckpointsRoundTripAndCheckKind) {
  const fs::path dir = TempDir();
  Network det({LayerSpec::Conv1d(4, 3, 3, Activation::kSigmoid)}, 3);
  SaveDetector(dir / "kp.bin", det, R"({"seed":7})");
  EXPECT_EQ(LoadDetector(dir / "kp.bin").layers(), det.layers());

  Network map(mapper::MapperLayers(16, {.hidden = 8, .depth = 2}), 4);
  SaveMapper(dir / "map.bin", map);
  const Network loaded = LoadMapper(dir / "map.bin");
  EXPECT_TRUE(loaded.frozen());
  EXPECT_EQ(loaded.output_dim(), 16);
  EXPECT_THROW(LoadDetector(dir / "map.bin"), FormatError);
  EXPECT_THROW(LoadMapper(dir / "kp.bin"), FormatError);

  localizer::LocalizerModel model;
  model.predictor = Network(localizer::PredictorLayers(4, {}), 1);
  model.classifier = Network(localizer::ClassifierLayers(4, 3, {}), 2);
  model.ts = 16;
  model.num_classes = 3;
  model.use_center_offset = false;
  model.divisor = localizer::PoolDivisor::kMaskSum;
  SaveLocalizer(dir / "loc.bin", model);
  const localizer::LocalizerModel back = LoadLocalizer(dir / "loc.bin", loaded);
  EXPECT_EQ(back.ts, 16);
  EXPECT_EQ(back.num_classes, 3);
  EXPECT_FALSE(back.use_center_offset);
  EXPECT_EQ(back.divisor, localizer::PoolDivisor::kMaskSum);
  EXPECT_TRUE(back.mapper.frozen());

  Network other(mapper::MapperLayers(8, {.hidden = 8, .depth = 2}), 4);
  EXPECT_THROW(LoadLocalizer(dir / "loc.bin", other), DimensionError);
}

TEST(ModelIoTest, MetadataCarriesRunConfig) {
  const fs::path dir = TempDir();
  Network det({LayerSpec::Conv1d(4, 3, 3, Activation::kSigmoid)}, 3);
  SaveDetector(dir / "kp.bin", det, R"({"seed":11})");
  const Checkpoint c = LoadCheckpoint(dir / "kp.bin");
  EXPECT_NE(c.metadata.find(R"("run_config":{"seed":11})"), std::string::npos);
}

}  // namespace
}  // namespace ptal::nn
