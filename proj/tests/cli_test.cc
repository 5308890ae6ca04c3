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


#include "cli.h"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "json.hpp"
#include "ptal/checkpoint.h"

namespace ptal::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result Call(std::vector<std::string> args) {
  args.insert(args.begin(), "ptal");
  testing::internal::CaptureStdout();
  testing::internal::CaptureStderr();
  Result r;
  r.code = Run(args);
  r.out = testing::internal::GetCapturedStdout();
  r.err = testing::internal::GetCapturedStderr();
  return r;
}

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::set<std::string> Listing(const fs::path& dir) {
  std::set<std::string> names;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    names.insert(fs::relative(e.path(), dir).string());
  }
  return names;
}

class CliTest : public testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("ptal_cli_" +
             std::string(testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  std::vector<std::string> SmallData(const fs::path& out) const {
    return {"gen-data", "--out", out.string(), "--videos", "6",
            "--test-videos", "2", "--T", "128", "--D", "8", "--C", "2",
            "--instances-max", "2",
            "--quiet"};
  }

  fs::path root_;
};

TEST_F(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(Call({"--help"}).code, kExitOk);
  EXPECT_EQ(Call({"e2e", "--help"}).code, kExitOk);
  EXPECT_EQ(Call({"gen-data", "--out", "x", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(Call({}).code, kExitUsage);
  EXPECT_EQ(Call({"gen-data"}).code, kExitUsage);
}

TEST_F(CliTest, MissingInputIsDataError) {
  const std::string preds = (root_ / "nope.json").string();
  const Result r =
      Call({"eval", "--preds", preds, "--data", (root_ / "d").string()});
  EXPECT_EQ(r.code, kExitDataError);
  EXPECT_NE(r.err.find(preds), std::string::npos);
  EXPECT_TRUE(r.out.empty());
}

TEST_F(CliTest, InvalidConfigIsDataError) {
  const fs::path cfg = root_ / "cfg.json";
  std::ofstream(cfg) << R"({"no_such_key": 1})";
  const Result r = Call({"gen-data", "--out", (root_ / "d").string(),
                         "--config", cfg.string()});
  EXPECT_EQ(r.code, kExitDataError);
  EXPECT_NE(r.err.find("no_such_key"), std::string::npos);
  EXPECT_FALSE(fs::exists(root_ / "d"));
}

TEST_F(CliTest, FlagsOverrideConfigOverrideDefaults) {
  const fs::path cfg = root_ / "cfg.json";
  std::ofstream(cfg) << R"({"seed": 5, "data": {"C": 3, "D": 6}})";
  auto args = SmallData(root_ / "d");
  args.push_back("--config");
  args.push_back(cfg.string());
  ASSERT_EQ(Call(args).code, kExitOk);
  const json manifest = json::parse(ReadFile(root_ / "d" / "manifest.json"));
  const json& rc = manifest.at("run_config");
  EXPECT_EQ(rc.at("seed"), 5);               // config
  EXPECT_EQ(rc.at("data").at("C"), 2);       // flag beats config
  EXPECT_EQ(rc.at("data").at("D"), 8);       // flag beats config
  EXPECT_EQ(rc.at("data").at("T"), 128);     // flag
  EXPECT_EQ(rc.at("theta"), 0.15);           // default
  EXPECT_EQ(rc.at("paths").at("out"), (root_ / "d").string());
}

TEST_F(CliTest, GenDataIsDeterministic) {
  const fs::path out = root_ / "d";
  ASSERT_EQ(Call(SmallData(out)).code, kExitOk);
  fs::rename(out, root_ / "first");
  ASSERT_EQ(Call(SmallData(out)).code, kExitOk);
  const auto names = Listing(out);
  ASSERT_EQ(names, Listing(root_ / "first"));
  for (const std::string& n : names) {
    if (fs::is_regular_file(out / n)) {
      EXPECT_EQ(ReadFile(out / n), ReadFile(root_ / "first" / n)) << n;
    }
  }
  auto other = SmallData(root_ / "other");
  other.push_back("--seed");
  other.push_back("8");
  ASSERT_EQ(Call(other).code, kExitOk);
  EXPECT_NE(ReadFile(out / "features-video_0000.bin"),
            ReadFile(root_ / "other" / "features-video_0000.bin"));
}

TEST_F(CliTest, StagesChainAndRecordTheirConfig) {
  const fs::path work = root_ / "work";
  const std::string data = (work / "data").string();
  const std::string mapper = (work / "mapper.bin").string();
  const std::string det = (work / "kp.bin").string();
  const std::string loc = (work / "loc.bin").string();
  const std::string preds = (work / "preds.json").string();
  const std::string report = (work / "report.json").string();
  ASSERT_EQ(Call(SmallData(work / "data")).code, kExitOk);
  ASSERT_EQ(Call({"train-mapper", "--out", mapper, "--ts", "8", "--pairs",
                  "2000", "--mapper-max-epochs", "3", "--mapper-min-accuracy",
                  "0", "--quiet"})
                .code,
            kExitOk);
  ASSERT_EQ(Call({"train-keypoint", "--data", data, "--out", det, "--epochs",
                  "2", "--detector-hidden", "8", "--quiet"})
                .code,
            kExitOk);
  const Result kp = Call({"keypoints", "--data", data, "--model", det, "--out",
                          (work / "kp.json").string(), "--theta", "0.01",
                          "--quiet"});
  ASSERT_EQ(kp.code, kExitOk) << kp.err;
  const Result tl =
      Call({"train-localizer", "--data", data, "--keypoint-model", det,
            "--mapper", mapper, "--out", loc, "--epochs", "1", "--beta-preset",
            "gtea", "--quiet"});
  ASSERT_EQ(tl.code, kExitOk) << tl.err;
  const Result inf = Call({"infer", "--data", data, "--keypoint-model", det,
                           "--mapper", mapper, "--localizer", loc, "--out",
                           preds, "--theta", "0", "--quiet"});
  ASSERT_EQ(inf.code, kExitOk) << inf.err;
  const Result ev = Call({"eval", "--preds", preds, "--data", data,
                          "--report", report, "--ious", "0.3,0.5", "--quiet"});
  ASSERT_EQ(ev.code, kExitOk) << ev.err;

  const json rep = json::parse(ReadFile(report));
  EXPECT_EQ(rep.at("iou_thresholds").size(), 2u);
  EXPECT_EQ(json::parse(ev.out), rep);
  const json rc = json::parse(ReadFile(preds)).at("run_config");
  EXPECT_EQ(rc.at("theta"), 0.0);
  EXPECT_TRUE(json::parse(ReadFile(work / "kp.json")).contains("run_config"));
  for (const std::string& ckpt : {mapper, det, loc}) {
    const json meta = json::parse(nn::LoadCheckpoint(ckpt).metadata);
    EXPECT_TRUE(meta.contains("run_config")) << ckpt;
  }
  EXPECT_EQ(json::parse(nn::LoadCheckpoint(loc).metadata)
                .at("run_config")
                .at("beta"),
            2.0);

  // Mismatched T_s between the mapper and the localizer is rejected.
  const std::string mapper16 = (work / "mapper16.bin").string();
  ASSERT_EQ(Call({"train-mapper", "--out", mapper16, "--ts", "16", "--pairs",
                  "500", "--mapper-max-epochs", "1", "--mapper-min-accuracy",
                  "0", "--quiet"})
                .code,
            kExitOk);
  EXPECT_EQ(Call({"infer", "--data", data, "--keypoint-model", det, "--mapper",
                  mapper16, "--localizer", loc, "--out",
                  (work / "p2.json").string(), "--quiet"})
                .code,
            kExitDataError);

  // Nothing was written outside the work directory.
  EXPECT_EQ(Listing(root_).count("work"), 1u);
  for (const std::string& n : Listing(root_)) {
    EXPECT_EQ(n.rfind("work", 0), 0u) << n;
  }
}

}  // namespace
}  // namespace ptal::cli
