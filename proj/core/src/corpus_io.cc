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

#include "ptal/corpus_io.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "ptal/error.h"

namespace ptal::data {
namespace {

using nlohmann::json;

json ConfigToJson(const SyntheticConfig& cfg) {
  return json{
      {"num_videos", cfg.num_videos},
      {"num_test", cfg.num_test},
      {"T", cfg.frames},
      {"D", cfg.feature_dim},
      {"C", cfg.num_classes},
      {"instances_per_video",
       {cfg.instances_per_video.min, cfg.instances_per_video.max}},
      {"length_range", {cfg.length_range.min, cfg.length_range.max}},
      {"gap_min", cfg.gap_min},
      {"noise_sigma", cfg.noise_sigma},
      {"point_distribution", ToString(cfg.point_distribution)},
      {"seed", cfg.seed},
  };
}

SyntheticConfig ConfigFromJson(const json& j) {
  SyntheticConfig cfg;
  cfg.num_videos = j.at("num_videos").get<int>();
  cfg.num_test = j.at("num_test").get<int>();
  cfg.frames = j.at("T").get<int>();
  cfg.feature_dim = j.at("D").get<int>();
  cfg.num_classes = j.at("C").get<int>();
  cfg.instances_per_video = {j.at("instances_per_video").at(0).get<int>(),
                             j.at("instances_per_video").at(1).get<int>()};
  cfg.length_range = {j.at("length_range").at(0).get<int>(),
                      j.at("length_range").at(1).get<int>()};
  cfg.gap_min = j.at("gap_min").get<int>();
  cfg.noise_sigma = j.at("noise_sigma").get<double>();
  cfg.point_distribution =
      ParsePointDistribution(j.at("point_distribution").get<std::string>());
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

std::string FeatureFileName(const std::string& id) {
  return "features-" + id + ".bin";
}

}  // namespace

void WriteFeatures(const std::filesystem::path& path, const Matrix& features) {
  static_assert(std::endian::native == std::endian::little,
                "feature files are written as host-order little-endian");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(features.data()),
            static_cast<std::streamsize>(features.size() * sizeof(double)));
  if (!out) throw FormatError("failed writing " + path.string());
}

Matrix ReadFeatures(const std::filesystem::path& path, int rows, int cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  const std::size_t expected =
      static_cast<std::size_t>(rows) * cols * sizeof(double);
  if (bytes.size() != expected) {
    throw FormatError(path.string() + ": expected " + std::to_string(expected) +
                      " bytes, found " + std::to_string(bytes.size()));
  }
  Matrix features(rows, cols);
  std::memcpy(features.data(), bytes.data(), expected);
  return features;
}

void WriteCorpus(const std::filesystem::path& dir, const Corpus& corpus,
                 const std::string& run_config_json) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create " + dir.string() + ": " + ec.message());

  json manifest;
  manifest["format"] = "ptal-corpus-v1";
  manifest["T"] = corpus.frames;
  manifest["D"] = corpus.feature_dim;
  manifest["C"] = corpus.num_classes;
  manifest["config"] = ConfigToJson(corpus.config);
  manifest["run_config"] =
      run_config_json.empty() ? json::object() : json::parse(run_config_json);
  json videos = json::array();
  for (const Video& video : corpus.videos) {
    json segments = json::array();
    for (const Segment& s : video.segments) {
      segments.push_back(
          {{"start", s.start}, {"end", s.end}, {"class_id", s.class_id}});
    }
    json points = json::array();
    for (const PointLabel& p : video.points) {
      points.push_back({{"t", p.t}, {"class_id", p.class_id}});
    }
    const std::string file = FeatureFileName(video.id);
    videos.push_back({{"id", video.id},
                      {"split", ToString(video.split)},
                      {"features", file},
                      {"segments", segments},
                      {"points", points}});
    WriteFeatures(dir / file, video.features);
  }
  manifest["videos"] = videos;

  std::ofstream out(dir / kManifestName, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + (dir / kManifestName).string());
  out << manifest.dump(2) << "\n";
}

Corpus ReadCorpus(const std::filesystem::path& dir) {
  const auto manifest_path = dir / kManifestName;
  std::ifstream in(manifest_path);
  if (!in) throw FormatError("cannot read " + manifest_path.string());
  Corpus corpus;
  try {
    const json manifest = json::parse(in);
    corpus.frames = manifest.at("T").get<int>();
    corpus.feature_dim = manifest.at("D").get<int>();
    corpus.num_classes = manifest.at("C").get<int>();
    corpus.config = ConfigFromJson(manifest.at("config"));
    for (const json& jv : manifest.at("videos")) {
      Video video;
      video.id = jv.at("id").get<std::string>();
      video.split = ParseSplit(jv.at("split").get<std::string>());
      for (const json& js : jv.at("segments")) {
        video.segments.push_back({js.at("start").get<int>(),
                                  js.at("end").get<int>(),
                                  js.at("class_id").get<int>()});
      }
      for (const json& jp : jv.at("points")) {
        video.points.push_back(
            {jp.at("t").get<int>(), jp.at("class_id").get<int>()});
      }
      video.features =
          ReadFeatures(dir / jv.at("features").get<std::string>(),
                       corpus.frames, corpus.feature_dim);
      corpus.videos.push_back(std::move(video));
    }
  } catch (const json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  return corpus;
}

}  // namespace ptal::data
