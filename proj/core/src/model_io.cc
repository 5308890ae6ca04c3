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

#include "ptal/model_io.h"

#include "json.hpp"
#include "ptal/checkpoint.h"
#include "ptal/error.h"

namespace ptal {
namespace {

using json = nlohmann::ordered_json;

json Metadata(const std::string& kind, const std::string& run_config_json) {
  json meta;
  meta["kind"] = kind;
  meta["run_config"] =
      run_config_json.empty() ? json::object() : json::parse(run_config_json);
  return meta;
}

json ReadMetadata(const nn::Checkpoint& ckpt, const std::string& kind,
                  const std::filesystem::path& path) {
  json meta;
  try {
    meta = json::parse(ckpt.metadata);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": bad metadata: " + e.what());
  }
  if (!meta.is_object() || meta.value("kind", "") != kind) {
    throw FormatError(path.string() + " is not a " + kind + " checkpoint");
  }
  return meta;
}

template <typename T>
T MetaField(const json& meta, const char* key,
            const std::filesystem::path& path) {
  try {
    return meta.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(path.string() + ": metadata lacks '" + key + "'");
  }
}

}  // namespace

void SaveDetector(const std::filesystem::path& path,
                  const nn::Network& detector,
                  const std::string& run_config_json) {
  nn::Checkpoint ckpt;
  ckpt.networks.emplace_back("detector", detector);
  ckpt.metadata = Metadata("keypoint_detector", run_config_json).dump();
  nn::SaveCheckpoint(path, ckpt);
}

nn::Network LoadDetector(const std::filesystem::path& path) {
  const nn::Checkpoint ckpt = nn::LoadCheckpoint(path);
  ReadMetadata(ckpt, "keypoint_detector", path);
  return ckpt.Get("detector");
}

void SaveMapper(const std::filesystem::path& path, const nn::Network& mapper,
                const std::string& run_config_json) {
  nn::Checkpoint ckpt;
  ckpt.networks.emplace_back("mapper", mapper);
  json meta = Metadata("mapper", run_config_json);
  meta["T_s"] = mapper.output_dim();
  ckpt.metadata = meta.dump();
  nn::SaveCheckpoint(path, ckpt);
}

nn::Network LoadMapper(const std::filesystem::path& path) {
  const nn::Checkpoint ckpt = nn::LoadCheckpoint(path);
  const json meta = ReadMetadata(ckpt, "mapper", path);
  nn::Network mapper = ckpt.Get("mapper");
  if (MetaField<int>(meta, "T_s", path) != mapper.output_dim()) {
    throw FormatError(path.string() + ": T_s header disagrees with the network");
  }
  mapper.SetTrainable(false);
  return mapper;
}

void SaveLocalizer(const std::filesystem::path& path,
                   const localizer::LocalizerModel& model,
                   const std::string& run_config_json) {
  nn::Checkpoint ckpt;
  ckpt.networks.emplace_back("predictor", model.predictor);
  ckpt.networks.emplace_back("classifier", model.classifier);
  json meta = Metadata("localizer", run_config_json);
  meta["T_s"] = model.ts;
  meta["num_classes"] = model.num_classes;
  meta["use_center_offset"] = model.use_center_offset;
  meta["pool_divisor"] = localizer::ToString(model.divisor);
  ckpt.metadata = meta.dump();
  nn::SaveCheckpoint(path, ckpt);
}

localizer::LocalizerModel LoadLocalizer(const std::filesystem::path& path,
                                        const nn::Network& mapper) {
  const nn::Checkpoint ckpt = nn::LoadCheckpoint(path);
  const json meta = ReadMetadata(ckpt, "localizer", path);
  localizer::LocalizerModel model;
  model.predictor = ckpt.Get("predictor");
  model.classifier = ckpt.Get("classifier");
  model.ts = MetaField<int>(meta, "T_s", path);
  model.num_classes = MetaField<int>(meta, "num_classes", path);
  model.use_center_offset = MetaField<bool>(meta, "use_center_offset", path);
  try {
    model.divisor = localizer::ParsePoolDivisor(
        MetaField<std::string>(meta, "pool_divisor", path));
  } catch (const ConfigError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (mapper.output_dim() != model.ts) {
    throw DimensionError("mapper produces T_s=" +
                         std::to_string(mapper.output_dim()) +
                         " but the localizer was trained with T_s=" +
                         std::to_string(model.ts));
  }
  if (model.classifier.output_dim() != model.num_classes + 1) {
    throw FormatError(path.string() + ": classifier width disagrees with C");
  }
  model.mapper = mapper;
  model.mapper.SetTrainable(false);
  return model;
}

}  // namespace ptal
