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

// Typed checkpoints for the three trained artifacts. The metadata trailer is a
// JSON object {"kind": ..., <model fields>, "run_config": {...}}.

#ifndef PTAL_MODEL_IO_H_
#define PTAL_MODEL_IO_H_

#include <filesystem>
#include <string>

#include "ptal/localizer.h"
#include "ptal/network.h"

namespace ptal {

void SaveDetector(const std::filesystem::path& path,
                  const nn::Network& detector,
                  const std::string& run_config_json = "");
// Throws FormatError when the file is not a detector checkpoint.
nn::Network LoadDetector(const std::filesystem::path& path);

// The mapper checkpoint records T_s.
void SaveMapper(const std::filesystem::path& path, const nn::Network& mapper,
                const std::string& run_config_json = "");
nn::Network LoadMapper(const std::filesystem::path& path);

// Stores predictor and classifier plus the localizer options; the mapper is
// kept in its own file.
void SaveLocalizer(const std::filesystem::path& path,
                   const localizer::LocalizerModel& model,
                   const std::string& run_config_json = "");
// Attaches `mapper`; throws DimensionError when its T_s differs from the one
// the localizer was trained with.
localizer::LocalizerModel LoadLocalizer(const std::filesystem::path& path,
                                        const nn::Network& mapper);

}  // namespace ptal

#endif  // PTAL_MODEL_IO_H_
