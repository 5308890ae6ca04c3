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

// On-disk corpus layout:
//
//   DIR/manifest.json         video ids, split, T, D, C, generator config,
//                             segment and point-label records, run config
//   DIR/features-<id>.bin     T x D row-major little-endian float64
//
// Prototype vectors are not persisted; a corpus read back from disk has an
// empty `prototypes` matrix.

#ifndef PTAL_CORPUS_IO_H_
#define PTAL_CORPUS_IO_H_

#include <filesystem>
#include <string>

#include "ptal/datagen.h"
#include "ptal/tensor.h"

namespace ptal::data {

inline constexpr char kManifestName[] = "manifest.json";

// `run_config_json` (JSON object text, may be empty) is embedded verbatim
// under "run_config".
void WriteCorpus(const std::filesystem::path& dir, const Corpus& corpus,
                 const std::string& run_config_json = "");

// Throws FormatError when the manifest or a feature file is missing,
// malformed or has the wrong size.
Corpus ReadCorpus(const std::filesystem::path& dir);

void WriteFeatures(const std::filesystem::path& path, const Matrix& features);
Matrix ReadFeatures(const std::filesystem::path& path, int rows, int cols);

}  // namespace ptal::data

#endif  // PTAL_CORPUS_IO_H_
