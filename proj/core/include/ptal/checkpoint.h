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

// Binary model checkpoints.
//
// Layout (all integers and floats little-endian):
//
//   "PTALNET1"                          8-byte magic
//   u32 network_count
//   per network:
//     u32 name_len, name bytes
//     u32 layer_count
//     per layer: u8 kind, u8 activation, u8 trainable, u8 reserved,
//                i32 in_dim, i32 out_dim, i32 kernel
//     u64 seed
//     u64 param_count
//     param_count x f64
//   u32 metadata_len, metadata bytes    (JSON text: run config, T_s, ...)
//
// The loader rejects a wrong magic, a parameter count that disagrees with the
// layer specs, truncation, and trailing bytes.

#ifndef PTAL_CHECKPOINT_H_
#define PTAL_CHECKPOINT_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ptal/network.h"

namespace ptal::nn {

inline constexpr std::string_view kCheckpointMagic = "PTALNET1";

struct Checkpoint {
  std::vector<std::pair<std::string, Network>> networks;
  std::string metadata;

  // Throws FormatError when no network carries `name`.
  const Network& Get(std::string_view name) const;
};

std::string EncodeCheckpoint(const Checkpoint& checkpoint);
Checkpoint DecodeCheckpoint(std::string_view bytes);

void SaveCheckpoint(const std::filesystem::path& path,
                    const Checkpoint& checkpoint);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace ptal::nn

#endif  // PTAL_CHECKPOINT_H_
