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

// The `ptal` command-line workflow.

#ifndef PTAL_TOOLS_CLI_H_
#define PTAL_TOOLS_CLI_H_

#include <string>
#include <vector>

namespace ptal::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDataError = 2;

// Runs one invocation; args[0] is the program name. Results go to standard
// output, JSON-lines progress and errors to standard error.
int Run(const std::vector<std::string>& args);

}  // namespace ptal::cli

#endif  // PTAL_TOOLS_CLI_H_
