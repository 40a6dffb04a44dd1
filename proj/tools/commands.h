// Copyright 2026 The Lumiparam Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LUMIPARAM_TOOLS_COMMANDS_H_
#define LUMIPARAM_TOOLS_COMMANDS_H_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lumiparam/codec.h"
#include "lumiparam/evaluation.h"

namespace lumiparam::cli {

// Exit statuses of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // I/O, format or validation failure
inline constexpr int kExitUsage = 2;

// Parses the arguments (argv[0] is the program name) and runs one verb.
int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Worker count: the flag when given, otherwise LUMIPARAM_JOBS, otherwise the
// hardware concurrency. Always at least 1.
int ResolveJobs(std::optional<int> flag);

// Replaces directories by the .hdr and .pfm files they contain (sorted by
// name, not recursive). Missing paths are reported in `errors`.
std::vector<std::filesystem::path> ExpandInputs(const std::vector<std::string>& args,
                                                std::vector<std::string>& errors);

// "<dir>/<stem>.mixlight.json" next to the input panorama.
std::filesystem::path DefaultParamPath(const std::filesystem::path& input);

// Overrides given on the command line; unset fields keep the config value.
struct ConfigFlags {
  std::string config_path;
  std::optional<std::string> mode;
  std::optional<std::string> ambient;
  std::optional<int> order;
  std::optional<int> anchors;
  std::optional<double> angular_size;
  std::optional<double> percentile;
  std::optional<int> knn;
  bool sparsify = false;
};

// Defaults, then the config file, then the flags.
CodecConfig BuildConfig(const ConfigFlags& flags);

}  // namespace lumiparam::cli

#endif  // LUMIPARAM_TOOLS_COMMANDS_H_
