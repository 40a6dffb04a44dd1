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

#ifndef LUMIPARAM_PARAM_FILE_H_
#define LUMIPARAM_PARAM_FILE_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "lumiparam/codec.h"
#include "lumiparam/evaluation.h"

namespace lumiparam {

inline constexpr int kParamFileVersion = 1;
inline constexpr const char* kAnchorGenerator = "vogel-v1";

// Provenance recorded next to the parameters.
struct ParamMeta {
  std::string source;
  int width = 0;
  int height = 0;
  Weighting mode = Weighting::kSolidAngle;
  AmbientFit ambient = AmbientFit::kMaskedFit;
  double percentile = kDefaultPercentile;
  bool sparsified = false;
  std::optional<int> kappa;
  std::optional<double> tau;
};

struct ParamFile {
  MixLightParams params;
  ParamMeta meta;
};

// JSON Schema (draft-07) documents describing the parameter file and the
// evaluation report.
const nlohmann::json& ParamFileSchema();
const nlohmann::json& ReportSchema();

// Checks `doc` against the subset of JSON Schema used by the embedded
// schemas (type, const, enum, required, properties, additionalProperties,
// items, minItems, maxItems, minimum, exclusiveMinimum, maximum). Throws
// ValidationError naming the JSON pointer of the first violation.
void ValidateAgainstSchema(const nlohmann::json& doc, const nlohmann::json& schema,
                           const std::string& path = "");

nlohmann::json ParamFileToJson(const ParamFile& file);
// Schema validation plus the cross-field rules: coefficient counts follow
// the order, the distribution length matches the anchors, and unless e = 0
// r is a unit vector and p sums to 1 (the sum is not checked for sparsified
// files).
ParamFile ParamFileFromJson(const nlohmann::json& doc);

std::string SerializeParamFile(const ParamFile& file);
ParamFile ParseParamFile(std::string_view text);
ParamFile ReadParamFile(const std::filesystem::path& path);
void WriteParamFile(const std::filesystem::path& path, const ParamFile& file);

struct ReportInputs {
  std::string pred;
  std::string gt;
};

nlohmann::json ReportToJson(const RoundTripReport& report, const ReportInputs& inputs);
// One "key value" line per metric.
std::string ReportToText(const RoundTripReport& report);

// Codec settings from a JSON or TOML file (by extension). Keys: order,
// anchors, angular_size, percentile, knn, mode, ambient, sparsify. Missing
// keys keep the values already in `config`.
void LoadCodecConfig(const std::filesystem::path& path, CodecConfig& config);

}  // namespace lumiparam

#endif  // LUMIPARAM_PARAM_FILE_H_
