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

#include "lumiparam/param_file.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <sstream>
#include <type_traits>

#include <toml.hpp>

#include "lumiparam/error.h"
#include "lumiparam/image_io.h"

namespace lumiparam {

using nlohmann::json;

namespace {

constexpr const char* kParamSchemaText = R"json({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "lumiparam illumination parameters",
  "type": "object",
  "required": ["version", "sh", "sg", "anchors", "meta"],
  "additionalProperties": false,
  "properties": {
    "version": {"const": 1},
    "sh": {
      "type": "object",
      "required": ["order", "coeffs"],
      "additionalProperties": false,
      "properties": {
        "order": {"type": "integer", "minimum": 0, "maximum": 10},
        "coeffs": {
          "type": "array", "minItems": 3, "maxItems": 3,
          "items": {"type": "array", "minItems": 1, "items": {"type": "number"}}
        }
      }
    },
    "sg": {
      "type": "object",
      "required": ["n", "s", "p", "e", "r"],
      "additionalProperties": false,
      "properties": {
        "n": {"type": "integer", "minimum": 1},
        "s": {"type": "number", "exclusiveMinimum": 0},
        "p": {"type": "array", "minItems": 1, "items": {"type": "number", "minimum": 0}},
        "e": {"type": "number", "minimum": 0},
        "r": {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": "number"}}
      }
    },
    "anchors": {
      "type": "object",
      "required": ["n", "k_nn", "generator"],
      "additionalProperties": false,
      "properties": {
        "n": {"type": "integer", "minimum": 1},
        "k_nn": {"type": "integer", "minimum": 0},
        "generator": {"const": "vogel-v1"}
      }
    },
    "meta": {
      "type": "object",
      "required": ["source", "width", "height", "mode"],
      "properties": {
        "source": {"type": "string"},
        "width": {"type": "integer", "minimum": 0},
        "height": {"type": "integer", "minimum": 0},
        "mode": {"enum": ["solid-angle", "paper-literal"]},
        "ambient": {"enum": ["masked-fit", "project"]},
        "percentile": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "sparsified": {"type": "boolean"},
        "kappa": {"type": "integer", "minimum": 1},
        "tau": {"type": "number"}
      }
    }
  }
})json";

json BuildReportSchema() {
  json metrics = {{"type", "object"}, {"required", json::array()}, {"properties", json::object()},
                  {"additionalProperties", false}};
  for (const auto& [key, value] : ReportFields(RoundTripReport{})) {
    metrics["required"].push_back(key);
    metrics["properties"][key] = {{"type", "number"}, {"minimum", 0}};
  }
  metrics["properties"]["loss_sml"] = {{"type", "number"}, {"minimum", 0}};
  return {
      {"$schema", "http://json-schema.org/draft-07/schema#"},
      {"title", "lumiparam evaluation report"},
      {"type", "object"},
      {"required", {"version", "metrics", "flags", "inputs"}},
      {"additionalProperties", false},
      {"properties",
       {{"version", {{"const", 1}}},
        {"metrics", metrics},
        {"flags",
         {{"type", "object"},
          {"required", {"degenerate_pred", "degenerate_gt", "degenerate_full", "degenerate_diffuse",
                        "degenerate_mirror"}},
          {"additionalProperties", {{"type", "boolean"}}}}},
        {"inputs",
         {{"type", "object"},
          {"required", {"pred", "gt"}},
          {"properties", {{"pred", {{"type", "string"}}}, {"gt", {{"type", "string"}}}}}}}}},
  };
}

bool HasType(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "integer") return v.is_number_integer();
  if (type == "number") return v.is_number() && std::isfinite(v.get<double>());
  if (type == "null") return v.is_null();
  return false;
}

std::string Child(const std::string& path, const std::string& key) { return path + "/" + key; }

[[noreturn]] void Fail(const std::string& path, const std::string& what) {
  throw ValidationError(path.empty() ? "/" : path, what);
}

template <typename T>
T Get(const json& doc, const std::string& path) {
  if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
    if (!doc.is_number_integer()) Fail(path, "expected integer, got " + doc.dump());
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!doc.is_number()) Fail(path, "expected number, got " + doc.dump());
  }
  try {
    return doc.get<T>();
  } catch (const json::exception& e) {
    Fail(path, e.what());
  }
}

}  // namespace

void ValidateAgainstSchema(const json& doc, const json& schema, const std::string& path) {
  if (schema.contains("type") && !HasType(doc, schema["type"].get<std::string>())) {
    Fail(path, "expected " + schema["type"].get<std::string>() + ", got " + doc.dump());
  }
  if (schema.contains("const") && doc != schema["const"]) {
    Fail(path, "expected " + schema["const"].dump() + ", got " + doc.dump());
  }
  if (schema.contains("enum")) {
    const json& options = schema["enum"];
    if (std::find(options.begin(), options.end(), doc) == options.end()) {
      Fail(path, "value " + doc.dump() + " not in " + options.dump());
    }
  }
  if (doc.is_number()) {
    const double v = doc.get<double>();
    if (schema.contains("minimum") && !(v >= schema["minimum"].get<double>())) {
      Fail(path, "value below minimum " + schema["minimum"].dump());
    }
    if (schema.contains("exclusiveMinimum") && !(v > schema["exclusiveMinimum"].get<double>())) {
      Fail(path, "value must exceed " + schema["exclusiveMinimum"].dump());
    }
    if (schema.contains("maximum") && !(v <= schema["maximum"].get<double>())) {
      Fail(path, "value above maximum " + schema["maximum"].dump());
    }
  }
  if (doc.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema["required"]) {
        if (!doc.contains(key.get<std::string>())) {
          Fail(Child(path, key.get<std::string>()), "required field is missing");
        }
      }
    }
    const json* properties = schema.contains("properties") ? &schema["properties"] : nullptr;
    for (const auto& [key, value] : doc.items()) {
      if (properties != nullptr && properties->contains(key)) {
        ValidateAgainstSchema(value, (*properties)[key], Child(path, key));
      } else if (schema.contains("additionalProperties")) {
        const json& extra = schema["additionalProperties"];
        if (extra.is_boolean()) {
          if (!extra.get<bool>()) Fail(Child(path, key), "unexpected field");
        } else {
          ValidateAgainstSchema(value, extra, Child(path, key));
        }
      }
    }
  }
  if (doc.is_array()) {
    if (schema.contains("minItems") && doc.size() < schema["minItems"].get<std::size_t>()) {
      Fail(path, "expected at least " + schema["minItems"].dump() + " items");
    }
    if (schema.contains("maxItems") && doc.size() > schema["maxItems"].get<std::size_t>()) {
      Fail(path, "expected at most " + schema["maxItems"].dump() + " items");
    }
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < doc.size(); ++i) {
        ValidateAgainstSchema(doc[i], schema["items"], Child(path, std::to_string(i)));
      }
    }
  }
}

const json& ParamFileSchema() {
  static const json schema = json::parse(kParamSchemaText);
  return schema;
}

const json& ReportSchema() {
  static const json schema = BuildReportSchema();
  return schema;
}

json ParamFileToJson(const ParamFile& file) {
  const MixLightParams& p = file.params;
  json coeffs = json::array();
  for (int c = 0; c < 3; ++c) {
    json channel = json::array();
    for (Eigen::Index i = 0; i < p.sh.coeffs.rows(); ++i) channel.push_back(p.sh.coeffs(i, c));
    coeffs.push_back(std::move(channel));
  }
  json dist = json::array();
  for (Eigen::Index i = 0; i < p.sg.p.size(); ++i) dist.push_back(p.sg.p[i]);

  json meta = {
      {"source", file.meta.source},
      {"width", file.meta.width},
      {"height", file.meta.height},
      {"mode", WeightingName(file.meta.mode)},
      {"ambient", AmbientFitName(file.meta.ambient)},
      {"percentile", file.meta.percentile},
      {"sparsified", file.meta.sparsified},
  };
  if (file.meta.kappa) meta["kappa"] = *file.meta.kappa;
  if (file.meta.tau) meta["tau"] = *file.meta.tau;

  return {
      {"version", kParamFileVersion},
      {"sh", {{"order", p.sh.order}, {"coeffs", std::move(coeffs)}}},
      {"sg",
       {{"n", p.sg.n()},
        {"s", p.sg.s},
        {"p", std::move(dist)},
        {"e", p.sg.e},
        {"r", {p.sg.r.x(), p.sg.r.y(), p.sg.r.z()}}}},
      {"anchors", {{"n", p.anchor_count()}, {"k_nn", p.k_nn}, {"generator", kAnchorGenerator}}},
      {"meta", std::move(meta)},
  };
}

ParamFile ParamFileFromJson(const json& doc) {
  ValidateAgainstSchema(doc, ParamFileSchema());
  ParamFile file;
  MixLightParams& p = file.params;

  const int order = Get<int>(doc["sh"]["order"], "/sh/order");
  const int count = ShCoeffCount(order);
  ShMatrix coeffs(count, 3);
  for (int c = 0; c < 3; ++c) {
    const json& channel = doc["sh"]["coeffs"][c];
    const std::string path = "/sh/coeffs/" + std::to_string(c);
    if (static_cast<int>(channel.size()) != count) {
      Fail(path, "order " + std::to_string(order) + " needs " + std::to_string(count) +
                     " coefficients, got " + std::to_string(channel.size()));
    }
    for (int i = 0; i < count; ++i) coeffs(i, c) = channel[i].get<double>();
  }
  p.sh = ShCoeffs(order, std::move(coeffs));

  const json& sg = doc["sg"];
  const int n = Get<int>(sg["n"], "/sg/n");
  if (static_cast<int>(sg["p"].size()) != n) {
    Fail("/sg/p", "expected " + std::to_string(n) + " entries, got " + std::to_string(sg["p"].size()));
  }
  p.sg.p.resize(n);
  for (int i = 0; i < n; ++i) p.sg.p[i] = sg["p"][i].get<double>();
  p.sg.s = sg["s"].get<double>();
  p.sg.e = sg["e"].get<double>();
  for (int c = 0; c < 3; ++c) p.sg.r[c] = sg["r"][c].get<double>();

  const json& anchors = doc["anchors"];
  if (Get<int>(anchors["n"], "/anchors/n") != n) Fail("/anchors/n", "must equal /sg/n");
  p.k_nn = Get<int>(anchors["k_nn"], "/anchors/k_nn");
  if (p.k_nn >= n) Fail("/anchors/k_nn", "must be smaller than the anchor count");

  const json& meta = doc["meta"];
  file.meta.source = meta["source"].get<std::string>();
  file.meta.width = meta["width"].get<int>();
  file.meta.height = meta["height"].get<int>();
  file.meta.mode = ParseWeighting(meta["mode"].get<std::string>());
  if (meta.contains("ambient")) file.meta.ambient = ParseAmbientFit(meta["ambient"].get<std::string>());
  if (meta.contains("percentile")) file.meta.percentile = meta["percentile"].get<double>();
  if (meta.contains("sparsified")) file.meta.sparsified = meta["sparsified"].get<bool>();
  if (meta.contains("kappa")) file.meta.kappa = meta["kappa"].get<int>();
  if (meta.contains("tau")) file.meta.tau = meta["tau"].get<double>();

  // SLSparsemax subtracts one threshold from every entry, so a sparsified
  // distribution keeps its shape but not necessarily a unit sum.
  if (p.sg.e > 0.0) {
    if (!file.meta.sparsified && std::abs(p.sg.p.sum() - 1.0) > 1e-6) {
      Fail("/sg/p", "distribution must sum to 1");
    }
    if (std::abs(p.sg.r.norm() - 1.0) > 1e-6) Fail("/sg/r", "color ratios must have unit norm");
  } else {
    p.sg.degenerate = true;
  }
  return file;
}

std::string SerializeParamFile(const ParamFile& file) {
  return ParamFileToJson(file).dump(2) + "\n";
}

ParamFile ParseParamFile(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("/", std::string("malformed JSON: ") + e.what());
  }
  return ParamFileFromJson(doc);
}

ParamFile ReadParamFile(const std::filesystem::path& path) {
  const Bytes bytes = ReadFileBytes(path);
  return ParseParamFile(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void WriteParamFile(const std::filesystem::path& path, const ParamFile& file) {
  const std::string text = SerializeParamFile(file);
  WriteFileBytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

json ReportToJson(const RoundTripReport& report, const ReportInputs& inputs) {
  json metrics = json::object();
  for (const auto& [key, value] : ReportFields(report)) metrics[key] = value;
  return {
      {"version", 1},
      {"metrics", std::move(metrics)},
      {"flags",
       {{"degenerate_pred", report.degenerate_pred},
        {"degenerate_gt", report.degenerate_gt},
        {"degenerate_full", report.full.degenerate},
        {"degenerate_diffuse", report.diffuse.degenerate},
        {"degenerate_mirror", report.mirror.degenerate}}},
      {"inputs", {{"pred", inputs.pred}, {"gt", inputs.gt}}},
  };
}

std::string ReportToText(const RoundTripReport& report) {
  std::ostringstream out;
  out.precision(9);
  for (const auto& [key, value] : ReportFields(report)) out << key << ' ' << value << '\n';
  return out.str();
}

namespace {

bool IsConfigKey(std::string_view key) {
  static constexpr std::string_view kKeys[] = {"order",      "anchors", "angular_size", "percentile",
                                               "knn",        "mode",    "ambient",      "sparsify"};
  return std::find(std::begin(kKeys), std::end(kKeys), key) != std::end(kKeys);
}

// Integers are accepted where a real number is expected.
double TomlNumber(const toml::table& table, const char* key) {
  if (const auto v = table[key].value_exact<double>()) return *v;
  if (const auto v = table[key].value_exact<std::int64_t>()) return static_cast<double>(*v);
  throw ValidationError(std::string("/") + key, "wrong value type");
}

}  // namespace

void LoadCodecConfig(const std::filesystem::path& path, CodecConfig& config) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".toml") {
    toml::table table;
    try {
      table = toml::parse_file(path.string());
    } catch (const toml::parse_error& e) {
      throw ValidationError(path.string(), std::string("malformed TOML: ") + e.what());
    }
    for (const auto& [key, value] : table) {
      if (!IsConfigKey(key.str())) throw ValidationError("/" + std::string(key.str()), "unknown config key");
    }
    auto get = [&]<typename T>(const char* key, T& out) {
      if (!table.contains(key)) return;
      const auto v = table[key].value_exact<T>();
      if (!v) throw ValidationError(std::string("/") + key, "wrong value type");
      out = *v;
    };
    std::int64_t order = config.order, anchors = config.anchors, knn = config.k_nn;
    std::string mode = WeightingName(config.mode), ambient = AmbientFitName(config.ambient);
    get("order", order);
    get("anchors", anchors);
    get("knn", knn);
    if (table.contains("angular_size")) config.angular_size = TomlNumber(table, "angular_size");
    if (table.contains("percentile")) config.percentile = TomlNumber(table, "percentile");
    get("mode", mode);
    get("ambient", ambient);
    get("sparsify", config.sparsify);
    config.order = static_cast<int>(order);
    config.anchors = static_cast<int>(anchors);
    config.k_nn = static_cast<int>(knn);
    config.mode = ParseWeighting(mode);
    config.ambient = ParseAmbientFit(ambient);
  } else if (ext == ".json") {
    const Bytes bytes = ReadFileBytes(path);
    json doc;
    try {
      doc = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
      throw ValidationError(path.string(), std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("/", "config must be an object");
    for (const auto& [key, value] : doc.items()) {
      if (!IsConfigKey(key)) throw ValidationError("/" + key, "unknown config key");
    }
    if (doc.contains("order")) config.order = Get<int>(doc["order"], "/order");
    if (doc.contains("anchors")) config.anchors = Get<int>(doc["anchors"], "/anchors");
    if (doc.contains("angular_size")) config.angular_size = Get<double>(doc["angular_size"], "/angular_size");
    if (doc.contains("percentile")) config.percentile = Get<double>(doc["percentile"], "/percentile");
    if (doc.contains("knn")) config.k_nn = Get<int>(doc["knn"], "/knn");
    if (doc.contains("mode")) config.mode = ParseWeighting(Get<std::string>(doc["mode"], "/mode"));
    if (doc.contains("ambient")) config.ambient = ParseAmbientFit(Get<std::string>(doc["ambient"], "/ambient"));
    if (doc.contains("sparsify")) config.sparsify = Get<bool>(doc["sparsify"], "/sparsify");
  } else {
    throw InvalidArgument("config file must be .json or .toml, got '" + ext + "'");
  }
  config.Validate();
}

}  // namespace lumiparam
