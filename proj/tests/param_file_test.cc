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
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "lumiparam/error.h"
#include "test_util.h"

namespace lumiparam {
namespace {

using nlohmann::json;
using testing::RandomImage;
using testing::TempDir;
using testing::Uniform;

// Bit pattern equality, so -0.0 and 0.0 are told apart.
bool SameBits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

ParamFile RandomParamFile(std::mt19937_64& rng, int order = 2, int n = 128) {
  ParamFile file;
  file.params.sh = testing::RandomSh(order, rng, -1e3, 1e3);
  file.params.sg = testing::RandomSgParams(n, rng);
  // Awkward magnitudes exercise the shortest round-trip formatting.
  file.params.sg.e = Uniform(rng, 0.0, 1.0) * std::pow(10.0, Uniform(rng, -300.0, 300.0));
  file.params.k_nn = std::min(6, n - 1);
  file.meta.source = "pano.hdr";
  file.meta.width = 256;
  file.meta.height = 128;
  return file;
}

void ExpectBitExact(const ParamFile& a, const ParamFile& b) {
  ASSERT_EQ(a.params.sh.order, b.params.sh.order);
  for (Eigen::Index i = 0; i < a.params.sh.coeffs.size(); ++i) {
    EXPECT_TRUE(SameBits(a.params.sh.coeffs.data()[i], b.params.sh.coeffs.data()[i])) << i;
  }
  ASSERT_EQ(a.params.sg.n(), b.params.sg.n());
  for (int i = 0; i < a.params.sg.n(); ++i) EXPECT_TRUE(SameBits(a.params.sg.p[i], b.params.sg.p[i]));
  for (int c = 0; c < 3; ++c) EXPECT_TRUE(SameBits(a.params.sg.r[c], b.params.sg.r[c]));
  EXPECT_TRUE(SameBits(a.params.sg.e, b.params.sg.e));
  EXPECT_TRUE(SameBits(a.params.sg.s, b.params.sg.s));
  EXPECT_EQ(a.params.k_nn, b.params.k_nn);
}

// Expects `doc` to fail validation at `path`.
void ExpectInvalidAt(const json& doc, const std::string& path) {
  try {
    ParamFileFromJson(doc);
    ADD_FAILURE() << "accepted a document invalid at " << path;
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.path(), path) << e.what();
  }
}

TEST(ParamFile, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const ParamFile file = RandomParamFile(rng, trial % 7, 1 + trial * 3);
    const ParamFile back = ParseParamFile(SerializeParamFile(file));
    ExpectBitExact(file, back);
    EXPECT_EQ(SerializeParamFile(back), SerializeParamFile(file));
  }
}

TEST(ParamFile, RoundTripThroughDiskKeepsMeta) {
  std::mt19937_64 rng(2);
  TempDir dir("param");
  ParamFile file = RandomParamFile(rng);
  file.meta.mode = Weighting::kPaperLiteral;
  file.meta.ambient = AmbientFit::kProjection;
  file.meta.percentile = 0.1;
  file.meta.sparsified = true;
  file.meta.kappa = 17;
  file.meta.tau = -0.0125;
  WriteParamFile(dir / "a.json", file);
  const ParamFile back = ReadParamFile(dir / "a.json");
  ExpectBitExact(file, back);
  EXPECT_EQ(back.meta.source, "pano.hdr");
  EXPECT_EQ(back.meta.width, 256);
  EXPECT_EQ(back.meta.height, 128);
  EXPECT_EQ(back.meta.mode, Weighting::kPaperLiteral);
  EXPECT_EQ(back.meta.ambient, AmbientFit::kProjection);
  EXPECT_EQ(back.meta.percentile, 0.1);
  EXPECT_TRUE(back.meta.sparsified);
  EXPECT_EQ(back.meta.kappa, 17);
  EXPECT_EQ(back.meta.tau, -0.0125);
}

TEST(ParamFile, DocumentLayout) {
  std::mt19937_64 rng(3);
  const json doc = ParamFileToJson(RandomParamFile(rng));
  EXPECT_EQ(doc["version"], 1);
  EXPECT_EQ(doc["sh"]["order"], 2);
  ASSERT_EQ(doc["sh"]["coeffs"].size(), 3u);
  for (const json& channel : doc["sh"]["coeffs"]) EXPECT_EQ(channel.size(), 9u);
  EXPECT_EQ(doc["sg"]["n"], 128);
  EXPECT_EQ(doc["sg"]["p"].size(), 128u);
  EXPECT_EQ(doc["sg"]["r"].size(), 3u);
  EXPECT_EQ(doc["anchors"]["generator"], "vogel-v1");
  EXPECT_EQ(doc["anchors"]["k_nn"], 6);
  EXPECT_EQ(doc["meta"]["mode"], "solid-angle");
  EXPECT_NO_THROW(ValidateAgainstSchema(doc, ParamFileSchema()));
}

TEST(ParamFile, DefaultDecompositionBudget) {
  std::mt19937_64 rng(4);
  const EquirectImage pano = RandomImage(GridGeometry(128, 64), rng, 0.0, 2.0);
  ParamFile file{Decompose(pano, CodecConfig{}).params, {}};
  const json doc = ParamFileToJson(file);
  ValidateAgainstSchema(doc, ParamFileSchema());
  std::size_t sh_values = 0;
  for (const json& channel : doc["sh"]["coeffs"]) sh_values += channel.size();
  EXPECT_EQ(sh_values, 27u);
  EXPECT_EQ(doc["sg"]["p"].size(), 128u);
  EXPECT_TRUE(doc["sg"]["e"].is_number());
  EXPECT_EQ(doc["sg"]["r"].size(), 3u);

  CodecConfig sixth;
  sixth.order = 6;
  file.params = Decompose(pano, sixth).params;
  const json sixth_doc = ParamFileToJson(file);
  ValidateAgainstSchema(sixth_doc, ParamFileSchema());
  sh_values = 0;
  for (const json& channel : sixth_doc["sh"]["coeffs"]) sh_values += channel.size();
  EXPECT_EQ(sh_values, 147u);
}

TEST(ParamFile, SchemaErrorsNameTheJsonPath) {
  std::mt19937_64 rng(5);
  const json good = ParamFileToJson(RandomParamFile(rng, 2, 8));
  ASSERT_NO_THROW(ParamFileFromJson(good));

  json doc = good;
  doc["version"] = 2;
  ExpectInvalidAt(doc, "/version");
  doc = good;
  doc.erase("sg");
  ExpectInvalidAt(doc, "/sg");
  doc = good;
  doc["extra"] = 1;
  ExpectInvalidAt(doc, "/extra");
  doc = good;
  doc["sh"]["order"] = "two";
  ExpectInvalidAt(doc, "/sh/order");
  doc = good;
  doc["sh"]["order"] = 2.5;
  ExpectInvalidAt(doc, "/sh/order");
  doc = good;
  doc["sh"]["coeffs"][1][4] = "x";
  ExpectInvalidAt(doc, "/sh/coeffs/1/4");
  doc = good;
  doc["sh"]["coeffs"].erase(2);
  ExpectInvalidAt(doc, "/sh/coeffs");
  doc = good;
  doc["sg"]["p"][3] = -0.5;
  ExpectInvalidAt(doc, "/sg/p/3");
  doc = good;
  doc["sg"]["s"] = 0.0;
  ExpectInvalidAt(doc, "/sg/s");
  doc = good;
  doc["sg"]["e"] = nullptr;  // how a non-finite value would serialize
  ExpectInvalidAt(doc, "/sg/e");
  doc = good;
  doc["sg"]["r"].push_back(0.0);
  ExpectInvalidAt(doc, "/sg/r");
  doc = good;
  doc["anchors"]["generator"] = "fibonacci";
  ExpectInvalidAt(doc, "/anchors/generator");
  doc = good;
  doc["meta"]["mode"] = "cosine";
  ExpectInvalidAt(doc, "/meta/mode");
  doc = good;
  doc["meta"].erase("width");
  ExpectInvalidAt(doc, "/meta/width");
}

TEST(ParamFile, CrossFieldRules) {
  std::mt19937_64 rng(6);
  const json good = ParamFileToJson(RandomParamFile(rng, 2, 8));

  json doc = good;
  doc["sh"]["order"] = 3;
  ExpectInvalidAt(doc, "/sh/coeffs/0");
  doc = good;
  doc["sg"]["n"] = 9;
  ExpectInvalidAt(doc, "/sg/p");
  doc = good;
  doc["anchors"]["n"] = 9;
  ExpectInvalidAt(doc, "/anchors/n");
  doc = good;
  doc["anchors"]["k_nn"] = 8;
  ExpectInvalidAt(doc, "/anchors/k_nn");
  doc = good;
  doc["sg"]["p"][0] = doc["sg"]["p"][0].get<double>() + 0.1;
  ExpectInvalidAt(doc, "/sg/p");
  doc["meta"]["sparsified"] = true;
  EXPECT_NO_THROW(ParamFileFromJson(doc));
  doc = good;
  doc["sg"]["r"] = {1.0, 1.0, 1.0};
  ExpectInvalidAt(doc, "/sg/r");

  // Zero intensity marks a degenerate light-source set; p and r are free.
  doc = good;
  doc["sg"]["e"] = 0.0;
  doc["sg"]["p"] = json::array({0, 0, 0, 0, 0, 0, 0, 0});
  doc["sg"]["r"] = {0.0, 0.0, 0.0};
  const ParamFile zero = ParamFileFromJson(doc);
  EXPECT_TRUE(zero.params.sg.degenerate);
}

TEST(ParamFile, MalformedTextIsAValidationError) {
  try {
    ParseParamFile("{\"version\": 1,");
    ADD_FAILURE();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.path(), "/");
  }
  EXPECT_THROW(ParseParamFile("[]"), ValidationError);
  EXPECT_THROW(ReadParamFile("/nonexistent/params.json"), Error);
}

TEST(Report, JsonValidatesAgainstSchema) {
  std::mt19937_64 rng(7);
  const EquirectImage pano = RandomImage(GridGeometry(64, 32), rng, 0.0, 2.0);
  CodecConfig config;
  config.anchors = 16;
  EvalOptions options;
  options.sml = true;
  for (bool sml : {false, true}) {
    options.sml = sml;
    const RoundTripReport report = RoundTrip(pano, config, options);
    const json doc = ReportToJson(report, {"a.json", "b.hdr"});
    EXPECT_NO_THROW(ValidateAgainstSchema(doc, ReportSchema()));
    EXPECT_EQ(doc["metrics"].contains("loss_sml"), sml);
    EXPECT_EQ(doc["inputs"]["gt"], "b.hdr");
  }
  json doc = ReportToJson(RoundTripReport{}, {"a", "b"});
  doc["metrics"]["rmse_full"] = -1.0;
  EXPECT_THROW(ValidateAgainstSchema(doc, ReportSchema()), ValidationError);
  doc = ReportToJson(RoundTripReport{}, {"a", "b"});
  doc["metrics"].erase("si_rmse_mirror");
  EXPECT_THROW(ValidateAgainstSchema(doc, ReportSchema()), ValidationError);
  doc = ReportToJson(RoundTripReport{}, {"a", "b"});
  doc["flags"]["degenerate_gt"] = 1;
  EXPECT_THROW(ValidateAgainstSchema(doc, ReportSchema()), ValidationError);
}

TEST(Report, TextHasOneLinePerMetric) {
  RoundTripReport report;
  report.full.rmse = 0.125;
  const std::string text = ReportToText(report);
  EXPECT_EQ(text.rfind("rmse_full 0.125\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')),
            ReportFields(report).size());
}

TEST(Config, LoadsTomlAndJson) {
  TempDir dir("config");
  {
    std::ofstream(dir / "c.toml") << "order = 3\nanchors = 64\nangular_size = 0.025\n"
                                     "percentile = 0.1\nknn = 4\nmode = \"paper-literal\"\n"
                                     "ambient = \"project\"\nsparsify = true\n";
    std::ofstream(dir / "c.json") << R"({"order": 3, "anchors": 64, "angular_size": 0.025,
        "percentile": 0.1, "knn": 4, "mode": "paper-literal", "ambient": "project",
        "sparsify": true})";
  }
  for (const char* name : {"c.toml", "c.json"}) {
    CodecConfig config;
    LoadCodecConfig(dir / name, config);
    EXPECT_EQ(config.order, 3) << name;
    EXPECT_EQ(config.anchors, 64);
    EXPECT_EQ(config.angular_size, 0.025);
    EXPECT_EQ(config.percentile, 0.1);
    EXPECT_EQ(config.k_nn, 4);
    EXPECT_EQ(config.mode, Weighting::kPaperLiteral);
    EXPECT_EQ(config.ambient, AmbientFit::kProjection);
    EXPECT_TRUE(config.sparsify);
  }
}

TEST(Config, PartialFilesKeepOtherValues) {
  TempDir dir("config");
  std::ofstream(dir / "c.toml") << "angular_size = 1\n";
  CodecConfig config;
  config.order = 4;
  LoadCodecConfig(dir / "c.toml", config);
  EXPECT_EQ(config.angular_size, 1.0);
  EXPECT_EQ(config.order, 4);
  EXPECT_EQ(config.anchors, 128);
}

TEST(Config, RejectsBadFiles) {
  TempDir dir("config");
  auto rejects = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    CodecConfig config;
    EXPECT_THROW(LoadCodecConfig(dir / name, config), Error) << name << ": " << text;
  };
  rejects("a.toml", "orders = 3\n");
  rejects("b.toml", "order = 2.5\n");
  rejects("c.toml", "order = \"two\"\n");
  rejects("d.toml", "order = [\n");
  rejects("e.toml", "knn = 200\n");
  rejects("f.json", R"({"order": 2.5})");
  rejects("g.json", R"({"mode": "cosine"})");
  rejects("h.json", R"({"sparsify": 1})");
  rejects("i.json", R"({"unknown": 1})");
  rejects("j.json", "[1, 2]");
  rejects("k.yaml", "order: 2\n");
}

}  // namespace
}  // namespace lumiparam
