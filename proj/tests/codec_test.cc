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

#include "lumiparam/codec.h"

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "lumiparam/error.h"
#include "test_util.h"

namespace lumiparam {
namespace {

using testing::MakeInModelPanorama;
using testing::RandomImage;

double Rms(const EquirectImage& img) {
  return std::sqrt(img.pixels().squaredNorm() / static_cast<double>(img.pixels().size()));
}

TEST(CodecConfig, Defaults) {
  const CodecConfig config;
  EXPECT_EQ(config.order, 2);
  EXPECT_EQ(config.anchors, 128);
  EXPECT_EQ(config.angular_size, 0.0025);
  EXPECT_EQ(config.percentile, 0.05);
  EXPECT_EQ(config.k_nn, 6);
  EXPECT_EQ(config.mode, Weighting::kSolidAngle);
  EXPECT_EQ(config.ambient, AmbientFit::kMaskedFit);
  EXPECT_FALSE(config.sparsify);
  EXPECT_NO_THROW(config.Validate());
}

TEST(CodecConfig, ValidateRejectsOutOfRange) {
  auto invalid = [](auto mutate) {
    CodecConfig config;
    mutate(config);
    EXPECT_THROW(config.Validate(), InvalidArgument);
  };
  invalid([](CodecConfig& c) { c.order = -1; });
  invalid([](CodecConfig& c) { c.order = 11; });
  invalid([](CodecConfig& c) { c.anchors = 0; });
  invalid([](CodecConfig& c) { c.k_nn = 128; });
  invalid([](CodecConfig& c) { c.k_nn = -1; });
  invalid([](CodecConfig& c) { c.angular_size = 0.0; });
  invalid([](CodecConfig& c) { c.angular_size = std::numeric_limits<double>::quiet_NaN(); });
  invalid([](CodecConfig& c) { c.percentile = 0.0; });
  invalid([](CodecConfig& c) { c.percentile = 1.0; });
  invalid([](CodecConfig& c) {
    c.k_nn = 0;
    c.sparsify = true;
  });
}

TEST(CodecConfig, NamesRoundTrip) {
  for (Weighting w : {Weighting::kSolidAngle, Weighting::kPaperLiteral}) {
    EXPECT_EQ(ParseWeighting(WeightingName(w)), w);
  }
  for (AmbientFit f : {AmbientFit::kMaskedFit, AmbientFit::kProjection}) {
    EXPECT_EQ(ParseAmbientFit(AmbientFitName(f)), f);
  }
  EXPECT_STREQ(WeightingName(Weighting::kPaperLiteral), "paper-literal");
  EXPECT_THROW(ParseWeighting("cosine"), InvalidArgument);
  EXPECT_THROW(ParseAmbientFit(""), InvalidArgument);
}

TEST(Decompose, DefaultBudget) {
  std::mt19937_64 rng(1);
  const EquirectImage pano = RandomImage(GridGeometry(256, 128), rng, 0.0, 2.0);
  const Decomposition d = Decompose(pano, CodecConfig{});
  EXPECT_EQ(d.params.sh.value_count(), 27);
  EXPECT_EQ(d.params.sg.n(), 128);
  EXPECT_EQ(d.params.k_nn, 6);
  EXPECT_EQ(d.params.sg.s, 0.0025);
  EXPECT_FALSE(d.params.sg.degenerate);
  EXPECT_NEAR(d.params.sg.p.sum(), 1.0, 1e-12);
  EXPECT_GE(d.params.sg.p.minCoeff(), 0.0);
  EXPECT_NEAR(d.params.sg.r.norm(), 1.0, 1e-12);
  EXPECT_GT(d.params.sg.e, 0.0);
  EXPECT_FALSE(d.sparsify_report.has_value());
  EXPECT_EQ(d.separation.mask.bits.count(), SourcePixelCount(256 * 128, 0.05));
}

TEST(Decompose, InModelPanoramaRoundTrips) {
  std::mt19937_64 rng(2);
  const GridGeometry geom(256, 128);
  const CodecConfig config;
  const AnchorSet anchors = VogelAnchors(config.anchors, config.k_nn);
  for (int trial = 0; trial < 3; ++trial) {
    const auto in_model = MakeInModelPanorama(geom, anchors, 1 + trial * 2, 0.05, rng);
    const Decomposition d = Decompose(in_model.pano, config);
    const EquirectImage rebuilt = Reconstruct(d.params, geom);
    const double rmse = std::sqrt((rebuilt.pixels() - in_model.pano.pixels()).squaredNorm() /
                                  static_cast<double>(rebuilt.pixels().size()));
    EXPECT_LT(rmse, 1e-2 * Rms(in_model.pano)) << trial;
    // The light-source distribution lands on the synthesized anchors.
    double on_sources = 0.0;
    for (int i = 0; i < anchors.count(); ++i) {
      if (in_model.sg.p[i] > 0.0) on_sources += d.params.sg.p[i];
    }
    EXPECT_GT(on_sources, 0.95) << trial;
    EXPECT_NEAR(d.params.sg.e, in_model.sg.e, 0.05 * in_model.sg.e) << trial;
    EXPECT_LT((d.params.sh.coeffs - in_model.sh.coeffs).cwiseAbs().maxCoeff(), 0.05) << trial;
  }
}

TEST(Decompose, ModesAndAmbientFitsProduceValidParams) {
  std::mt19937_64 rng(3);
  const EquirectImage pano = RandomImage(GridGeometry(128, 64), rng, 0.0, 3.0);
  CodecConfig config;
  config.anchors = 32;
  const Decomposition base = Decompose(pano, config);
  config.mode = Weighting::kPaperLiteral;
  const Decomposition literal = Decompose(pano, config);
  EXPECT_GT((literal.params.sh.coeffs - base.params.sh.coeffs).cwiseAbs().maxCoeff(), 1e-6);
  config.mode = Weighting::kSolidAngle;
  config.ambient = AmbientFit::kProjection;
  const Decomposition projected = Decompose(pano, config);
  EXPECT_GT((projected.params.sh.coeffs - base.params.sh.coeffs).cwiseAbs().maxCoeff(), 1e-6);
  for (const Decomposition* d : {&base, &literal, &projected}) {
    EXPECT_NEAR(d->params.sg.p.sum(), 1.0, 1e-12);
    EXPECT_TRUE(Reconstruct(d->params, pano.geometry()).IsRadiometric());
  }
}

TEST(Decompose, ProjectionAmbientSeesRawSourcePixels) {
  std::mt19937_64 rng(4);
  const EquirectImage pano = RandomImage(GridGeometry(64, 32), rng, 0.0, 3.0);
  CodecConfig config;
  config.anchors = 16;
  config.ambient = AmbientFit::kProjection;
  const Decomposition d = Decompose(pano, config);
  EXPECT_EQ(d.light_sources.pixels(), d.separation.sources.pixels());
}

TEST(Decompose, SparsifyRecordsReport) {
  std::mt19937_64 rng(5);
  const EquirectImage pano = RandomImage(GridGeometry(128, 64), rng, 0.0, 3.0);
  CodecConfig config;
  config.anchors = 64;
  config.sparsify = true;
  const Decomposition d = Decompose(pano, config);
  ASSERT_TRUE(d.sparsify_report.has_value());
  EXPECT_GE(d.sparsify_report->kappa, 1);
  EXPECT_LE(d.sparsify_report->kappa, 64);
  EXPECT_GE(d.params.sg.p.minCoeff(), 0.0);
  config.sparsify = false;
  MixLightParams manual = Decompose(pano, config).params;
  const CredibilityReport report = SparsifyParams(manual);
  EXPECT_EQ(manual.sg.p, d.params.sg.p);
  EXPECT_EQ(report.kappa, d.sparsify_report->kappa);
}

TEST(Decompose, ZeroPanoramaIsDegenerate) {
  const EquirectImage zero(GridGeometry(64, 32));
  CodecConfig config;
  config.anchors = 16;
  config.sparsify = true;
  const Decomposition d = Decompose(zero, config);
  EXPECT_TRUE(d.params.sg.degenerate);
  EXPECT_EQ(d.params.sg.e, 0.0);
  EXPECT_FALSE(d.sparsify_report.has_value());
  EXPECT_EQ(d.params.sh.coeffs.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(Reconstruct(d.params, zero.geometry()).pixels().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Decompose, RejectsInvalidPanoramas) {
  EquirectImage pano(GridGeometry(16, 8));
  pano.pixel(3, 3) = Eigen::RowVector3d(-1.0, 0.0, 0.0);
  EXPECT_THROW(Decompose(pano, CodecConfig{}), InvalidArgument);
  pano.pixel(3, 3) = Eigen::RowVector3d(std::numeric_limits<double>::infinity(), 0.0, 0.0);
  EXPECT_THROW(Decompose(pano, CodecConfig{}), InvalidArgument);
  CodecConfig bad;
  bad.order = 12;
  EXPECT_THROW(Decompose(EquirectImage(GridGeometry(16, 8)), bad), InvalidArgument);
}

TEST(Decompose, IsDeterministic) {
  std::mt19937_64 rng(6);
  const EquirectImage pano = RandomImage(GridGeometry(128, 64), rng, 0.0, 3.0);
  const CodecConfig config;
  const Decomposition a = Decompose(pano, config);
  const Decomposition b = Decompose(pano, config);
  EXPECT_EQ(a.params.sh, b.params.sh);
  EXPECT_EQ(a.params.sg, b.params.sg);
}

TEST(Reconstruct, IsNonnegativeAndSumsComponents) {
  std::mt19937_64 rng(7);
  const GridGeometry geom(64, 32);
  MixLightParams params;
  params.sh = testing::RandomSh(2, rng);
  params.sg = testing::RandomSgParams(16, rng, 0.025);
  params.k_nn = 4;
  const EquirectImage out = Reconstruct(params, geom);
  EXPECT_TRUE(out.IsRadiometric());
  const PixelMatrix expected =
      ReconstructSh(params.sh, geom, true).pixels() +
      ReconstructGaussianMap(params.sg, params.Anchors(), geom).pixels();
  EXPECT_LT((out.pixels() - expected).cwiseAbs().maxCoeff(), 1e-12);
}

}  // namespace
}  // namespace lumiparam
