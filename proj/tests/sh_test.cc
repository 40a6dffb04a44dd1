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

#include "lumiparam/sh.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lumiparam/error.h"
#include "test_util.h"

namespace lumiparam {
namespace {

using testing::RandomSh;
using testing::Uniform;

// Closed-form real SH through band 2 (Cartesian polynomials).
Eigen::VectorXd ClosedFormBand2(const Eigen::Vector3d& d) {
  const double x = d.x(), y = d.y(), z = d.z();
  const double c1 = std::sqrt(3.0 / (4.0 * M_PI));
  const double c2 = 0.5 * std::sqrt(15.0 / M_PI);
  Eigen::VectorXd out(9);
  out << 0.5 / std::sqrt(M_PI), c1 * y, c1 * z, c1 * x, c2 * x * y, c2 * y * z,
      0.25 * std::sqrt(5.0 / M_PI) * (3 * z * z - 1), c2 * x * z, 0.5 * c2 * (x * x - y * y);
  return out;
}

Eigen::Vector3d RandomDir(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Eigen::Vector3d(n(rng), n(rng), n(rng)).normalized();
}

TEST(ShBasis, ClosedFormValues) {
  const Eigen::Vector3d up = Eigen::Vector3d::UnitZ();
  EXPECT_NEAR(EvalShBasis(0, 0, Eigen::Vector3d(0.6, 0.0, 0.8)), 0.2820947918, 1e-10);
  EXPECT_NEAR(EvalShBasis(1, 0, up), 0.4886025119, 1e-10);
  EXPECT_NEAR(EvalShBasis(2, 0, up), 0.6307831305, 1e-10);
}

TEST(ShBasis, MatchesCartesianPolynomials) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d d = RandomDir(rng);
    const Eigen::VectorXd b = ShBasis<double>(2, d);
    EXPECT_LT((b - ClosedFormBand2(d)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ShBasis, BandThreeSpotValues) {
  // Y_3^0 = (1/4) sqrt(7/pi) (5z^3 - 3z), Y_3^3 = (1/4) sqrt(35/(2pi)) (x^3 - 3xy^2).
  std::mt19937_64 rng(22);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d d = RandomDir(rng);
    const double x = d.x(), y = d.y(), z = d.z();
    EXPECT_NEAR(EvalShBasis(3, 0, d), 0.25 * std::sqrt(7.0 / M_PI) * (5 * z * z * z - 3 * z), 1e-12);
    EXPECT_NEAR(EvalShBasis(3, 3, d), 0.25 * std::sqrt(35.0 / (2 * M_PI)) * (x * x * x - 3 * x * y * y),
                1e-12);
    EXPECT_NEAR(EvalShBasis(3, -3, d), 0.25 * std::sqrt(35.0 / (2 * M_PI)) * (3 * x * x * y - y * y * y),
                1e-12);
  }
}

TEST(ShBasis, ScalarTemplate) {
  const Eigen::Vector3d d = Eigen::Vector3d(0.3, -0.5, 0.7).normalized();
  const Eigen::VectorXd b = ShBasis<double>(4, d);
  const VectorX<float> bf = ShBasis<float>(4, d.cast<float>());
  EXPECT_LT((bf.cast<double>() - b).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(ShBasis, InvalidIndexThrows) {
  const Eigen::Vector3d d = Eigen::Vector3d::UnitX();
  EXPECT_THROW(EvalShBasis(1, 2, d), InvalidArgument);
  EXPECT_THROW(EvalShBasis(2, -3, d), InvalidArgument);
  EXPECT_THROW(EvalShBasis(-1, 0, d), InvalidArgument);
}

TEST(ShCoeffs, SizesAndValidation) {
  EXPECT_EQ(ShCoeffCount(2) * 3, 27);
  EXPECT_EQ(ShCoeffCount(6) * 3, 147);
  EXPECT_EQ(ShIndex(2, -1), 5);
  EXPECT_EQ(ShCoeffs::Zero(2).value_count(), 27);
  EXPECT_THROW(ShCoeffs(2, ShMatrix::Zero(8, 3)), InvalidArgument);
  ShMatrix bad = ShMatrix::Zero(4, 3);
  bad(1, 1) = std::nan("");
  EXPECT_THROW(ShCoeffs(1, bad), InvalidArgument);
}

TEST(ShCoeffs, WithOrderTruncatesAndPads) {
  std::mt19937_64 rng(1);
  const ShCoeffs c = RandomSh(3, rng);
  const ShCoeffs low = c.WithOrder(1);
  EXPECT_TRUE(low.coeffs == c.coeffs.topRows(4));
  const ShCoeffs high = c.WithOrder(4);
  EXPECT_TRUE(high.coeffs.topRows(16) == c.coeffs);
  EXPECT_TRUE(high.coeffs.bottomRows(9).isZero(0));
}

TEST(ProjectSh, ConstantImage) {
  const GridGeometry geom(512, 256);
  const EquirectImage img(geom, PixelMatrix::Ones(geom.pixel_count(), 3));
  const ShCoeffs c = ProjectSh(img, 2);
  for (int ch = 0; ch < 3; ++ch) {
    EXPECT_NEAR(c.coeffs(0, ch), 2.0 * std::sqrt(M_PI), 1e-4);
    EXPECT_LT(c.coeffs.col(ch).tail(8).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(ProjectSh, SingleBasisFunction) {
  const GridGeometry geom(512, 256);
  EquirectImage img(geom);
  const DirectionList dirs = PixelDirections(geom);
  for (int i = 0; i < geom.pixel_count(); ++i) {
    img.pixels().row(i).setConstant(EvalShBasis<double>(1, 0, dirs.row(i).transpose()));
  }
  const ShCoeffs c = ProjectSh(img, 2);
  for (int i = 0; i < 9; ++i) {
    for (int ch = 0; ch < 3; ++ch) EXPECT_NEAR(c.coeffs(i, ch), i == ShIndex(1, 0) ? 1.0 : 0.0, 1e-3);
  }
}

TEST(ProjectSh, RoundTripsRandomCoefficients) {
  const GridGeometry geom(512, 256);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const ShCoeffs c = RandomSh(2, rng);
    const ShCoeffs back = ProjectSh(ReconstructSh(c, geom), 2);
    EXPECT_LT((back.coeffs - c.coeffs).cwiseAbs().maxCoeff(), 1e-3);
  }
}

TEST(ProjectSh, IsLinear) {
  const GridGeometry geom(64, 32);
  std::mt19937_64 rng(3);
  const EquirectImage x = testing::RandomImage(geom, rng, 0.0, 5.0);
  const EquirectImage y = testing::RandomImage(geom, rng, 0.0, 5.0);
  const double a = 1.7, b = -0.4;
  for (Weighting mode : {Weighting::kSolidAngle, Weighting::kPaperLiteral}) {
    const ShCoeffs lhs = ProjectSh(EquirectImage(geom, a * x.pixels() + b * y.pixels()), 3, mode);
    const ShMatrix rhs = a * ProjectSh(x, 3, mode).coeffs + b * ProjectSh(y, 3, mode).coeffs;
    EXPECT_LT((lhs.coeffs - rhs).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ProjectSh, PaperLiteralUsesUniformPixelWeights) {
  const GridGeometry geom(16, 8);
  std::mt19937_64 rng(4);
  const EquirectImage img = testing::RandomImage(geom, rng, 0.0, 1.0);
  const ShCoeffs c = ProjectSh(img, 2, Weighting::kPaperLiteral);
  const DirectionList dirs = PixelDirections(geom);
  ShMatrix expected = ShMatrix::Zero(9, 3);
  for (int i = 0; i < geom.pixel_count(); ++i) {
    const Eigen::VectorXd b = ShBasis<double>(2, dirs.row(i).transpose());
    expected += b * img.pixels().row(i);
  }
  expected *= 4.0 * M_PI / geom.pixel_count();
  EXPECT_LT((c.coeffs - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT((ProjectSh(img, 2).coeffs - expected).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(ReconstructSh, SimpleCases) {
  const GridGeometry geom(32, 16);
  EXPECT_TRUE(ReconstructSh(ShCoeffs::Zero(2), geom).pixels().isZero(0));
  ShCoeffs dc = ShCoeffs::Zero(2);
  dc.coeffs.row(0).setConstant(2.0 * std::sqrt(M_PI));
  EXPECT_LT((ReconstructSh(dc, geom).pixels().array() - 1.0).abs().maxCoeff(), 1e-14);
}

TEST(ReconstructSh, ClampIsExplicit) {
  const GridGeometry geom(32, 16);
  ShCoeffs c = ShCoeffs::Zero(1);
  c.coeffs(ShIndex(1, 0), 0) = 1.0;  // positive above the equator, negative below
  EXPECT_LT(ReconstructSh(c, geom).pixels().minCoeff(), 0.0);
  const EquirectImage clamped = ReconstructSh(c, geom, true);
  EXPECT_GE(clamped.pixels().minCoeff(), 0.0);
  EXPECT_TRUE(clamped.IsRadiometric());
}

TEST(RenderIrradiance, UniformEnvironment) {
  ShCoeffs c = ShCoeffs::Zero(2);
  c.coeffs.row(0).setConstant(2.0 * std::sqrt(M_PI));
  const EquirectImage irr = ReconstructSh(RenderIrradiance(c), GridGeometry(32, 16));
  EXPECT_LT((irr.pixels().array() - M_PI).abs().maxCoeff(), 1e-12);
}

TEST(RenderIrradiance, BandScalingAndOrder) {
  EXPECT_DOUBLE_EQ(IrradianceBandScale(0), M_PI);
  EXPECT_DOUBLE_EQ(IrradianceBandScale(1), 2.0 * M_PI / 3.0);
  EXPECT_DOUBLE_EQ(IrradianceBandScale(2), M_PI / 4.0);
  std::mt19937_64 rng(5);
  const ShCoeffs high = RandomSh(4, rng);
  const ShCoeffs out = RenderIrradiance(high);
  EXPECT_EQ(out.order, 2);
  for (int i = 0; i < 9; ++i) {
    EXPECT_TRUE(out.coeffs.row(i).isApprox(IrradianceBandScale(ShBand(i)) * high.coeffs.row(i)));
  }
  const ShCoeffs low = RenderIrradiance(RandomSh(1, rng));
  EXPECT_EQ(low.order, 2);
  EXPECT_TRUE(low.coeffs.bottomRows(5).isZero(0));
  EXPECT_TRUE(RenderIrradiance(ShCoeffs::Zero(2)).coeffs.isZero(0));
}

TEST(ShCoeffLoss, Examples) {
  ShCoeffs a = ShCoeffs::Zero(0), b = ShCoeffs::Zero(0);
  b.coeffs(0, 1) = 1.0;
  EXPECT_DOUBLE_EQ(ShCoeffLoss(a, b).value, 1.0);
  ShCoeffs c = ShCoeffs::Zero(1), d = ShCoeffs::Zero(1);
  d.coeffs(ShIndex(1, 1), 2) = 3.0;
  const auto loss = ShCoeffLoss(c, d);
  EXPECT_DOUBLE_EQ(loss.value, 3.0);
  EXPECT_DOUBLE_EQ(loss.gradient(ShIndex(1, 1), 2), 2.0 * -3.0 / 3.0);
  EXPECT_DOUBLE_EQ(ShCoeffLoss(d, d).value, 0.0);
  EXPECT_THROW(ShCoeffLoss(a, c), InvalidArgument);
}

// Direct per-pixel evaluation of the weighted map loss.
double BruteMapLoss(const ShCoeffs& pred, const ShCoeffs& gt, const GridGeometry& geom) {
  const EquirectImage diff = ReconstructSh(ShCoeffs(pred.order, pred.coeffs - gt.coeffs), geom);
  double sum = 0.0;
  for (int y = 0; y < geom.height(); ++y) {
    for (int x = 0; x < geom.width(); ++x) {
      sum += std::sin(geom.polar(y)) * diff.pixel(x, y).squaredNorm();
    }
  }
  return sum / (3.0 * geom.pixel_count());
}

template <typename LossFn>
void CheckGradient(LossFn loss, const ShCoeffs& pred, const ShCoeffs& gt) {
  const ShMatrix analytic = loss(pred, gt).gradient;
  const double h = 1e-4;
  for (Eigen::Index i = 0; i < pred.coeffs.size(); ++i) {
    ShCoeffs plus = pred, minus = pred;
    plus.coeffs.data()[i] += h;
    minus.coeffs.data()[i] -= h;
    const double fd = (loss(plus, gt).value - loss(minus, gt).value) / (2 * h);
    const double g = analytic.data()[i];
    EXPECT_LE(std::abs(fd - g), 1e-5 * std::max(1.0, std::abs(g))) << "entry " << i;
  }
}

TEST(ShReconstructionLoss, MatchesBruteForceAndInvariants) {
  const GridGeometry geom(128, 64);
  std::mt19937_64 rng(6);
  const ShCoeffs pred = RandomSh(2, rng), gt = RandomSh(2, rng);
  EXPECT_NEAR(ShReconstructionLoss(pred, gt, geom).value, BruteMapLoss(pred, gt, geom), 1e-12);
  EXPECT_DOUBLE_EQ(ShReconstructionLoss(gt, gt, geom).value, 0.0);
  const ShMatrix delta = RandomSh(2, rng).coeffs;
  EXPECT_NEAR(ShReconstructionLoss(ShCoeffs(2, pred.coeffs + delta), ShCoeffs(2, gt.coeffs + delta), geom).value,
              ShReconstructionLoss(pred, gt, geom).value, 1e-12);
  EXPECT_GT(ShReconstructionLoss(pred, gt, geom).value, 0.0);
  EXPECT_THROW(ShReconstructionLoss(pred, ShCoeffs::Zero(1), geom), InvalidArgument);
}

TEST(ShReconstructionLoss, GradientMatchesFiniteDifferences) {
  const GridGeometry geom(128, 64);
  std::mt19937_64 rng(7);
  auto loss = [&](const ShCoeffs& p, const ShCoeffs& g) { return ShReconstructionLoss(p, g, geom); };
  CheckGradient(loss, RandomSh(2, rng), RandomSh(2, rng));
}

TEST(ShRenderingLoss, EqualsReconstructionLossOfScaledCoefficients) {
  const GridGeometry geom(128, 64);
  std::mt19937_64 rng(8);
  const ShCoeffs pred = RandomSh(2, rng), gt = RandomSh(2, rng);
  EXPECT_NEAR(ShRenderingLoss(pred, gt, geom).value,
              ShReconstructionLoss(RenderIrradiance(pred), RenderIrradiance(gt), geom).value, 1e-12);
  EXPECT_DOUBLE_EQ(ShRenderingLoss(pred, pred, geom).value, 0.0);
}

TEST(ShRenderingLoss, GradientMatchesFiniteDifferences) {
  const GridGeometry geom(128, 64);
  std::mt19937_64 rng(9);
  auto loss = [&](const ShCoeffs& p, const ShCoeffs& g) { return ShRenderingLoss(p, g, geom); };
  CheckGradient(loss, RandomSh(2, rng), RandomSh(2, rng));
  // Bands above 2 do not reach the irradiance map.
  const auto high = ShRenderingLoss(RandomSh(3, rng), RandomSh(3, rng), geom);
  EXPECT_TRUE(high.gradient.bottomRows(7).isZero(0));
}

TEST(FitShLeastSquares, RecoversBandLimitedInput) {
  const GridGeometry geom(64, 32);
  std::mt19937_64 rng(10);
  for (int order : {0, 2, 4, 6}) {
    const ShCoeffs c = RandomSh(order, rng);
    const ShCoeffs fit = FitShLeastSquares(ReconstructSh(c, geom), order);
    EXPECT_LT((fit.coeffs - c.coeffs).cwiseAbs().maxCoeff(), 1e-9) << order;
  }
}

TEST(FitShLeastSquares, AgreesWithProjectionAtFineResolution) {
  const GridGeometry geom(2048, 1024);
  std::mt19937_64 rng(11);
  const ShCoeffs c = RandomSh(2, rng);
  const EquirectImage img = ReconstructSh(c, geom);
  const ShCoeffs fit = FitShLeastSquares(img, 2);
  const ShCoeffs proj = ProjectSh(img, 2);
  EXPECT_LT((fit.coeffs - proj.coeffs).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(FitShLeastSquares, ConstantInputIsDcOnly) {
  const GridGeometry geom(64, 32);
  const EquirectImage img(geom, PixelMatrix::Constant(geom.pixel_count(), 3, 2.5));
  const ShCoeffs fit = FitShLeastSquares(img, 6);
  EXPECT_NEAR(fit.coeffs(0, 0), 2.5 * 2.0 * std::sqrt(M_PI), 1e-10);
  EXPECT_LT(fit.coeffs.bottomRows(48).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FitShLeastSquares, ResidualShrinksWithOrder) {
  const GridGeometry geom(128, 64);
  std::mt19937_64 rng(12);
  EquirectImage img(geom);
  for (int i = 0; i < 30; ++i) {
    img.pixels().row(rng() % geom.pixel_count()).setConstant(Uniform(rng, 1.0, 50.0));
  }
  const Eigen::VectorXd w = PixelSolidAngles(geom);
  double previous = std::numeric_limits<double>::infinity();
  for (int order : {2, 4, 6}) {
    const EquirectImage rec = ReconstructSh(FitShLeastSquares(img, order), geom);
    const double residual = (w.asDiagonal() * (rec.pixels() - img.pixels()).rowwise().squaredNorm()).sum();
    EXPECT_LE(residual, previous + 1e-12) << order;
    previous = residual;
  }
}

TEST(FitShLeastSquares, GuardsAndErrors) {
  const GridGeometry geom(64, 32);
  const EquirectImage img(geom);
  EXPECT_THROW(FitShLeastSquares(img, 11), InvalidArgument);
  const Eigen::VectorXd none = Eigen::VectorXd::Zero(geom.pixel_count());
  EXPECT_THROW(FitShLeastSquares(img, 2, &none), NumericalError);
  // A 2-pixel-high grid cannot resolve order 6.
  EXPECT_THROW(FitShLeastSquares(EquirectImage(GridGeometry(4, 2)), 6), NumericalError);
}

}  // namespace
}  // namespace lumiparam
