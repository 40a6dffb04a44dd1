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

#include <string>

namespace lumiparam {

namespace {

void RequireSameOrder(const ShCoeffs& pred, const ShCoeffs& gt) {
  if (pred.order != gt.order) {
    throw InvalidArgument("SH order mismatch: " + std::to_string(pred.order) +
                          " vs " + std::to_string(gt.order));
  }
}

// Value and gradient of (1 / (3wh)) sum sin(polar) (B diff)^2.
LossResult<ShMatrix> WeightedMapLoss(const ShMatrix& diff, int order,
                                     const GridGeometry& geom) {
  const Eigen::MatrixXd basis = ShBasisMatrix(order, PixelDirections(geom));
  const Eigen::VectorXd weight = PixelSinPolar(geom);
  const Eigen::MatrixXd residual = basis * diff;
  const double norm = 1.0 / (3.0 * geom.pixel_count());
  LossResult<ShMatrix> out;
  out.value = norm * (residual.array().square().colwise() * weight.array()).sum();
  out.gradient = 2.0 * norm * basis.transpose() *
                 (residual.array().colwise() * weight.array()).matrix();
  return out;
}

}  // namespace

Eigen::MatrixXd ShBasisMatrix(int order, const DirectionList& dirs) {
  Eigen::MatrixXd basis(dirs.rows(), ShCoeffCount(order));
  for (Eigen::Index i = 0; i < dirs.rows(); ++i) {
    basis.row(i) = ShBasis<double>(order, dirs.row(i).transpose()).transpose();
  }
  return basis;
}

ShCoeffs::ShCoeffs(int order, ShMatrix coeffs)
    : order(order), coeffs(std::move(coeffs)) {
  if (order < 0) throw InvalidArgument("SH order must be >= 0");
  if (this->coeffs.rows() != ShCoeffCount(order)) {
    throw InvalidArgument("order " + std::to_string(order) + " needs " +
                          std::to_string(ShCoeffCount(order)) +
                          " coefficients per channel, got " +
                          std::to_string(this->coeffs.rows()));
  }
  if (!this->coeffs.allFinite()) throw InvalidArgument("SH coefficients must be finite");
}

ShCoeffs ShCoeffs::Zero(int order) {
  return ShCoeffs(order, ShMatrix::Zero(ShCoeffCount(order), 3));
}

ShCoeffs ShCoeffs::WithOrder(int new_order) const {
  ShCoeffs out = Zero(new_order);
  const int n = std::min(ShCoeffCount(order), ShCoeffCount(new_order));
  out.coeffs.topRows(n) = coeffs.topRows(n);
  return out;
}

Eigen::Vector3d EvalSh(const ShCoeffs& sh, const Eigen::Vector3d& dir) {
  return sh.coeffs.transpose() * ShBasis<double>(sh.order, dir);
}

ShCoeffs ProjectSh(const EquirectImage& img, int order, Weighting mode) {
  if (order < 0) throw InvalidArgument("SH order must be >= 0");
  const GridGeometry& geom = img.geometry();
  const Eigen::VectorXd weight =
      mode == Weighting::kSolidAngle
          ? PixelSolidAngles(geom)
          : Eigen::VectorXd::Constant(geom.pixel_count(), 4.0 * M_PI / geom.pixel_count());
  const Eigen::MatrixXd basis = ShBasisMatrix(order, PixelDirections(geom));
  return ShCoeffs(order, basis.transpose() * (img.pixels().array().colwise() * weight.array()).matrix());
}

EquirectImage ReconstructSh(const ShCoeffs& sh, const GridGeometry& geom,
                            bool clamp_negative) {
  PixelMatrix pixels = ShBasisMatrix(sh.order, PixelDirections(geom)) * sh.coeffs;
  if (clamp_negative) pixels = pixels.cwiseMax(0.0);
  return EquirectImage(geom, std::move(pixels));
}

double IrradianceBandScale(int band) {
  switch (band) {
    case 0: return M_PI;
    case 1: return 2.0 * M_PI / 3.0;
    case 2: return M_PI / 4.0;
    default: return 0.0;
  }
}

ShCoeffs RenderIrradiance(const ShCoeffs& radiance) {
  ShCoeffs out = radiance.WithOrder(2);
  for (int i = 0; i < ShCoeffCount(2); ++i) {
    out.coeffs.row(i) *= IrradianceBandScale(ShBand(i));
  }
  return out;
}

ShCoeffs FitShLeastSquares(const EquirectImage& img, int order,
                           const Eigen::VectorXd* pixel_weights, Weighting mode) {
  if (order < 0 || order > 10) {
    throw InvalidArgument("least-squares SH fit supports orders 0..10, got " +
                          std::to_string(order));
  }
  const GridGeometry& geom = img.geometry();
  Eigen::VectorXd weight = mode == Weighting::kSolidAngle
                               ? PixelSolidAngles(geom)
                               : Eigen::VectorXd::Ones(geom.pixel_count());
  if (pixel_weights != nullptr) {
    if (pixel_weights->size() != weight.size()) {
      throw InvalidArgument("pixel weight vector does not match the image");
    }
    weight.array() *= pixel_weights->array();
  }
  const Eigen::MatrixXd basis = ShBasisMatrix(order, PixelDirections(geom));
  const Eigen::MatrixXd weighted = (basis.array().colwise() * weight.array()).matrix();
  const Eigen::MatrixXd normal = basis.transpose() * weighted;
  const Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-12)) {
    throw NumericalError("SH least-squares normal equations are singular (order " +
                         std::to_string(order) + ", " + std::to_string(geom.width()) +
                         "x" + std::to_string(geom.height()) + " grid)");
  }
  return ShCoeffs(order, llt.solve(weighted.transpose() * img.pixels()));
}

LossResult<ShMatrix> ShCoeffLoss(const ShCoeffs& pred, const ShCoeffs& gt) {
  RequireSameOrder(pred, gt);
  const ShMatrix diff = pred.coeffs - gt.coeffs;
  LossResult<ShMatrix> out;
  out.gradient.resizeLike(diff);
  for (Eigen::Index i = 0; i < diff.rows(); ++i) {
    const double band_weight = 1.0 / (2 * ShBand(static_cast<int>(i)) + 1);
    out.value += band_weight * diff.row(i).squaredNorm();
    out.gradient.row(i) = 2.0 * band_weight * diff.row(i);
  }
  return out;
}

LossResult<ShMatrix> ShReconstructionLoss(const ShCoeffs& pred,
                                          const ShCoeffs& gt,
                                          const GridGeometry& geom) {
  RequireSameOrder(pred, gt);
  return WeightedMapLoss(pred.coeffs - gt.coeffs, pred.order, geom);
}

LossResult<ShMatrix> ShRenderingLoss(const ShCoeffs& pred, const ShCoeffs& gt,
                                     const GridGeometry& geom) {
  RequireSameOrder(pred, gt);
  const ShMatrix diff = RenderIrradiance(pred).coeffs - RenderIrradiance(gt).coeffs;
  LossResult<ShMatrix> irradiance = WeightedMapLoss(diff, 2, geom);
  // Chain rule through the diagonal band scaling.
  LossResult<ShMatrix> out;
  out.value = irradiance.value;
  out.gradient = ShMatrix::Zero(pred.coeffs.rows(), 3);
  const int n = std::min(ShCoeffCount(2), static_cast<int>(pred.coeffs.rows()));
  for (int i = 0; i < n; ++i) {
    out.gradient.row(i) = IrradianceBandScale(ShBand(i)) * irradiance.gradient.row(i);
  }
  return out;
}

}  // namespace lumiparam
