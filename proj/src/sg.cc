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

#include "lumiparam/sg.h"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "lumiparam/error.h"

namespace lumiparam {

namespace {

// exp(-100) is ~4e-44 of the lobe peak; contributions below it are skipped.
constexpr double kLobeCutoff = -100.0;

}  // namespace

int SourcePixelCount(int pixel_count, double percentile) {
  if (!(percentile > 0.0 && percentile < 1.0)) {
    throw InvalidArgument("percentile must lie in (0, 1), got " + std::to_string(percentile));
  }
  // The relative nudge keeps exact products such as 0.05 * 100 from rounding
  // up to the next integer.
  const double exact = percentile * pixel_count;
  const int count = static_cast<int>(std::ceil(exact * (1.0 - 1e-12)));
  return std::clamp(count, 1, pixel_count);
}

Separation Separate(const EquirectImage& img, double percentile) {
  const int n = img.geometry().pixel_count();
  const int count = SourcePixelCount(n, percentile);
  const Eigen::VectorXd brightness = img.Brightness();

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + count, order.end(), [&](int a, int b) {
    if (brightness[a] != brightness[b]) return brightness[a] > brightness[b];
    return a < b;
  });

  LightMask mask{img.geometry(), Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(n, false)};
  for (int i = 0; i < count; ++i) mask.bits[order[i]] = true;

  EquirectImage sources(img.geometry());
  EquirectImage ambient = img;
  for (int i = 0; i < n; ++i) {
    if (mask.bits[i]) {
      sources.pixels().row(i) = img.pixels().row(i);
      ambient.pixels().row(i).setZero();
    }
  }
  return {std::move(sources), std::move(ambient), std::move(mask)};
}

SgParams DecomposeSg(const EquirectImage& sources, const AnchorSet& anchors,
                     double s, Weighting mode) {
  if (anchors.count() < 1) throw InvalidArgument("anchor set is empty");
  if (!(s > 0.0)) throw InvalidArgument("angular size must be positive");
  const GridGeometry& geom = sources.geometry();
  const Eigen::VectorXd weight = mode == Weighting::kSolidAngle
                                     ? PixelSolidAngles(geom)
                                     : Eigen::VectorXd::Ones(geom.pixel_count());

  SgParams params;
  params.s = s;
  params.p = Eigen::VectorXd::Zero(anchors.count());
  const Eigen::Vector3d totals = sources.pixels().transpose() * weight;
  params.e = totals.norm();
  if (!(params.e > 0.0)) {
    params.e = 0.0;
    params.degenerate = true;
    return params;
  }
  params.r = totals / params.e;

  const Eigen::VectorXd brightness = sources.Brightness();
  for (int y = 0; y < geom.height(); ++y) {
    for (int x = 0; x < geom.width(); ++x) {
      const int i = geom.index(x, y);
      if (brightness[i] == 0.0) continue;
      params.p[NearestAnchor(anchors, DirFromPixel(geom, x, y))] += brightness[i] * weight[i];
    }
  }
  params.p /= params.p.sum();
  return params;
}

double NormalizationQ(double s, double r) {
  if (!(s > 0.0) || !(r > 0.0)) {
    throw InvalidArgument("angular size and radius must be positive");
  }
  return 1.0 / (2.0 * M_PI * s * r * r * -std::expm1(-2.0 / s));
}

EquirectImage ReconstructGaussianMap(const SgParams& params, const AnchorSet& anchors,
                                     const GridGeometry& geom) {
  if (params.n() != anchors.count()) {
    throw InvalidArgument("distribution has " + std::to_string(params.n()) +
                          " entries but there are " + std::to_string(anchors.count()) +
                          " anchors");
  }
  return ReconstructGaussianMap(params.Amplitudes(), anchors, params.s, geom);
}

EquirectImage ReconstructGaussianMap(
    const Eigen::Ref<const Eigen::Matrix<double, Eigen::Dynamic, 3>>& amplitudes,
    const AnchorSet& anchors, double s, const GridGeometry& geom) {
  if (amplitudes.rows() != anchors.count()) {
    throw InvalidArgument("amplitude rows do not match the anchor count");
  }
  const double q = NormalizationQ(s);
  std::vector<int> active;
  for (int i = 0; i < anchors.count(); ++i) {
    if (amplitudes.row(i).cwiseAbs().maxCoeff() > 0.0) active.push_back(i);
  }

  EquirectImage out(geom);
  if (active.empty()) return out;
  for (int y = 0; y < geom.height(); ++y) {
    for (int x = 0; x < geom.width(); ++x) {
      const Eigen::Vector3d u = DirFromPixel(geom, x, y);
      Eigen::RowVector3d value = Eigen::RowVector3d::Zero();
      for (int i : active) {
        const double exponent = (anchors.dirs.row(i).dot(u) - 1.0) / s;
        if (exponent < kLobeCutoff) continue;
        value += std::exp(exponent) * amplitudes.row(i);
      }
      out.pixel(x, y) = q * value;
    }
  }
  return out;
}

LossResult<Eigen::VectorXd> MaskedL1Loss(const Eigen::VectorXd& pred,
                                         const Eigen::VectorXd& gt) {
  if (pred.size() != gt.size()) {
    throw InvalidArgument("masked L1: length mismatch (" + std::to_string(pred.size()) +
                          " vs " + std::to_string(gt.size()) + ")");
  }
  LossResult<Eigen::VectorXd> out;
  out.gradient = Eigen::VectorXd::Zero(pred.size());
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (gt[i] != 0.0) continue;
    const double d = pred[i] - gt[i];
    out.value += std::abs(d);
    out.gradient[i] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
  }
  return out;
}

SgL2Losses SgL2Loss(const SgParams& pred, const SgParams& gt) {
  if (pred.n() != gt.n()) {
    throw InvalidArgument("SG L2 loss: N mismatch (" + std::to_string(pred.n()) + " vs " +
                          std::to_string(gt.n()) + ")");
  }
  SgL2Losses out;
  const Eigen::VectorXd dp = pred.p - gt.p;
  out.p = {dp.squaredNorm(), 2.0 * dp};
  const double de = pred.e - gt.e;
  out.e = {de * de, 2.0 * de};
  const Eigen::Vector3d dr = pred.r - gt.r;
  out.r = {dr.squaredNorm(), 2.0 * dr};
  return out;
}

namespace {

// Pixel-by-kernel design matrix of normalized lobes.
Eigen::MatrixXd KernelDesign(const AnchorSet& anchors, double s, const GridGeometry& geom) {
  const double q = NormalizationQ(s);
  const DirectionList dirs = PixelDirections(geom);
  Eigen::MatrixXd design(dirs.rows(), anchors.count());
  for (Eigen::Index px = 0; px < dirs.rows(); ++px) {
    for (int i = 0; i < anchors.count(); ++i) {
      design(px, i) = q * std::exp((anchors.dirs.row(i).dot(dirs.row(px)) - 1.0) / s);
    }
  }
  return design;
}

}  // namespace

SmoothSgFit FitSmoothSg(const EquirectImage& ambient, int count, double s) {
  if (count < 1) throw InvalidArgument("smooth SG fit needs at least one kernel");
  SmoothSgFit fit;
  fit.anchors = VogelAnchors(count, 0);
  fit.s = s;
  const Eigen::MatrixXd design = KernelDesign(fit.anchors, s, ambient.geometry());
  const Eigen::VectorXd weight = PixelSolidAngles(ambient.geometry());
  const Eigen::MatrixXd weighted = (design.array().colwise() * weight.array()).matrix();
  const Eigen::LLT<Eigen::MatrixXd> llt(design.transpose() * weighted);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-14)) {
    throw NumericalError("smooth SG normal equations are singular");
  }
  fit.amplitudes = llt.solve(weighted.transpose() * ambient.pixels());
  return fit;
}

EquirectImage ReconstructSmoothSg(const SmoothSgFit& fit, const GridGeometry& geom) {
  return EquirectImage(geom, KernelDesign(fit.anchors, fit.s, geom) * fit.amplitudes);
}

}  // namespace lumiparam
