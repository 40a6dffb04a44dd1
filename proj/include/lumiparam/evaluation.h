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

#ifndef LUMIPARAM_EVALUATION_H_
#define LUMIPARAM_EVALUATION_H_

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lumiparam/codec.h"
#include "lumiparam/error.h"
#include "lumiparam/image.h"
#include "lumiparam/sh.h"

namespace lumiparam {

// Root mean square of (a - b) over all entries.
template <typename DerivedA, typename DerivedB>
double Rmse(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument("RMSE: shape mismatch");
  }
  if (a.size() == 0) return 0.0;
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

// Scale-invariant RMSE: min over one global scale alpha of
// RMSE(alpha * pred, gt), with alpha = <pred, gt> / <pred, pred>. An all-zero
// prediction sets *degenerate and returns RMSE(0, gt).
template <typename DerivedA, typename DerivedB>
double SiRmse(const Eigen::MatrixBase<DerivedA>& pred, const Eigen::MatrixBase<DerivedB>& gt,
              bool* degenerate = nullptr) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) {
    throw InvalidArgument("si-RMSE: shape mismatch");
  }
  const double pp = pred.squaredNorm();
  if (degenerate != nullptr) *degenerate = !(pp > 0.0);
  if (!(pp > 0.0)) return Rmse(pred, gt);
  const double alpha = pred.cwiseProduct(gt).sum() / pp;
  return Rmse(alpha * pred, gt);
}

// Orthographic view of a unit sphere. `to_camera` points from the sphere
// toward the viewer; image right is up x to_camera.
struct SphereView {
  Eigen::Vector3d to_camera{0.0, -1.0, 0.0};
  Eigen::Vector3d up{0.0, 0.0, 1.0};
};

// Square render; pixels outside the sphere silhouette are black.
struct SphereRender {
  int size = 0;
  PixelMatrix pixels;                          // size*size x 3, row-major
  Eigen::Array<bool, Eigen::Dynamic, 1> inside;

  // Pixels inside the silhouette, in row-major order.
  PixelMatrix InsidePixels() const;
  EquirectImage AsImage() const;  // for the PNG writer
};

// Surface normal seen at each pixel of a size x size render, or nullopt
// outside the silhouette.
std::vector<std::optional<Eigen::Vector3d>> SphereNormals(int size, const SphereView& view);

enum class IrradianceMethod {
  kSh,          // order-2 projection then clamped-cosine band scaling
  kQuadrature,  // direct sum of L max(0, n . w) dw over the map's pixels
};

// Lambertian sphere: albedo / pi * irradiance(n).
SphereRender RenderDiffuseSphere(const ShCoeffs& env, int size, double albedo = 0.5,
                                 const SphereView& view = {});
SphereRender RenderDiffuseSphere(const EquirectImage& env, int size,
                                 IrradianceMethod method = IrradianceMethod::kSh,
                                 double albedo = 0.5, const SphereView& view = {});

// Irradiance of an environment map by direct quadrature.
Eigen::Vector3d QuadratureIrradiance(const EquirectImage& env, const Eigen::Vector3d& normal);

// Mirror sphere: bilinear environment lookup along 2 (n . v) n - v.
SphereRender RenderMirrorSphere(const EquirectImage& env, int size, const SphereView& view = {});

// Bilinear lookup with azimuth wrap-around and clamped rows.
Eigen::Vector3d SampleBilinear(const EquirectImage& env, const Eigen::Vector3d& dir);

struct MetricPair {
  double rmse = 0.0;
  double si_rmse = 0.0;
  bool degenerate = false;  // prediction was all zero
  // sqrt(rmse * si_rmse), the combined error used for violin summaries.
  double composite() const { return std::sqrt(rmse * si_rmse); }
};

MetricPair CompareImages(const PixelMatrix& pred, const PixelMatrix& gt);

struct RoundTripReport {
  MetricPair full;
  MetricPair diffuse;
  MetricPair mirror;

  // Parameter losses between the prediction and target decompositions.
  double masked_l1 = 0.0;
  double sh_coeff = 0.0;
  double sh_reconstruction = 0.0;
  double sh_rendering = 0.0;
  double l2_p = 0.0;
  double l2_e = 0.0;
  double l2_r = 0.0;
  std::optional<double> sml;

  bool degenerate_pred = false;  // no light-source energy in the prediction
  bool degenerate_gt = false;
};

struct EvalOptions {
  int sphere_size = 64;
  SphereView view;
  bool sml = false;
  double sml_epsilon = 1e-2;
};

// Metrics and renders comparing `pred` to `gt`, plus losses between their
// parameter sets.
RoundTripReport Evaluate(const EquirectImage& pred, const MixLightParams& pred_params,
                         const EquirectImage& gt, const MixLightParams& gt_params,
                         const EvalOptions& options = {});

// Decompose `pano`, reconstruct it at the same resolution and compare.
RoundTripReport RoundTrip(const EquirectImage& pano, const CodecConfig& config,
                          const EvalOptions& options = {});

// Flat "key value" lines, one metric per line, in a fixed order.
std::vector<std::pair<std::string, double>> ReportFields(const RoundTripReport& report);

}  // namespace lumiparam

#endif  // LUMIPARAM_EVALUATION_H_
