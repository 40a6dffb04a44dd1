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

#include "lumiparam/evaluation.h"

#include <algorithm>

namespace lumiparam {

PixelMatrix SphereRender::InsidePixels() const {
  PixelMatrix out(inside.count(), 3);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < pixels.rows(); ++i) {
    if (inside[i]) out.row(row++) = pixels.row(i);
  }
  return out;
}

EquirectImage SphereRender::AsImage() const {
  // A square grid works as a plain raster for the image writers.
  return EquirectImage(GridGeometry(size, size), pixels.cwiseMax(0.0));
}

std::vector<std::optional<Eigen::Vector3d>> SphereNormals(int size, const SphereView& view) {
  if (size < 2) throw InvalidArgument("sphere render size must be >= 2");
  const Eigen::Vector3d v = view.to_camera.normalized();
  const Eigen::Vector3d right = view.up.cross(v).normalized();
  const Eigen::Vector3d up = v.cross(right);
  std::vector<std::optional<Eigen::Vector3d>> normals(static_cast<std::size_t>(size) * size);
  for (int j = 0; j < size; ++j) {
    for (int i = 0; i < size; ++i) {
      const double a = 2.0 * (i + 0.5) / size - 1.0;
      const double b = 1.0 - 2.0 * (j + 0.5) / size;
      const double r2 = a * a + b * b;
      if (r2 > 1.0) continue;
      normals[static_cast<std::size_t>(j) * size + i] =
          (a * right + b * up + std::sqrt(1.0 - r2) * v).normalized();
    }
  }
  return normals;
}

namespace {

template <typename Shade>
SphereRender RenderSphere(int size, const SphereView& view, Shade&& shade) {
  const auto normals = SphereNormals(size, view);
  SphereRender out;
  out.size = size;
  out.pixels = PixelMatrix::Zero(static_cast<Eigen::Index>(size) * size, 3);
  out.inside = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(out.pixels.rows(), false);
  for (std::size_t i = 0; i < normals.size(); ++i) {
    if (!normals[i]) continue;
    out.inside[i] = true;
    out.pixels.row(i) = shade(*normals[i]).transpose();
  }
  return out;
}

}  // namespace

SphereRender RenderDiffuseSphere(const ShCoeffs& env, int size, double albedo,
                                 const SphereView& view) {
  const ShCoeffs irradiance = RenderIrradiance(env);
  return RenderSphere(size, view, [&](const Eigen::Vector3d& n) -> Eigen::Vector3d {
    return albedo / M_PI * EvalSh(irradiance, n);
  });
}

Eigen::Vector3d QuadratureIrradiance(const EquirectImage& env, const Eigen::Vector3d& normal) {
  const DirectionList dirs = PixelDirections(env.geometry());
  const Eigen::VectorXd weights = PixelSolidAngles(env.geometry());
  const Eigen::VectorXd w = (dirs * normal).cwiseMax(0.0).cwiseProduct(weights);
  return env.pixels().transpose() * w;
}

SphereRender RenderDiffuseSphere(const EquirectImage& env, int size, IrradianceMethod method,
                                 double albedo, const SphereView& view) {
  if (method == IrradianceMethod::kSh) {
    return RenderDiffuseSphere(ProjectSh(env, 2), size, albedo, view);
  }
  const DirectionList dirs = PixelDirections(env.geometry());
  const Eigen::VectorXd weights = PixelSolidAngles(env.geometry());
  return RenderSphere(size, view, [&](const Eigen::Vector3d& n) -> Eigen::Vector3d {
    const Eigen::VectorXd w = (dirs * n).cwiseMax(0.0).cwiseProduct(weights);
    return albedo / M_PI * (env.pixels().transpose() * w);
  });
}

Eigen::Vector3d SampleBilinear(const EquirectImage& env, const Eigen::Vector3d& dir) {
  const int w = env.width();
  const int h = env.height();
  const Eigen::Vector3d d = dir.normalized();
  const double theta = std::acos(std::clamp(d.z(), -1.0, 1.0));
  double phi = std::atan2(d.y(), d.x());
  if (phi < 0.0) phi += 2.0 * M_PI;
  const double fx = phi / (2.0 * M_PI) * w - 0.5;
  const double fy = theta / M_PI * h - 0.5;
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const double tx = fx - x0;
  const double ty = fy - y0;
  auto at = [&](int x, int y) -> Eigen::Vector3d {
    x = ((x % w) + w) % w;
    y = std::clamp(y, 0, h - 1);
    return env.pixel(x, y).transpose();
  };
  return (1 - ty) * ((1 - tx) * at(x0, y0) + tx * at(x0 + 1, y0)) +
         ty * ((1 - tx) * at(x0, y0 + 1) + tx * at(x0 + 1, y0 + 1));
}

SphereRender RenderMirrorSphere(const EquirectImage& env, int size, const SphereView& view) {
  const Eigen::Vector3d v = view.to_camera.normalized();
  return RenderSphere(size, view, [&](const Eigen::Vector3d& n) -> Eigen::Vector3d {
    return SampleBilinear(env, 2.0 * n.dot(v) * n - v);
  });
}

MetricPair CompareImages(const PixelMatrix& pred, const PixelMatrix& gt) {
  MetricPair m;
  m.rmse = Rmse(pred, gt);
  m.si_rmse = SiRmse(pred, gt, &m.degenerate);
  return m;
}

RoundTripReport Evaluate(const EquirectImage& pred, const MixLightParams& pred_params,
                         const EquirectImage& gt, const MixLightParams& gt_params,
                         const EvalOptions& options) {
  if (!(pred.geometry() == gt.geometry())) {
    throw InvalidArgument("prediction and target maps differ in size");
  }
  RoundTripReport report;
  report.full = CompareImages(pred.pixels(), gt.pixels());
  report.diffuse = CompareImages(
      RenderDiffuseSphere(pred, options.sphere_size, IrradianceMethod::kSh, 0.5, options.view).InsidePixels(),
      RenderDiffuseSphere(gt, options.sphere_size, IrradianceMethod::kSh, 0.5, options.view).InsidePixels());
  report.mirror = CompareImages(
      RenderMirrorSphere(pred, options.sphere_size, options.view).InsidePixels(),
      RenderMirrorSphere(gt, options.sphere_size, options.view).InsidePixels());

  const int order = std::max(pred_params.sh.order, gt_params.sh.order);
  const ShCoeffs pred_sh = pred_params.sh.WithOrder(order);
  const ShCoeffs gt_sh = gt_params.sh.WithOrder(order);
  report.sh_coeff = ShCoeffLoss(pred_sh, gt_sh).value;
  report.sh_reconstruction = ShReconstructionLoss(pred_sh, gt_sh, gt.geometry()).value;
  report.sh_rendering = ShRenderingLoss(pred_sh, gt_sh, gt.geometry()).value;

  report.degenerate_pred = pred_params.sg.degenerate;
  report.degenerate_gt = gt_params.sg.degenerate;
  if (pred_params.sg.n() == gt_params.sg.n()) {
    report.masked_l1 = MaskedL1Loss(pred_params.sg.p, gt_params.sg.p).value;
    const SgL2Losses l2 = SgL2Loss(pred_params.sg, gt_params.sg);
    report.l2_p = l2.p.value;
    report.l2_e = l2.e.value;
    report.l2_r = l2.r.value;
    if (options.sml && !report.degenerate_pred && !report.degenerate_gt) {
      report.sml = SmlLoss(pred_params.sg.p / pred_params.sg.p.sum(),
                           gt_params.sg.p / gt_params.sg.p.sum(), gt_params.Anchors(),
                           options.sml_epsilon);
    }
  } else {
    throw InvalidArgument("prediction and target use different anchor counts");
  }
  return report;
}

RoundTripReport RoundTrip(const EquirectImage& pano, const CodecConfig& config,
                          const EvalOptions& options) {
  const Decomposition gt = Decompose(pano, config);
  const EquirectImage rebuilt = Reconstruct(gt.params, pano.geometry());
  const Decomposition pred = Decompose(rebuilt, config);
  return Evaluate(rebuilt, pred.params, pano, gt.params, options);
}

std::vector<std::pair<std::string, double>> ReportFields(const RoundTripReport& r) {
  std::vector<std::pair<std::string, double>> out = {
      {"rmse_full", r.full.rmse},
      {"si_rmse_full", r.full.si_rmse},
      {"composite_full", r.full.composite()},
      {"rmse_diffuse", r.diffuse.rmse},
      {"si_rmse_diffuse", r.diffuse.si_rmse},
      {"composite_diffuse", r.diffuse.composite()},
      {"rmse_mirror", r.mirror.rmse},
      {"si_rmse_mirror", r.mirror.si_rmse},
      {"composite_mirror", r.mirror.composite()},
      {"loss_masked_l1", r.masked_l1},
      {"loss_sh_coeff", r.sh_coeff},
      {"loss_sh_reconstruction", r.sh_reconstruction},
      {"loss_sh_rendering", r.sh_rendering},
      {"loss_l2_p", r.l2_p},
      {"loss_l2_e", r.l2_e},
      {"loss_l2_r", r.l2_r},
  };
  if (r.sml) out.emplace_back("loss_sml", *r.sml);
  return out;
}

}  // namespace lumiparam
