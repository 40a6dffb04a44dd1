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

#include "lumiparam/error.h"

namespace lumiparam {

void CodecConfig::Validate() const {
  if (order < 0 || order > 10) throw InvalidArgument("SH order must lie in [0, 10]");
  if (anchors < 1) throw InvalidArgument("anchor count must be >= 1");
  if (k_nn < 0 || k_nn >= anchors) throw InvalidArgument("k_nn must satisfy 0 <= k_nn < anchors");
  if (!(angular_size > 0.0)) throw InvalidArgument("angular size must be positive");
  if (!(percentile > 0.0 && percentile < 1.0)) throw InvalidArgument("percentile must lie in (0, 1)");
  if (sparsify && k_nn < 1) throw InvalidArgument("sparsify needs k_nn >= 1");
}

const char* WeightingName(Weighting mode) {
  return mode == Weighting::kSolidAngle ? "solid-angle" : "paper-literal";
}

Weighting ParseWeighting(const std::string& name) {
  if (name == "solid-angle") return Weighting::kSolidAngle;
  if (name == "paper-literal") return Weighting::kPaperLiteral;
  throw InvalidArgument("unknown weighting mode '" + name + "'");
}

const char* AmbientFitName(AmbientFit fit) {
  return fit == AmbientFit::kMaskedFit ? "masked-fit" : "project";
}

AmbientFit ParseAmbientFit(const std::string& name) {
  if (name == "masked-fit") return AmbientFit::kMaskedFit;
  if (name == "project") return AmbientFit::kProjection;
  throw InvalidArgument("unknown ambient fit '" + name + "'");
}

namespace {

// Fraction of the weighted energy of the Gaussian map with distribution p
// that falls on the mask pixels. Dividing the observed source energy by it
// restores the part of each lobe hidden under the ambient.
double MaskCapture(const SgParams& sg, const AnchorSet& anchors, const LightMask& mask,
                   Weighting mode) {
  const GridGeometry& geom = mask.geom;
  const DirectionList dirs = PixelDirections(geom);
  const Eigen::VectorXd weights = mode == Weighting::kSolidAngle
                                      ? PixelSolidAngles(geom)
                                      : Eigen::VectorXd::Ones(geom.pixel_count());
  const Eigen::ArrayXd on_mask = mask.bits.cast<double>();
  double captured = 0.0;
  for (int i = 0; i < anchors.count(); ++i) {
    if (!(sg.p[i] > 0.0)) continue;
    const Eigen::ArrayXd lobe =
        ((dirs * anchors.dirs.row(i).transpose()).array() - 1.0).unaryExpr(
            [s = sg.s](double x) { return std::exp(x / s); }) * weights.array();
    const double total = lobe.sum();
    if (total > 0.0) captured += sg.p[i] * (lobe * on_mask).sum() / total;
  }
  return captured;
}

}  // namespace

Decomposition Decompose(const EquirectImage& pano, const CodecConfig& config) {
  config.Validate();
  if (!pano.IsRadiometric()) {
    throw InvalidArgument("panorama has negative or non-finite pixels");
  }
  const AnchorSet anchors = VogelAnchors(config.anchors, config.k_nn);
  Separation separation = Separate(pano, config.percentile);
  MixLightParams params;
  params.k_nn = config.k_nn;
  EquirectImage light_sources = separation.sources;
  if (config.ambient == AmbientFit::kProjection) {
    params.sh = ProjectSh(separation.ambient, config.order, config.mode);
  } else {
    const Eigen::VectorXd keep = (!separation.mask.bits).cast<double>();
    params.sh = FitShLeastSquares(pano, config.order, &keep, config.mode);
    const PixelMatrix fitted = ReconstructSh(params.sh, pano.geometry()).pixels();
    for (Eigen::Index i = 0; i < fitted.rows(); ++i) {
      if (separation.mask.bits[i]) {
        light_sources.pixels().row(i) = (pano.pixels().row(i) - fitted.row(i)).cwiseMax(0.0);
      }
    }
  }
  params.sg = DecomposeSg(light_sources, anchors, config.angular_size, config.mode);
  if (config.ambient == AmbientFit::kMaskedFit && !params.sg.degenerate) {
    const double captured = MaskCapture(params.sg, anchors, separation.mask, config.mode);
    if (captured > 0.0) params.sg.e /= captured;
  }
  Decomposition out{std::move(params), std::move(separation), std::move(light_sources),
                    std::nullopt};
  if (config.sparsify && !out.params.sg.degenerate) {
    out.sparsify_report = SparsifyParams(out.params);
  }
  return out;
}

CredibilityReport SparsifyParams(MixLightParams& params) {
  SlSparsemaxResult result = SlSparsemax(params.sg.p, params.Anchors());
  params.sg.p = std::move(result.p);
  return std::move(result.report);
}

EquirectImage Reconstruct(const MixLightParams& params, const GridGeometry& geom) {
  EquirectImage ambient = ReconstructSh(params.sh, geom, /*clamp_negative=*/true);
  if (params.sg.degenerate || params.sg.e == 0.0) return ambient;
  return ambient + ReconstructGaussianMap(params.sg, params.Anchors(), geom);
}

}  // namespace lumiparam
