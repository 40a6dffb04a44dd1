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

#ifndef LUMIPARAM_CODEC_H_
#define LUMIPARAM_CODEC_H_

#include <optional>
#include <string>

#include "lumiparam/image.h"
#include "lumiparam/sg.h"
#include "lumiparam/sh.h"
#include "lumiparam/sparsemax.h"
#include "lumiparam/sphere.h"

namespace lumiparam {

// How the ambient SH coefficients are obtained from the separated map.
enum class AmbientFit {
  // Least-squares fit over the non-source pixels only; light sources are the
  // positive residual of the map over that fit on the source pixels.
  kMaskedFit,
  // Projection of the ambient map with the source pixels zeroed; light
  // sources are the raw source pixels.
  kProjection,
};

const char* AmbientFitName(AmbientFit fit);
// Accepts "masked-fit" and "project".
AmbientFit ParseAmbientFit(const std::string& name);

// Settings of the SH-ambient + SG-light-source codec. Defaults: order-2 SH,
// 128 anchors with 6-neighborhoods, angular size 0.0025, 5% source pixels.
struct CodecConfig {
  int order = 2;
  int anchors = 128;
  double angular_size = kSharpAngularSize;
  double percentile = kDefaultPercentile;
  int k_nn = 6;
  Weighting mode = Weighting::kSolidAngle;
  AmbientFit ambient = AmbientFit::kMaskedFit;
  bool sparsify = false;

  // Throws InvalidArgument on out-of-range values.
  void Validate() const;
};

const char* WeightingName(Weighting mode);
// Accepts "solid-angle" and "paper-literal".
Weighting ParseWeighting(const std::string& name);

// Joint illumination parameters: SH ambient plus SG light sources on a Vogel
// anchor set identified by (anchor count, k_nn).
struct MixLightParams {
  ShCoeffs sh;
  SgParams sg;
  int k_nn = 6;

  int anchor_count() const { return sg.n(); }
  AnchorSet Anchors() const { return VogelAnchors(anchor_count(), k_nn); }
};

struct Decomposition {
  MixLightParams params;
  Separation separation;
  EquirectImage light_sources;  // what the SG decomposition saw
  // Present when the distribution went through SLSparsemax.
  std::optional<CredibilityReport> sparsify_report;
};

// Separation into brightest pixels and ambient, SH fit of the ambient (see
// AmbientFit), SG decomposition of the light sources, optional SLSparsemax.
Decomposition Decompose(const EquirectImage& pano, const CodecConfig& config);

// Replaces the distribution with its SLSparsemax projection.
CredibilityReport SparsifyParams(MixLightParams& params);

// SH ambient (clamped at zero) plus the Gaussian light-source map.
EquirectImage Reconstruct(const MixLightParams& params, const GridGeometry& geom);

}  // namespace lumiparam

#endif  // LUMIPARAM_CODEC_H_
