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

#ifndef LUMIPARAM_SG_H_
#define LUMIPARAM_SG_H_

#include <Eigen/Dense>

#include "lumiparam/image.h"
#include "lumiparam/sh.h"
#include "lumiparam/sphere.h"

namespace lumiparam {

inline constexpr double kDefaultPercentile = 0.05;
inline constexpr double kSharpAngularSize = 0.0025;
inline constexpr double kSmoothAngularSize = 0.2423;
inline constexpr int kSmoothKernelCount = 9;

// Per-pixel light-source flags, row-major.
struct LightMask {
  GridGeometry geom;
  Eigen::Array<bool, Eigen::Dynamic, 1> bits;

  int count() const { return static_cast<int>(bits.count()); }
};

struct Separation {
  EquirectImage sources;
  EquirectImage ambient;
  LightMask mask;
};

// Number of pixels flagged as light source: ceil(percentile * pixel_count).
int SourcePixelCount(int pixel_count, double percentile);

// Splits `img` into its ceil(percentile * W * H) brightest pixels (the light
// sources) and the rest (ambient). Brightness is the channel mean; equal
// brightness goes to the lower row-major index. sources + ambient == img.
Separation Separate(const EquirectImage& img,
                    double percentile = kDefaultPercentile);

// Sparse light-source parameters on a fixed anchor set. Each anchor carries
// a Gaussian lobe exp((d_i . u - 1) / s) scaled by v_i = p_i * e * r.
struct SgParams {
  Eigen::VectorXd p;  // distribution over anchors, sums to 1
  double e = 0.0;     // total intensity
  Eigen::Vector3d r = Eigen::Vector3d::Zero();  // color ratios, unit norm
  double s = kSharpAngularSize;
  bool degenerate = false;  // no light-source energy; p and r are zero

  int n() const { return static_cast<int>(p.size()); }

  // N x 3 per-anchor RGB amplitudes v_i.
  Eigen::Matrix<double, Eigen::Dynamic, 3> Amplitudes() const {
    return p * (e * r.transpose());
  }

  friend bool operator==(const SgParams&, const SgParams&) = default;
};

// Light-source totals T_c = sum w I_L(c), e = |T|, r = T / e, and the
// distribution of brightness-times-weight over nearest anchors (ties to the
// lower index), normalized to sum 1. w is the pixel solid angle, or 1 in
// kPaperLiteral mode. An all-zero image yields zeroed degenerate params.
SgParams DecomposeSg(const EquirectImage& sources, const AnchorSet& anchors,
                     double s = kSharpAngularSize,
                     Weighting mode = Weighting::kSolidAngle);

// Reciprocal of the integral of exp((d . u - 1) / s) over a sphere of radius
// r: 1 / (2 pi s r^2 (1 - exp(-2 / s))).
double NormalizationQ(double s, double r = 1.0);

// Normalized Gaussian lobe q exp((d . u - 1) / s) for unit vectors.
inline double SgKernel(const Eigen::Vector3d& center, const Eigen::Vector3d& u,
                       double s, double q) {
  return q * std::exp((center.dot(u) - 1.0) / s);
}

// sum_i v_i q exp((d_i . u - 1) / s) at every pixel center.
EquirectImage ReconstructGaussianMap(const SgParams& params,
                                     const AnchorSet& anchors,
                                     const GridGeometry& geom);

// Same with explicit N x 3 per-anchor amplitudes.
EquirectImage ReconstructGaussianMap(
    const Eigen::Ref<const Eigen::Matrix<double, Eigen::Dynamic, 3>>& amplitudes,
    const AnchorSet& anchors, double s, const GridGeometry& geom);

// ||M (pred - gt)||_1 with M_i = 1 where gt_i == 0. The subgradient at
// pred_i == gt_i is 0.
LossResult<Eigen::VectorXd> MaskedL1Loss(const Eigen::VectorXd& pred,
                                         const Eigen::VectorXd& gt);

struct SgL2Losses {
  LossResult<Eigen::VectorXd> p;  // ||p^ - p||^2
  LossResult<double> e;           // (e^ - e)^2
  LossResult<Eigen::Vector3d> r;  // ||r^ - r||^2
};

SgL2Losses SgL2Loss(const SgParams& pred, const SgParams& gt);

// Entropic optimal transport between two anchor distributions.
struct TransportResult {
  double cost = 0.0;  // <plan, C>, the transport cost without the entropy term
  Eigen::MatrixXd plan;
  int iterations = 0;
  double marginal_error = 0.0;  // L1 row-marginal error before rounding
};

// Log-domain Sinkhorn between distributions `a` and `b` with cost matrix
// `cost` and regularization `epsilon`, warm started from a halving sequence
// of larger regularizations. Iterates until the marginal error drops below
// `tolerance` (relative to the total mass) or `max_iterations` is reached,
// then rounds the plan onto the exact marginals, which moves the cost by at
// most 2 max(cost) times the remaining error. Throws ConvergenceError when
// that error still exceeds 1e-3 of the mass.
TransportResult EntropicTransport(const Eigen::VectorXd& a,
                                  const Eigen::VectorXd& b,
                                  const Eigen::MatrixXd& cost, double epsilon,
                                  double tolerance = 1e-6,
                                  int max_iterations = 10000);

// Pairwise geodesic distances between anchors.
Eigen::MatrixXd AnchorDistanceMatrix(const AnchorSet& anchors);

// Spherical mover's loss: entropic OT cost with geodesic ground distance.
// Throws InvalidArgument unless both inputs are nonnegative, sum to 1 within
// 1e-6 and match the anchor count.
double SmlLoss(const Eigen::VectorXd& pred, const Eigen::VectorXd& gt,
               const AnchorSet& anchors, double epsilon);

// Fixed-position smooth Gaussian basis for ambient light: `count` Vogel
// kernels of angular size s, RGB amplitude per kernel.
struct SmoothSgFit {
  AnchorSet anchors;
  double s = kSmoothAngularSize;
  Eigen::Matrix<double, Eigen::Dynamic, 3> amplitudes;

  int parameter_count() const { return static_cast<int>(amplitudes.size()); }
};

// Solid-angle weighted linear least squares of the kernel amplitudes.
// Throws NumericalError on a singular system.
SmoothSgFit FitSmoothSg(const EquirectImage& ambient,
                        int count = kSmoothKernelCount,
                        double s = kSmoothAngularSize);

EquirectImage ReconstructSmoothSg(const SmoothSgFit& fit,
                                  const GridGeometry& geom);

}  // namespace lumiparam

#endif  // LUMIPARAM_SG_H_
