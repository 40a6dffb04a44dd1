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

#ifndef LUMIPARAM_SH_H_
#define LUMIPARAM_SH_H_

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "lumiparam/error.h"
#include "lumiparam/image.h"
#include "lumiparam/sphere.h"

namespace lumiparam {

// Real spherical harmonics, orthonormal over the unit sphere, without the
// Condon-Shortley phase:
//   B_k^0  = K_k^0 P_k^0(cos t)
//   B_k^m  = sqrt(2) K_k^m cos(m p) P_k^m(cos t)     m > 0
//   B_k^-m = sqrt(2) K_k^m sin(m p) P_k^m(cos t)     m > 0
// with K_k^m = sqrt((2k + 1) / (4 pi) * (k - m)! / (k + m)!).
// Coefficient (k, m) lives at flat index k (k + 1) + m.

constexpr int ShCoeffCount(int order) { return (order + 1) * (order + 1); }
constexpr int ShIndex(int k, int m) { return k * (k + 1) + m; }
// Band k of flat index i.
inline int ShBand(int index) { return static_cast<int>(std::sqrt(static_cast<double>(index))); }

// All (order + 1)^2 basis values at unit direction `d`.
template <typename T>
VectorX<T> ShBasis(int order, const Vector3<T>& d) {
  VectorX<T> out(ShCoeffCount(order));
  const T x = d.x(), y = d.y(), z = d.z();
  const T sqrt2 = std::sqrt(T(2));
  // Real and imaginary parts of (x + iy)^m = sin^m(t) e^{imp}.
  T cos_part = T(1), sin_part = T(0);
  // P_m^m / sin^m(t) = (2m - 1)!!
  T diagonal = T(1);
  for (int m = 0; m <= order; ++m) {
    if (m > 0) diagonal *= T(2 * m - 1);
    T q_prev2 = T(0);
    T q_prev = T(0);
    for (int k = m; k <= order; ++k) {
      T q;
      if (k == m) {
        q = diagonal;
      } else if (k == m + 1) {
        q = z * T(2 * m + 1) * diagonal;
      } else {
        q = (T(2 * k - 1) * z * q_prev - T(k + m - 1) * q_prev2) / T(k - m);
      }
      q_prev2 = q_prev;
      q_prev = q;

      T ratio = T(1);  // (k - m)! / (k + m)!
      for (int j = k - m + 1; j <= k + m; ++j) ratio /= T(j);
      const T norm = std::sqrt(T(2 * k + 1) / T(4 * M_PI) * ratio);
      if (m == 0) {
        out[ShIndex(k, 0)] = norm * q;
      } else {
        out[ShIndex(k, m)] = sqrt2 * norm * q * cos_part;
        out[ShIndex(k, -m)] = sqrt2 * norm * q * sin_part;
      }
    }
    const T next_cos = cos_part * x - sin_part * y;
    sin_part = cos_part * y + sin_part * x;
    cos_part = next_cos;
  }
  return out;
}

// Single basis function B_k^m at `d`. Throws InvalidArgument for k < 0 or
// |m| > k.
template <typename T>
T EvalShBasis(int k, int m, const Vector3<T>& d) {
  if (k < 0 || m < -k || m > k) {
    throw InvalidArgument("invalid SH index (k = " + std::to_string(k) +
                          ", m = " + std::to_string(m) + ")");
  }
  return ShBasis<T>(k, d)[ShIndex(k, m)];
}

// Basis sampled at every row of `dirs`: dirs.rows() x (order + 1)^2.
Eigen::MatrixXd ShBasisMatrix(int order, const DirectionList& dirs);

// One row per basis function, one column per RGB channel.
using ShMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;

struct ShCoeffs {
  int order = 0;
  ShMatrix coeffs;

  ShCoeffs() : coeffs(ShMatrix::Zero(1, 3)) {}
  ShCoeffs(int order, ShMatrix coeffs);
  static ShCoeffs Zero(int order);

  int value_count() const { return static_cast<int>(coeffs.size()); }

  // Copy truncated or zero-padded to `new_order`.
  ShCoeffs WithOrder(int new_order) const;

  friend bool operator==(const ShCoeffs& a, const ShCoeffs& b) {
    return a.order == b.order && a.coeffs == b.coeffs;
  }
};

// Radiance of the SH expansion in direction `dir`.
Eigen::Vector3d EvalSh(const ShCoeffs& sh, const Eigen::Vector3d& dir);

// Projection onto the basis. kSolidAngle sums I B w over pixels with w the
// pixel solid angle; kPaperLiteral uses w = 4 pi / (width height).
ShCoeffs ProjectSh(const EquirectImage& img, int order,
                   Weighting mode = Weighting::kSolidAngle);

// Evaluates the expansion at every pixel center. The raw expansion can ring
// below zero; pass clamp_negative for a radiometric image.
EquirectImage ReconstructSh(const ShCoeffs& sh, const GridGeometry& geom,
                            bool clamp_negative = false);

// Clamped-cosine convolution (irradiance) of the environment, as order-2
// coefficients: band 0 x pi, band 1 x 2pi/3, band 2 x pi/4. Bands above 2
// are dropped; inputs below order 2 are zero-padded.
ShCoeffs RenderIrradiance(const ShCoeffs& radiance);

// Per-band factors used by RenderIrradiance.
double IrradianceBandScale(int band);

// Weighted least-squares fit of an order-`order` expansion. Pixels are
// weighted by solid angle (or uniformly in kPaperLiteral mode) times the
// optional row-major `pixel_weights`, e.g. 0 for excluded pixels. Throws
// InvalidArgument for order > 10 and NumericalError when the normal
// equations are singular.
ShCoeffs FitShLeastSquares(const EquirectImage& img, int order,
                           const Eigen::VectorXd* pixel_weights = nullptr,
                           Weighting mode = Weighting::kSolidAngle);

// Loss value with its gradient with respect to the prediction.
template <typename Gradient>
struct LossResult {
  double value = 0.0;
  Gradient gradient;
};

// sum_c sum_k 1 / (2k + 1) sum_m (pred - gt)^2.
LossResult<ShMatrix> ShCoeffLoss(const ShCoeffs& pred, const ShCoeffs& gt);

// 1 / (3 w h) sum_{c, pixel} sin(polar) (sum_{k,m} (pred - gt) B)^2.
LossResult<ShMatrix> ShReconstructionLoss(const ShCoeffs& pred,
                                          const ShCoeffs& gt,
                                          const GridGeometry& geom);

// Reconstruction loss between the irradiance maps of pred and gt. Entries of
// pred above band 2 get zero gradient.
LossResult<ShMatrix> ShRenderingLoss(const ShCoeffs& pred, const ShCoeffs& gt,
                                     const GridGeometry& geom);

}  // namespace lumiparam

#endif  // LUMIPARAM_SH_H_
