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

#ifndef LUMIPARAM_SPHERE_H_
#define LUMIPARAM_SPHERE_H_

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace lumiparam {

template <typename T>
using Vector3 = Eigen::Matrix<T, 3, 1>;

template <typename T>
using VectorX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// N x 3 matrix holding one unit direction per row.
using DirectionList = Eigen::Matrix<double, Eigen::Dynamic, 3>;

// How pixel sums over an equirectangular grid are weighted. kSolidAngle
// integrates over the sphere; kPaperLiteral uses the unweighted pixel sums
// (uniform 4 pi / (w h) weight for SH projection, weight 1 for the light
// source totals).
enum class Weighting { kSolidAngle, kPaperLiteral };

// Equirectangular sampling grid. Rows run from the +Z pole (y = 0) to the -Z
// pole; columns sweep azimuth counter-clockwise from +X. Pixel centers sit at
//   polar   = pi * (y + 0.5) / height
//   azimuth = 2 pi * (x + 0.5) / width
class GridGeometry {
 public:
  GridGeometry(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  int pixel_count() const { return width_ * height_; }
  int index(int x, int y) const { return y * width_ + x; }

  double polar(int y) const { return M_PI * (y + 0.5) / height_; }
  double azimuth(int x) const { return 2.0 * M_PI * (x + 0.5) / width_; }

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;

 private:
  int width_;
  int height_;
};

// Unit direction at the center of pixel (x, y). Throws BoundsError when the
// pixel is outside the grid.
Eigen::Vector3d DirFromPixel(const GridGeometry& geom, int x, int y);

// Inverse of DirFromPixel: the pixel cell containing `dir`.
Eigen::Vector2i PixelFromDir(const GridGeometry& geom,
                             const Eigen::Vector3d& dir);

// Exact solid angle of any pixel cell in row y, in steradians. Row weights
// are proportional to sin(polar) and sum to 4 pi over the grid.
double SolidAngle(const GridGeometry& geom, int y);

// Per-pixel solid angles in row-major pixel order.
Eigen::VectorXd PixelSolidAngles(const GridGeometry& geom);

// Per-pixel sin(polar) in row-major order. This is the importance weight that
// de-emphasizes the poles in the map-space losses.
Eigen::VectorXd PixelSinPolar(const GridGeometry& geom);

// Pixel-center directions in row-major pixel order.
DirectionList PixelDirections(const GridGeometry& geom);

// Great-circle distance between unit vectors, in [0, pi].
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar GeodesicDistance(const Eigen::MatrixBase<DerivedA>& a,
                                           const Eigen::MatrixBase<DerivedB>& b) {
  using T = typename DerivedA::Scalar;
  const T c = std::clamp<T>(a.dot(b), T(-1), T(1));
  return std::acos(c);
}

// Fixed near-uniform directions on the sphere together with a directed
// k-nearest-neighbor graph over them.
struct AnchorSet {
  DirectionList dirs;
  std::vector<std::vector<int>> neighbors;
  int k_nn = 0;

  int count() const { return static_cast<int>(dirs.rows()); }
};

// Vogel (golden-angle) spiral with n points:
//   z_i = 1 - 2 (i + 0.5) / n,  azimuth_i = i * pi * (3 - sqrt(5)) mod 2 pi.
// Neighbors are the k_nn closest anchors by geodesic distance, ties going to
// the lower index. Throws InvalidArgument unless n >= 1 and 0 <= k_nn < n.
AnchorSet VogelAnchors(int n, int k_nn);

// Index of the anchor closest to `dir`; ties go to the lower index.
int NearestAnchor(const AnchorSet& anchors, const Eigen::Vector3d& dir);

// NearestAnchor for every pixel center of `geom`.
std::vector<int> NearestAnchorPerPixel(const AnchorSet& anchors,
                                       const GridGeometry& geom);

}  // namespace lumiparam

#endif  // LUMIPARAM_SPHERE_H_
