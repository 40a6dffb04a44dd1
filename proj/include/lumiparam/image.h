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

#ifndef LUMIPARAM_IMAGE_H_
#define LUMIPARAM_IMAGE_H_

#include <utility>

#include <Eigen/Dense>

#include "lumiparam/sphere.h"

namespace lumiparam {

// Row-major (W*H) x 3 RGB matrix; row index = y * W + x.
using PixelMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

// Linear-radiance RGB panorama on an equirectangular grid.
//
// Radiometric images (decoded files, separated sources) are finite and
// nonnegative. Intermediate images such as raw SH reconstructions may ring
// below zero; IsRadiometric() tells the two apart.
class EquirectImage {
 public:
  explicit EquirectImage(const GridGeometry& geom)
      : geom_(geom), pixels_(PixelMatrix::Zero(geom.pixel_count(), 3)) {}
  EquirectImage(const GridGeometry& geom, PixelMatrix pixels);

  const GridGeometry& geometry() const { return geom_; }
  int width() const { return geom_.width(); }
  int height() const { return geom_.height(); }

  const PixelMatrix& pixels() const { return pixels_; }
  PixelMatrix& pixels() { return pixels_; }

  auto pixel(int x, int y) { return pixels_.row(geom_.index(x, y)); }
  auto pixel(int x, int y) const { return pixels_.row(geom_.index(x, y)); }

  bool IsFinite() const { return pixels_.allFinite(); }
  bool IsRadiometric() const {
    return IsFinite() && (pixels_.array() >= 0.0).all();
  }

  // Per-pixel brightness, the channel mean.
  Eigen::VectorXd Brightness() const { return pixels_.rowwise().mean(); }

 private:
  GridGeometry geom_;
  PixelMatrix pixels_;
};

inline EquirectImage operator+(const EquirectImage& a, const EquirectImage& b) {
  return EquirectImage(a.geometry(), a.pixels() + b.pixels());
}

inline EquirectImage operator*(double s, const EquirectImage& a) {
  return EquirectImage(a.geometry(), s * a.pixels());
}

// Per-channel solid-angle integral of the map.
Eigen::Vector3d IntegrateRadiance(const EquirectImage& img);

}  // namespace lumiparam

#endif  // LUMIPARAM_IMAGE_H_
