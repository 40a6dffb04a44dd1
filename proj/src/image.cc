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

#include "lumiparam/image.h"

#include "lumiparam/error.h"

namespace lumiparam {

EquirectImage::EquirectImage(const GridGeometry& geom, PixelMatrix pixels)
    : geom_(geom), pixels_(std::move(pixels)) {
  if (pixels_.rows() != geom_.pixel_count()) {
    throw InvalidArgument("pixel buffer has " +
                          std::to_string(pixels_.rows()) + " rows, grid needs " +
                          std::to_string(geom_.pixel_count()));
  }
}

Eigen::Vector3d IntegrateRadiance(const EquirectImage& img) {
  return (img.pixels().transpose() * PixelSolidAngles(img.geometry()));
}

}  // namespace lumiparam
