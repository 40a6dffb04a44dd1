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

#include "lumiparam/sphere.h"

#include <numeric>
#include <string>
#include <utility>

#include "lumiparam/error.h"

namespace lumiparam {

GridGeometry::GridGeometry(int width, int height)
    : width_(width), height_(height) {
  if (width < 2 || height < 1) {
    throw InvalidArgument("grid must be at least 2x1, got " +
                          std::to_string(width) + "x" +
                          std::to_string(height));
  }
}

Eigen::Vector3d DirFromPixel(const GridGeometry& geom, int x, int y) {
  if (x < 0 || x >= geom.width() || y < 0 || y >= geom.height()) {
    throw BoundsError("pixel (" + std::to_string(x) + ", " +
                      std::to_string(y) + ") outside " +
                      std::to_string(geom.width()) + "x" +
                      std::to_string(geom.height()) + " grid");
  }
  const double theta = geom.polar(y);
  const double phi = geom.azimuth(x);
  const double st = std::sin(theta);
  return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

Eigen::Vector2i PixelFromDir(const GridGeometry& geom,
                             const Eigen::Vector3d& dir) {
  const double theta = std::acos(std::clamp(dir.z() / dir.norm(), -1.0, 1.0));
  double phi = std::atan2(dir.y(), dir.x());
  if (phi < 0.0) phi += 2.0 * M_PI;
  int x = static_cast<int>(std::floor(phi / (2.0 * M_PI) * geom.width()));
  int y = static_cast<int>(std::floor(theta / M_PI * geom.height()));
  x = std::clamp(x, 0, geom.width() - 1);
  y = std::clamp(y, 0, geom.height() - 1);
  return {x, y};
}

double SolidAngle(const GridGeometry& geom, int y) {
  if (y < 0 || y >= geom.height()) {
    throw BoundsError("row " + std::to_string(y) + " outside grid of height " +
                      std::to_string(geom.height()));
  }
  // Exact area of the cell between polar angles pi y / H and pi (y + 1) / H:
  // cos(top) - cos(bottom) = 2 sin(pi / 2H) sin(center).
  return (2.0 * M_PI / geom.width()) * 2.0 * std::sin(M_PI / (2.0 * geom.height())) *
         std::sin(geom.polar(y));
}

Eigen::VectorXd PixelSolidAngles(const GridGeometry& geom) {
  Eigen::VectorXd w(geom.pixel_count());
  for (int y = 0; y < geom.height(); ++y) {
    w.segment(static_cast<Eigen::Index>(y) * geom.width(), geom.width())
        .setConstant(SolidAngle(geom, y));
  }
  return w;
}

Eigen::VectorXd PixelSinPolar(const GridGeometry& geom) {
  Eigen::VectorXd w(geom.pixel_count());
  for (int y = 0; y < geom.height(); ++y) {
    w.segment(static_cast<Eigen::Index>(y) * geom.width(), geom.width())
        .setConstant(std::sin(geom.polar(y)));
  }
  return w;
}

DirectionList PixelDirections(const GridGeometry& geom) {
  DirectionList dirs(geom.pixel_count(), 3);
  for (int y = 0; y < geom.height(); ++y) {
    for (int x = 0; x < geom.width(); ++x) {
      dirs.row(geom.index(x, y)) = DirFromPixel(geom, x, y).transpose();
    }
  }
  return dirs;
}

AnchorSet VogelAnchors(int n, int k_nn) {
  if (n < 1) throw InvalidArgument("anchor count must be >= 1");
  if (k_nn < 0 || k_nn >= n) {
    throw InvalidArgument("k_nn must satisfy 0 <= k_nn < n (k_nn = " +
                          std::to_string(k_nn) + ", n = " + std::to_string(n) +
                          ")");
  }
  const double golden_angle = M_PI * (3.0 - std::sqrt(5.0));
  AnchorSet anchors;
  anchors.k_nn = k_nn;
  anchors.dirs.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = std::fmod(i * golden_angle, 2.0 * M_PI);
    anchors.dirs.row(i) << r * std::cos(phi), r * std::sin(phi), z;
  }

  anchors.neighbors.resize(n);
  std::vector<std::pair<double, int>> by_distance;
  by_distance.reserve(n);
  for (int i = 0; i < n; ++i) {
    by_distance.clear();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      by_distance.emplace_back(
          GeodesicDistance(anchors.dirs.row(i), anchors.dirs.row(j)), j);
    }
    // Pair ordering breaks distance ties by index.
    std::partial_sort(by_distance.begin(), by_distance.begin() + k_nn,
                      by_distance.end());
    anchors.neighbors[i].reserve(k_nn);
    for (int k = 0; k < k_nn; ++k) {
      anchors.neighbors[i].push_back(by_distance[k].second);
    }
  }
  return anchors;
}

int NearestAnchor(const AnchorSet& anchors, const Eigen::Vector3d& dir) {
  // Largest dot product is the smallest geodesic distance; strict comparison
  // keeps the lowest index on ties.
  int best = 0;
  double best_dot = -2.0;
  for (int i = 0; i < anchors.count(); ++i) {
    const double d = anchors.dirs.row(i).dot(dir);
    if (d > best_dot) {
      best_dot = d;
      best = i;
    }
  }
  return best;
}

std::vector<int> NearestAnchorPerPixel(const AnchorSet& anchors,
                                       const GridGeometry& geom) {
  std::vector<int> out(geom.pixel_count());
  for (int y = 0; y < geom.height(); ++y) {
    for (int x = 0; x < geom.width(); ++x) {
      out[geom.index(x, y)] = NearestAnchor(anchors, DirFromPixel(geom, x, y));
    }
  }
  return out;
}

}  // namespace lumiparam
