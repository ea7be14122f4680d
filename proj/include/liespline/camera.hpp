// Copyright 2026 The liespline Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>

#include "liespline/lie.hpp"

namespace liespline {

/// Pinhole projection with fixed, pre-calibrated intrinsics and no
/// distortion.
struct PinholeCamera {
  double fx = 500.0;
  double fy = 500.0;
  double cx = 320.0;
  double cy = 320.0;
  int width = 640;
  int height = 480;

  template <class T>
  Eigen::Matrix<T, 2, 1> project(const Vec3<T>& p) const {
    const T inv_z = T(1.0) / p.z();
    return {fx * p.x() * inv_z + cx, fy * p.y() * inv_z + cy};
  }

  /// Positive depth and inside the image bounds.
  bool visible(const Eigen::Vector3d& p, double min_depth = 0.1) const {
    if (!(p.z() > min_depth)) return false;
    const Eigen::Vector2d pix = project<double>(p);
    return pix.x() >= 0.0 && pix.x() < width && pix.y() >= 0.0 && pix.y() < height;
  }
};

}  // namespace liespline
