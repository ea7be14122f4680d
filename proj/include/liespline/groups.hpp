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

enum class GroupKind { kSo3, kSe3, kRd };

/// Group trait for SO(3) splines. Element is the 3x3 rotation matrix, the
/// ambient form used by the product-rule formulation coincides with it.
template <class T>
struct So3Group {
  using Scalar = T;
  static constexpr GroupKind kKind = GroupKind::kSo3;
  static constexpr int kDof = 3;
  static constexpr int kAmbient = 3;

  using Element = Mat3<T>;
  using Tangent = Vec3<T>;
  using Ambient = Mat3<T>;
  using AdjointMatrix = Mat3<T>;

  static Element identity() { return Element::Identity(); }
  static Element compose(const Element& a, const Element& b) { return a * b; }
  static Element inverse(const Element& a) { return a.transpose(); }
  static Element exp(const Tangent& v) { return so3_exp<T>(v); }
  static Tangent log(const Element& x) { return so3_log<T>(x); }
  static AdjointMatrix adjoint(const Element& x) { return x; }
  static AdjointMatrix adjoint_of_inverse(const Element& x) { return x.transpose(); }

  static Ambient ambient(const Element& x) { return x; }
  static Ambient ambient_inverse(const Element& x) { return x.transpose(); }
  static Ambient hat(const Tangent& v) { return so3_hat<T>(v); }
  static Tangent vee(const Ambient& m) { return so3_vee_unchecked<T>(m); }

  static Tangent zero_tangent() { return Tangent::Zero(); }
};

/// Group trait for SE(3) splines. Element keeps rotation and translation
/// separate; the 4x4 ambient form feeds the product-rule chains and the
/// group-derivative reconstruction.
template <class T>
struct Se3Group {
  using Scalar = T;
  static constexpr GroupKind kKind = GroupKind::kSe3;
  static constexpr int kDof = 6;
  static constexpr int kAmbient = 4;

  using Element = RigidTransform<T>;
  using Tangent = Vec6<T>;
  using Ambient = Mat4<T>;
  using AdjointMatrix = Mat6<T>;

  static Element identity() { return Element(); }
  static Element compose(const Element& a, const Element& b) { return a * b; }
  static Element inverse(const Element& a) { return a.inverse(); }
  static Element exp(const Tangent& v) { return se3_exp<T>(v); }
  static Tangent log(const Element& x) { return se3_log<T>(x); }
  static AdjointMatrix adjoint(const Element& x) { return se3_adjoint<T>(x); }
  static AdjointMatrix adjoint_of_inverse(const Element& x) {
    return se3_adjoint<T>(x.inverse());
  }

  static Ambient ambient(const Element& x) { return x.matrix(); }
  static Ambient ambient_inverse(const Element& x) { return x.inverse().matrix(); }
  static Ambient hat(const Tangent& v) { return se3_hat<T>(v); }
  static Tangent vee(const Ambient& m) { return se3_vee_unchecked<T>(m); }

  static Tangent zero_tangent() { return Tangent::Zero(); }
};

/// Group trait for R^d with vector addition; Exp and Log are identity maps
/// and the adjoint is the identity, so the spline recursions reduce to the
/// Euclidean cumulative form.
template <class T, int D>
struct RdGroup {
  using Scalar = T;
  static constexpr GroupKind kKind = GroupKind::kRd;
  static constexpr int kDof = D;
  static constexpr int kAmbient = D;

  using Element = Eigen::Matrix<T, D, 1>;
  using Tangent = Eigen::Matrix<T, D, 1>;
  using Ambient = Eigen::Matrix<T, D, D>;
  using AdjointMatrix = Eigen::Matrix<T, D, D>;

  static Element identity() { return Element::Zero(); }
  static Element compose(const Element& a, const Element& b) { return a + b; }
  static Element inverse(const Element& a) { return -a; }
  static Element exp(const Tangent& v) { return v; }
  static Tangent log(const Element& x) { return x; }
  static AdjointMatrix adjoint(const Element&) { return AdjointMatrix::Identity(); }
  static AdjointMatrix adjoint_of_inverse(const Element&) {
    return AdjointMatrix::Identity();
  }

  static Tangent zero_tangent() { return Tangent::Zero(); }
};

using So3d = So3Group<double>;
using Se3d = Se3Group<double>;
template <int D>
using Rdd = RdGroup<double, D>;

}  // namespace liespline
