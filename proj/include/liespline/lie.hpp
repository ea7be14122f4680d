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

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "liespline/dual.hpp"

namespace liespline {

template <class T>
using Mat3 = Eigen::Matrix<T, 3, 3>;
template <class T>
using Vec3 = Eigen::Matrix<T, 3, 1>;
template <class T>
using Mat4 = Eigen::Matrix<T, 4, 4>;
template <class T>
using Mat6 = Eigen::Matrix<T, 6, 6>;
template <class T>
using Vec6 = Eigen::Matrix<T, 6, 1>;

using Rotation3 = Mat3<double>;

// Below this squared tangent norm (‖v‖ < 1e-6) the trigonometric coefficients
// of Exp/Log/Jr are replaced by their second-order series; the closed forms
// divide by powers of ‖v‖.
inline constexpr double kSmallAngleSq = 1e-12;

// Log branch guard: trace(R) <= -1 + kLogTraceEps means the rotation angle is
// at pi, where the principal branch is not defined.
inline constexpr double kLogTraceEps = 1e-9;

// ---- so(3) ------------------------------------------------------------------

template <class T>
Mat3<T> so3_hat(const Vec3<T>& v) {
  Mat3<T> m;
  // clang-format off
  m << T(0.0), -v.z(),  v.y(),
        v.z(), T(0.0), -v.x(),
       -v.y(),  v.x(), T(0.0);
  // clang-format on
  return m;
}

template <class T>
Vec3<T> so3_vee_unchecked(const Mat3<T>& m) {
  return Vec3<T>(m(2, 1), m(0, 2), m(1, 0));
}

/// Strict inverse of the hat map; rejects matrices that are not
/// skew-symmetric within 1e-9.
inline Eigen::Vector3d so3_vee(const Eigen::Matrix3d& m) {
  if ((m + m.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("so3_vee: matrix is not skew-symmetric");
  }
  return so3_vee_unchecked(m);
}

/// Rodrigues formula. Total on R^3; series branch below the small-angle
/// threshold keeps it smooth through zero (including for dual scalars).
template <class T>
Mat3<T> so3_exp(const Vec3<T>& v) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const T t2 = v.squaredNorm();
  T a, b;  // sin(t)/t and (1-cos(t))/t^2
  if (scalar_value(t2) < kSmallAngleSq) {
    a = T(1.0) - t2 / T(6.0);
    b = T(0.5) - t2 / T(24.0);
  } else {
    const T t = sqrt(t2);
    a = sin(t) / t;
    b = (T(1.0) - cos(t)) / t2;
  }
  const Mat3<T> V = so3_hat(v);
  return (Mat3<T>::Identity() + a * V + b * (V * V)).eval();
}

/// Principal-branch logarithm. Throws when the rotation angle is at pi
/// (trace <= -1 + 1e-9); a silent branch flip there would corrupt difference
/// vectors downstream.
template <class T>
Vec3<T> so3_log(const Mat3<T>& R) {
  using std::atan2;
  using std::sqrt;
  const T tr = R.trace();
  if (scalar_value(tr) <= -1.0 + kLogTraceEps) {
    throw std::domain_error("so3_log: rotation angle at pi, log branch undefined");
  }
  Vec3<T> w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  w *= T(0.5);                    // sin(t) * axis
  const T c = (tr - T(1.0)) * T(0.5);  // cos(t)
  const T s2 = w.squaredNorm();        // sin(t)^2
  if (scalar_value(s2) < kSmallAngleSq) {
    // Angle near pi was rejected above, so this is the small-angle branch.
    return (w * (T(1.0) + s2 / T(6.0))).eval();
  }
  const T s = sqrt(s2);
  const T theta = atan2(s, c);
  return (w * (theta / s)).eval();
}

/// Right Jacobian of SO(3): I - (1-cos t)/t^2 V + (t - sin t)/t^3 V^2.
template <class T>
Mat3<T> so3_right_jacobian(const Vec3<T>& v) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const T t2 = v.squaredNorm();
  T b, c;
  if (scalar_value(t2) < kSmallAngleSq) {
    b = T(0.5) - t2 / T(24.0);
    c = T(1.0 / 6.0) - t2 / T(120.0);
  } else {
    const T t = sqrt(t2);
    b = (T(1.0) - cos(t)) / t2;
    c = (t - sin(t)) / (t2 * t);
  }
  const Mat3<T> V = so3_hat(v);
  return (Mat3<T>::Identity() - b * V + c * (V * V)).eval();
}

/// Closed-form inverse of the right Jacobian, valid for ‖v‖ < 2*pi.
template <class T>
Mat3<T> so3_right_jacobian_inv(const Vec3<T>& v) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const T t2 = v.squaredNorm();
  T c;
  if (scalar_value(t2) < kSmallAngleSq) {
    c = T(1.0 / 12.0) + t2 / T(720.0);
  } else {
    const T t = sqrt(t2);
    c = T(1.0) / t2 - (T(1.0) + cos(t)) / (T(2.0) * t * sin(t));
  }
  const Mat3<T> V = so3_hat(v);
  return (Mat3<T>::Identity() + T(0.5) * V + c * (V * V)).eval();
}

/// Left Jacobian (the V matrix coupling rotation and translation in the
/// SE(3) exponential): Jl(v) = Jr(-v).
template <class T>
Mat3<T> so3_left_jacobian(const Vec3<T>& v) {
  return so3_right_jacobian<T>((-v).eval());
}

template <class T>
Mat3<T> so3_left_jacobian_inv(const Vec3<T>& v) {
  return so3_right_jacobian_inv<T>((-v).eval());
}

/// Nearest rotation matrix in the Frobenius sense (polar projection).
inline Eigen::Matrix3d so3_project(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

inline bool is_rotation(const Eigen::Matrix3d& R, double tol = 1e-9) {
  return (R.transpose() * R - Eigen::Matrix3d::Identity()).norm() <= tol &&
         std::abs(R.determinant() - 1.0) <= tol;
}

// ---- SE(3) ------------------------------------------------------------------

/// Rigid transform stored as rotation block plus translation; the 4x4
/// homogeneous form is materialized only on demand.
template <class T>
struct RigidTransform {
  Mat3<T> R = Mat3<T>::Identity();
  Vec3<T> t = Vec3<T>::Zero();

  RigidTransform() = default;
  RigidTransform(const Mat3<T>& rotation, const Vec3<T>& translation)
      : R(rotation), t(translation) {}

  RigidTransform operator*(const RigidTransform& o) const {
    return {(R * o.R).eval(), (R * o.t + t).eval()};
  }

  RigidTransform inverse() const {
    Mat3<T> Rt = R.transpose();
    return {Rt, (-(Rt * t)).eval()};
  }

  Vec3<T> apply(const Vec3<T>& p) const { return R * p + t; }

  Mat4<T> matrix() const {
    Mat4<T> m = Mat4<T>::Zero();
    m.template topLeftCorner<3, 3>() = R;
    m.template topRightCorner<3, 1>() = t;
    m(3, 3) = T(1.0);
    return m;
  }
};

using RigidTransformd = RigidTransform<double>;

/// Tangent convention for SE(3): v = (rho, phi) with translational part first.
template <class T>
Mat4<T> se3_hat(const Vec6<T>& v) {
  Mat4<T> m = Mat4<T>::Zero();
  m.template topLeftCorner<3, 3>() = so3_hat<T>(v.template tail<3>().eval());
  m.template topRightCorner<3, 1>() = v.template head<3>();
  return m;
}

template <class T>
Vec6<T> se3_vee_unchecked(const Mat4<T>& m) {
  Vec6<T> v;
  v.template head<3>() = m.template topRightCorner<3, 1>();
  v.template tail<3>() = so3_vee_unchecked<T>(m.template topLeftCorner<3, 3>().eval());
  return v;
}

/// Strict inverse of the se(3) hat map; validates the algebra structure
/// (skew rotation block, zero bottom row) within 1e-9.
inline Vec6<double> se3_vee(const Eigen::Matrix4d& m) {
  const Eigen::Matrix3d rot = m.topLeftCorner<3, 3>();
  if ((rot + rot.transpose()).cwiseAbs().maxCoeff() > 1e-9 ||
      m.bottomRows<1>().cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("se3_vee: matrix does not have se(3) structure");
  }
  return se3_vee_unchecked(m);
}

template <class T>
RigidTransform<T> se3_exp(const Vec6<T>& v) {
  const Vec3<T> rho = v.template head<3>();
  const Vec3<T> phi = v.template tail<3>();
  return {so3_exp<T>(phi), (so3_left_jacobian<T>(phi) * rho).eval()};
}

template <class T>
Vec6<T> se3_log(const RigidTransform<T>& X) {
  const Vec3<T> phi = so3_log<T>(X.R);
  Vec6<T> v;
  v.template head<3>() = so3_left_jacobian_inv<T>(phi) * X.t;
  v.template tail<3>() = phi;
  return v;
}

/// Adjoint of SE(3) acting on (rho, phi) tangents.
template <class T>
Mat6<T> se3_adjoint(const RigidTransform<T>& X) {
  Mat6<T> adj = Mat6<T>::Zero();
  adj.template topLeftCorner<3, 3>() = X.R;
  adj.template topRightCorner<3, 3>() = so3_hat<T>(X.t) * X.R;
  adj.template bottomRightCorner<3, 3>() = X.R;
  return adj;
}

// ---- commutator ---------------------------------------------------------------

/// Matrix commutator [V, W] = VW - WV on Lie algebra elements.
template <class Derived>
auto commutator(const Eigen::MatrixBase<Derived>& V, const Eigen::MatrixBase<Derived>& W) {
  return (V * W - W * V).eval();
}

// ---- perturbation convention ---------------------------------------------------

/// Left-multiplicative update X <- Exp(delta) * X; the same convention the
/// derivative definitions use, so optimizer steps and Jacobians agree.
inline Rotation3 perturb(const Rotation3& X, const Eigen::Vector3d& delta) {
  return so3_exp<double>(delta) * X;
}

inline RigidTransformd perturb(const RigidTransformd& X, const Vec6<double>& delta) {
  return se3_exp<double>(delta) * X;
}

}  // namespace liespline
