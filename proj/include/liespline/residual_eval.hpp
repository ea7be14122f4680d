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

#include <stdexcept>

#include "liespline/dual.hpp"
#include "liespline/problem.hpp"

namespace liespline {
namespace detail {

template <class T>
using VecXT = Eigen::Matrix<T, Eigen::Dynamic, 1, 0, 6, 1>;

template <class G>
std::pair<int, double> locate_segment(const Spline<G>& s, double t) {
  const double sn = (t - s.t0) / s.dt;
  const int i = static_cast<int>(std::floor(sn));
  if (!(sn >= 0.0) || i >= s.segment_count()) {
    throw std::out_of_range("residual timestamp " + std::to_string(t) +
                            " outside the spline window [" + std::to_string(s.time_min()) +
                            ", " + std::to_string(s.time_max()) + ")");
  }
  return {i, sn - i};
}

// Zero-valued tangent increment whose entries carry the dual seed.
template <class T, int Dim>
Eigen::Matrix<T, Dim, 1> seeded_delta() {
  Eigen::Matrix<T, Dim, 1> d;
  for (int i = 0; i < Dim; ++i) d[i] = T(0.0, i);
  return d;
}

template <class T>
Mat3<T> cast_rotation(const Rotation3& r) {
  return r.cast<T>();
}

template <class T>
RigidTransform<T> cast_rigid(const RigidTransformd& x) {
  return {x.R.cast<T>().eval(), x.t.cast<T>().eval()};
}

// Contexts over the active knots with an optional left-multiplicative seeded
// perturbation of one knot (seeded < 0: none; only meaningful for dual T).
template <class T>
SegmentContext<So3Group<T>> so3_context(const Spline<So3d>& s, int i, double u, int seeded) {
  std::array<Mat3<T>, kMaxOrder> active;
  for (int m = 0; m < s.order; ++m) active[m] = cast_rotation<T>(s.knots[i + m]);
  if constexpr (!std::is_same_v<T, double>) {
    if (seeded >= 0 && seeded < s.order) {
      active[seeded] = (so3_exp<T>(seeded_delta<T, 3>()) * active[seeded]).eval();
    }
  }
  return make_context<So3Group<T>>(active.data(), s.order, i, u);
}

template <class T>
SegmentContext<RdGroup<T, 3>> r3_context(const Spline<Rdd<3>>& s, int i, double u, int seeded) {
  std::array<Vec3<T>, kMaxOrder> active;
  for (int m = 0; m < s.order; ++m) active[m] = s.knots[i + m].cast<T>();
  if constexpr (!std::is_same_v<T, double>) {
    if (seeded >= 0 && seeded < s.order) active[seeded] += seeded_delta<T, 3>();
  }
  return make_context<RdGroup<T, 3>>(active.data(), s.order, i, u);
}

template <class T>
SegmentContext<Se3Group<T>> se3_context(const Spline<Se3d>& s, int i, double u, int seeded) {
  std::array<RigidTransform<T>, kMaxOrder> active;
  for (int m = 0; m < s.order; ++m) active[m] = cast_rigid<T>(s.knots[i + m]);
  if constexpr (!std::is_same_v<T, double>) {
    if (seeded >= 0 && seeded < s.order) {
      active[seeded] = se3_exp<T>(seeded_delta<T, 6>()) * active[seeded];
    }
  }
  return make_context<Se3Group<T>>(active.data(), s.order, i, u);
}

// Vector parameter with optional seeding (bias, gravity).
template <class T>
Vec3<T> vec_param(const Eigen::Vector3d& v, bool seeded) {
  Vec3<T> out = v.cast<T>();
  if constexpr (!std::is_same_v<T, double>) {
    if (seeded) out += seeded_delta<T, 3>();
  }
  return out;
}

template <class T>
RigidTransform<T> extrinsic_param(const RigidTransformd& x, bool seeded) {
  RigidTransform<T> out = cast_rigid<T>(x);
  if constexpr (!std::is_same_v<T, double>) {
    if (seeded) out = se3_exp<T>(seeded_delta<T, 6>()) * out;
  }
  return out;
}

template <class T, class G>
typename G::Tangent velocity_by(const SegmentContext<G>& ctx, Formulation f) {
  return f == Formulation::kRecursive ? velocity_recursive(ctx) : velocity_baseline(ctx);
}

template <class T, class G>
typename G::Tangent acceleration_by(const SegmentContext<G>& ctx, Formulation f) {
  return f == Formulation::kRecursive ? acceleration_recursive(ctx) : acceleration_baseline(ctx);
}

// ---- kernels -------------------------------------------------------------------
// `seeded` is the position of the seeded parameter block within the
// residual's active-block list (-1 for a plain evaluation).

template <class T>
VecXT<T> value_residual_so3(const Problem& p, const ResidualBlock& rb, int seeded) {
  const auto [i, u] = locate_segment(*p.so3, rb.t);
  const auto ctx = so3_context<T>(*p.so3, i, u, seeded);
  Rotation3 meas;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) meas(r, c) = rb.measurement[3 * r + c];
  const Mat3<T> err = (cast_rotation<T>(meas).transpose() * evaluate(ctx)).eval();
  return so3_log<T>(err);
}

template <class T>
VecXT<T> value_residual_se3(const Problem& p, const ResidualBlock& rb, int seeded) {
  const auto [i, u] = locate_segment(*p.se3, rb.t);
  const auto ctx = se3_context<T>(*p.se3, i, u, seeded);
  Rotation3 mr;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) mr(r, c) = rb.measurement[3 * r + c];
  const RigidTransformd meas{mr, rb.measurement.tail<3>()};
  return se3_log<T>(cast_rigid<T>(meas).inverse() * evaluate(ctx));
}

template <class T, int N>
Eigen::Matrix<T, N, 1> fixed_measurement(const Eigen::VectorXd& m, int offset = 0) {
  Eigen::Matrix<T, N, 1> out;
  for (int i = 0; i < N; ++i) out[i] = T(m[offset + i]);
  return out;
}

template <class T>
VecXT<T> value_residual_r3(const Problem& p, const ResidualBlock& rb, int seeded) {
  const auto [i, u] = locate_segment(*p.r3, rb.t);
  const auto ctx = r3_context<T>(*p.r3, i, u, seeded);
  return (evaluate(ctx) - fixed_measurement<T, 3>(rb.measurement)).eval();
}

// Velocity / acceleration measurements are time scaled.
template <class T, class G, class Ctx>
VecXT<T> derivative_residual(const Ctx& ctx, const ResidualBlock& rb, double dt, Formulation f) {
  const auto meas = fixed_measurement<T, G::kDof>(rb.measurement);
  if (rb.kind == ResidualKind::kVelocity) {
    return ((velocity_by<T, G>(ctx, f) / dt) - meas).eval();
  }
  return ((acceleration_by<T, G>(ctx, f) / (dt * dt)) - meas).eval();
}

template <class T>
VecXT<T> gyro_residual(const Problem& p, const ResidualBlock& rb, int seeded, Formulation f) {
  const int k_blocks = p.is_split() ? p.so3->order : p.se3->order;
  const Vec3<T> bg = vec_param<T>(p.calib->b_g, seeded == k_blocks);
  Vec3<T> w;
  if (p.is_split()) {
    const auto [i, u] = locate_segment(*p.so3, rb.t);
    const auto ctx = so3_context<T>(*p.so3, i, u, seeded);
    w = velocity_by<T, So3Group<T>>(ctx, f) / p.so3->dt;
  } else {
    const auto [i, u] = locate_segment(*p.se3, rb.t);
    const auto ctx = se3_context<T>(*p.se3, i, u, seeded);
    w = (velocity_by<T, Se3Group<T>>(ctx, f).template tail<3>() / p.se3->dt).eval();
  }
  return (w - fixed_measurement<T, 3>(rb.measurement) + bg).eval();
}

template <class T>
VecXT<T> accel_residual(const Problem& p, const ResidualBlock& rb, int seeded, Formulation f) {
  if (p.is_split()) {
    const int k = p.so3->order;
    // active blocks: rot knots [0,k), trans knots [k,2k), gravity 2k, bias 2k+1
    const auto [i, u] = locate_segment(*p.so3, rb.t);
    const auto rot_ctx =
        so3_context<T>(*p.so3, i, u, (seeded >= 0 && seeded < k) ? seeded : -1);
    const auto [it, ut] = locate_segment(*p.r3, rb.t);
    const auto trans_ctx =
        r3_context<T>(*p.r3, it, ut, (seeded >= k && seeded < 2 * k) ? seeded - k : -1);
    const Vec3<T> g = vec_param<T>(p.calib->g, seeded == 2 * k);
    const Vec3<T> ba = vec_param<T>(p.calib->b_a, seeded == 2 * k + 1);
    const Vec3<T> tdd =
        (acceleration_recursive(trans_ctx) / (p.r3->dt * p.r3->dt)).eval();
    const Mat3<T> r = evaluate(rot_ctx);
    return (r.transpose() * (tdd + g) - fixed_measurement<T, 3>(rb.measurement) + ba).eval();
  }
  const int k = p.se3->order;
  const auto [i, u] = locate_segment(*p.se3, rb.t);
  const auto ctx = se3_context<T>(*p.se3, i, u, (seeded >= 0 && seeded < k) ? seeded : -1);
  const Vec3<T> g = vec_param<T>(p.calib->g, seeded == k);
  const Vec3<T> ba = vec_param<T>(p.calib->b_a, seeded == k + 1);
  // tdd is the translation column of Xddot.
  Mat4<T> xdd;
  if (f == Formulation::kRecursive) {
    Vec6<T> w;
    const Vec6<T> wd = acceleration_recursive(ctx, nullptr, &w);
    const Mat4<T> s = (se3_hat(w) * se3_hat(w) + se3_hat(wd)).eval();
    xdd = (evaluate(ctx).matrix() * s).eval();
  } else {
    xdd = second_derivative_baseline(ctx);
  }
  const Vec3<T> tdd =
      (xdd.template topRightCorner<3, 1>() / (p.se3->dt * p.se3->dt)).eval();
  const Mat3<T> r = evaluate(ctx).R;
  return (r.transpose() * (tdd + g) - fixed_measurement<T, 3>(rb.measurement) + ba).eval();
}

template <class T>
VecXT<T> projection_residual(const Problem& p, const ResidualBlock& rb, int seeded) {
  const Vec3<T> point = rb.point.cast<T>();
  Vec3<T> in_imu;
  int extrinsic_ordinal;
  if (p.is_split()) {
    const int k = p.so3->order;
    const auto [i, u] = locate_segment(*p.so3, rb.t);
    const auto rot_ctx =
        so3_context<T>(*p.so3, i, u, (seeded >= 0 && seeded < k) ? seeded : -1);
    const auto [it, ut] = locate_segment(*p.r3, rb.t);
    const auto trans_ctx =
        r3_context<T>(*p.r3, it, ut, (seeded >= k && seeded < 2 * k) ? seeded - k : -1);
    const Mat3<T> r = evaluate(rot_ctx);
    const Vec3<T> t = evaluate(trans_ctx);
    in_imu = (r.transpose() * (point - t)).eval();
    extrinsic_ordinal = 2 * k;
  } else {
    const int k = p.se3->order;
    const auto [i, u] = locate_segment(*p.se3, rb.t);
    const auto ctx = se3_context<T>(*p.se3, i, u, (seeded >= 0 && seeded < k) ? seeded : -1);
    const RigidTransform<T> x = evaluate(ctx);
    in_imu = x.inverse().apply(point);
    extrinsic_ordinal = k;
  }
  const RigidTransform<T> tic = extrinsic_param<T>(p.calib->T_ic.at(rb.camera_id),
                                                   seeded == extrinsic_ordinal);
  const Vec3<T> in_cam = tic.inverse().apply(in_imu);
  return (p.camera.project(in_cam) - fixed_measurement<T, 2>(rb.measurement)).eval();
}

/// Single entry point: residual value for T = double, or the seeded-block
/// directional derivatives for dual T.
template <class T>
VecXT<T> eval_residual(const Problem& p, const ResidualBlock& rb, Formulation f,
                       int seeded = -1) {
  switch (rb.kind) {
    case ResidualKind::kValue:
      if (p.se3) return value_residual_se3<T>(p, rb, seeded);
      if (p.so3) return value_residual_so3<T>(p, rb, seeded);
      return value_residual_r3<T>(p, rb, seeded);
    case ResidualKind::kVelocity:
    case ResidualKind::kAcceleration: {
      if (p.se3) {
        const auto [i, u] = locate_segment(*p.se3, rb.t);
        return derivative_residual<T, Se3Group<T>>(se3_context<T>(*p.se3, i, u, seeded), rb,
                                                   p.se3->dt, f);
      }
      if (p.so3) {
        const auto [i, u] = locate_segment(*p.so3, rb.t);
        return derivative_residual<T, So3Group<T>>(so3_context<T>(*p.so3, i, u, seeded), rb,
                                                   p.so3->dt, f);
      }
      const auto [i, u] = locate_segment(*p.r3, rb.t);
      return derivative_residual<T, RdGroup<T, 3>>(r3_context<T>(*p.r3, i, u, seeded), rb,
                                                   p.r3->dt, f);
    }
    case ResidualKind::kGyro:
      return gyro_residual<T>(p, rb, seeded, f);
    case ResidualKind::kAccel:
      return accel_residual<T>(p, rb, seeded, f);
    case ResidualKind::kProjection:
      return projection_residual<T>(p, rb, seeded);
  }
  throw std::logic_error("eval_residual: unknown residual kind");
}

}  // namespace detail
}  // namespace liespline
