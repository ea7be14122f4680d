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

#include "liespline/so3_jacobians.hpp"

#include <cmath>

#include "liespline/sampling.hpp"

namespace liespline {

namespace {

using Mat3d = Eigen::Matrix3d;
using Vec3d = Eigen::Vector3d;

Mat3d counted_mm(const Mat3d& a, const Mat3d& b, OpCounter* c) {
  if (c) c->mm_mults += 1;
  return a * b;
}

// Theorem blocks dw^(j+1)/dd_j and dwd^(j+1)/dd_j for one j.
void theorem_blocks(const SegmentContext<So3d>& ctx, const So3Intermediates& inter, int j,
                    Mat3d* b_omega, Mat3d* b_omegadot, OpCounter* c) {
  const double lam = ctx.lam.lambda[j];
  const double dl = ctx.lam.dlambda[j];
  const double ddl = ctx.lam.ddlambda[j];
  const Vec3d& dj = ctx.d[j - 1];
  const Mat3d at = ctx.A[j - 1].transpose();  // Exp(-lambda_j d_j)
  const Mat3d jr_neg = so3_right_jacobian<double>((-lam * dj).eval());

  const Mat3d aw = counted_mm(at, so3_hat(inter.omega[j]), c);
  *b_omega = lam * counted_mm(aw, jr_neg, c) + dl * Mat3d::Identity();

  const Mat3d awd = counted_mm(at, so3_hat(inter.omegadot[j]), c);
  *b_omegadot = dl * (so3_hat(inter.omega[j + 1]) - counted_mm(so3_hat(dj), *b_omega, c)) +
                lam * counted_mm(awd, jr_neg, c) + ddl * Mat3d::Identity();
}

}  // namespace

So3Intermediates so3_intermediates(const SegmentContext<So3d>& ctx) {
  So3Intermediates out;
  out.order = ctx.order;
  out.omega[1].setZero();
  out.omegadot[1].setZero();
  for (int m = 1; m < ctx.order; ++m) {
    const Mat3d at = ctx.A[m - 1].transpose();
    out.omega[m + 1] = at * out.omega[m] + ctx.lam.dlambda[m] * ctx.d[m - 1];
    out.omegadot[m + 1] = ctx.lam.dlambda[m] * out.omega[m + 1].cross(ctx.d[m - 1]) +
                          at * out.omegadot[m] + ctx.lam.ddlambda[m] * ctx.d[m - 1];
  }
  return out;
}

Eigen::Matrix3d jac_exp_vector(double lambda, const Eigen::Vector3d& d,
                               const Eigen::Vector3d& w) {
  const Mat3d e = so3_exp<double>((-lambda * d).eval());
  const Mat3d jr = so3_right_jacobian<double>((-lambda * d).eval());
  return lambda * e * so3_hat(w) * jr;
}

DJacobians local_jacobians(const SegmentContext<So3d>& ctx, const So3Intermediates& inter,
                           const std::optional<Eigen::Vector3d>& rho_override,
                           OpCounter* counter) {
  const int k = ctx.order;
  DJacobians out;
  out.order = k;
  out.value = evaluate(ctx);
  out.rho = rho_override ? *rho_override : so3_log<double>(out.value);
  out.rho_near_branch = out.rho.norm() > M_PI - 0.1;
  out.jr_inv_rho = so3_right_jacobian_inv(out.rho);

  std::array<Mat3d, kMaxOrder> b_omega, b_omegadot;
  for (int j = 1; j < k; ++j) {
    theorem_blocks(ctx, inter, j, &b_omega[j - 1], &b_omegadot[j - 1], counter);
  }

  Mat3d p = Mat3d::Identity();
  Vec3d s = Vec3d::Zero();
  for (int j = k - 1; j >= 1; --j) {
    const double lam = ctx.lam.lambda[j];
    const Vec3d& dj = ctx.d[j - 1];
    const Mat3d jr_pos = so3_right_jacobian<double>((lam * dj).eval());
    out.d_rho_dd[j - 1] =
        lam * counted_mm(counted_mm(out.jr_inv_rho, p, counter), jr_pos, counter);
    out.d_omega_dd[j - 1] = counted_mm(p, b_omega[j - 1], counter);
    out.d_omegadot_dd[j - 1] = counted_mm(p, b_omegadot[j - 1], counter) -
                               counted_mm(so3_hat(s), out.d_omega_dd[j - 1], counter);
    s += ctx.lam.dlambda[j] * (p * dj);
    if (counter) counter->mv_mults += 1;
    p = counted_mm(p, ctx.A[j - 1].transpose(), counter);
  }
  return out;
}

KnotJacobians knot_jacobians(const SegmentContext<So3d>& ctx, const DJacobians& local,
                             OpCounter* counter) {
  const int k = ctx.order;
  KnotJacobians out;
  out.order = k;
  out.rho_near_branch = local.rho_near_branch;
  for (int j = 0; j < k; ++j) {
    out.d_rho[j].setZero();
    out.d_omega[j].setZero();
    out.d_omegadot[j].setZero();
    if (j >= 1) {
      // dd_j / dR_{i+j} = Jr^{-1}(d_j) R_{i+j}^T
      const Mat3d dd = counted_mm(so3_right_jacobian_inv(ctx.d[j - 1]),
                                  ctx.knot[j].transpose(), counter);
      out.d_rho[j] += counted_mm(local.d_rho_dd[j - 1], dd, counter);
      out.d_omega[j] += counted_mm(local.d_omega_dd[j - 1], dd, counter);
      out.d_omegadot[j] += counted_mm(local.d_omegadot_dd[j - 1], dd, counter);
    }
    if (j <= k - 2) {
      // dd_{j+1} / dR_{i+j} = -Jr^{-1}(d_{j+1}) R_{i+j+1}^T
      const Mat3d dd = -counted_mm(so3_right_jacobian_inv(ctx.d[j]),
                                   ctx.knot[j + 1].transpose(), counter);
      out.d_rho[j] += counted_mm(local.d_rho_dd[j], dd, counter);
      out.d_omega[j] += counted_mm(local.d_omega_dd[j], dd, counter);
      out.d_omegadot[j] += counted_mm(local.d_omegadot_dd[j], dd, counter);
    }
  }
  // Explicit dependence of the value on R_i: rho(delta) = Log(Exp(delta) R(u))
  // expands to rho + Jr^{-1}(rho) R(u)^T delta. Velocity and acceleration have
  // no explicit R_i term.
  out.d_rho[0] += counted_mm(local.jr_inv_rho, local.value.transpose(), counter);
  return out;
}

Eigen::Matrix3d omega_level_jacobian(const SegmentContext<So3d>& ctx,
                                     const So3Intermediates& inter, int level, int j) {
  if (level <= j) return Mat3d::Zero();
  Mat3d bw, bwd;
  theorem_blocks(ctx, inter, j, &bw, &bwd, nullptr);
  Mat3d jw = bw;
  for (int l = j + 2; l <= level; ++l) {
    jw = ctx.A[l - 2].transpose() * jw;
  }
  return jw;
}

Eigen::Matrix3d acc_jacobian_direct(const SegmentContext<So3d>& ctx,
                                    const So3Intermediates& inter, int j) {
  const int k = ctx.order;
  Mat3d jw, jwd;
  theorem_blocks(ctx, inter, j, &jw, &jwd, nullptr);
  for (int l = j + 2; l <= k; ++l) {
    const Mat3d at = ctx.A[l - 2].transpose();  // A_{l-1}^T
    const Mat3d jw_next = at * jw;
    jwd = -ctx.lam.dlambda[l - 1] * so3_hat(ctx.d[l - 2]) * jw_next + at * jwd;
    jw = jw_next;
  }
  return jwd;
}

OpCounter jacobian_opcount(int order) {
  RngStream rng(271828, "jacobians/opcount");
  auto s = random_walk_spline<So3d>(rng, order, order + 3, 0.0, 1.0, 0.4);
  const auto ctx = locate(s, 0.5 * (s.time_min() + s.time_max()));
  const So3Intermediates inter = so3_intermediates(ctx);
  OpCounter c;
  const DJacobians local = local_jacobians(ctx, inter, std::nullopt, &c);
  (void)knot_jacobians(ctx, local, &c);
  return c;
}

}  // namespace liespline
