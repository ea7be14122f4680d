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
#include <array>
#include <optional>

#include "liespline/op_counter.hpp"
#include "liespline/spline.hpp"

namespace liespline {

/// Intermediate velocity/acceleration levels of the SO(3) recursions,
/// omega[j] = w^(j) for j = 1..k. The per-level values feed the analytic
/// Jacobian blocks.
struct So3Intermediates {
  int order = 0;
  std::array<Eigen::Vector3d, kMaxOrder + 1> omega{};
  std::array<Eigen::Vector3d, kMaxOrder + 1> omegadot{};
};

So3Intermediates so3_intermediates(const SegmentContext<So3d>& ctx);

/// d/dd Exp(-lambda d) w = lambda Exp(-lambda d) hat(w) Jr(-lambda d).
Eigen::Matrix3d jac_exp_vector(double lambda, const Eigen::Vector3d& d,
                               const Eigen::Vector3d& w);

/// Jacobian blocks of the spline value rho = Log(R(u)), the velocity and the
/// acceleration with respect to the difference vectors d_j, j = 1..k-1
/// (stored at index j-1). Computed by the downward accumulator recursion
/// (P_j, s_j), linear in the spline order.
struct DJacobians {
  int order = 0;
  // Set when ||rho|| > pi - 0.1; Jr^{-1}(rho) is ill-conditioned there and the
  // d_rho blocks should not be trusted.
  bool rho_near_branch = false;
  Eigen::Vector3d rho = Eigen::Vector3d::Zero();
  Eigen::Matrix3d value = Eigen::Matrix3d::Identity();       // R(u)
  Eigen::Matrix3d jr_inv_rho = Eigen::Matrix3d::Identity();  // Jr^{-1}(rho)
  std::array<Eigen::Matrix3d, kMaxOrder> d_rho_dd{};
  std::array<Eigen::Matrix3d, kMaxOrder> d_omega_dd{};
  std::array<Eigen::Matrix3d, kMaxOrder> d_omegadot_dd{};
};

/// rho_override replaces Log(R(u)) by the log of a pre-multiplied value
/// (e.g. the tangent error Log(M^{-1} R(u)) of a value residual); the
/// derivation only requires the prefix to be independent of the d_j.
DJacobians local_jacobians(const SegmentContext<So3d>& ctx, const So3Intermediates& inter,
                           const std::optional<Eigen::Vector3d>& rho_override = std::nullopt,
                           OpCounter* counter = nullptr);

/// Per-knot 3x3 Jacobian blocks of rho, omega and omegadot with respect to
/// the left-multiplicative perturbation Exp(delta) R_{i+j} of each of the k
/// contributing control points (index j = 0..k-1).
struct KnotJacobians {
  int order = 0;
  bool rho_near_branch = false;
  std::array<Eigen::Matrix3d, kMaxOrder> d_rho{};
  std::array<Eigen::Matrix3d, kMaxOrder> d_omega{};
  std::array<Eigen::Matrix3d, kMaxOrder> d_omegadot{};
};

KnotJacobians knot_jacobians(const SegmentContext<So3d>& ctx, const DJacobians& local,
                             OpCounter* counter = nullptr);

/// dw^(level)/dd_j; exactly zero for level <= j (d_j first enters at j+1).
Eigen::Matrix3d omega_level_jacobian(const SegmentContext<So3d>& ctx,
                                     const So3Intermediates& inter, int level, int j);

/// dwd/dd_j by the direct recursion
///   dwd^(l)/dd_j = -dlambda_{l-1} D_{l-1} dw^(l)/dd_j + A_{l-1}^T dwd^(l-1)/dd_j,
/// the non-accumulator counterpart of the accumulator form; kept as a second
/// route for equivalence checks.
Eigen::Matrix3d acc_jacobian_direct(const SegmentContext<So3d>& ctx,
                                    const So3Intermediates& inter, int j);

/// Instrumented counts of one local_jacobians + knot_jacobians evaluation at
/// the given order, on a fixed representative spline.
OpCounter jacobian_opcount(int order);

}  // namespace liespline
