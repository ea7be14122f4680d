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
#include <cstdint>
#include <string>

namespace liespline {

// Supported spline orders. Above 12 the factorial sums in the blending
// matrix entries are no longer exact in 64-bit integer arithmetic.
inline constexpr int kMinOrder = 2;
inline constexpr int kMaxOrder = 12;

/// Exact rational entry of a blending matrix (reduced, den > 0).
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;
};

/// Uniform B-spline blending matrix M of order k together with its cumulative
/// counterpart. Entries are derived in exact integer arithmetic (the
/// alternating binomial sum cancels badly in floating point) and converted to
/// doubles last.
struct BlendingMatrices {
  int order = 0;
  Eigen::MatrixXd m;      // M, k x k
  Eigen::MatrixXd m_cum;  // cumulative matrix, k x k; row 0 is e0
  std::array<std::array<Rational, kMaxOrder>, kMaxOrder> m_exact{};
  std::array<std::array<Rational, kMaxOrder>, kMaxOrder> m_cum_exact{};
};

/// Blending matrices for order k, computed once per k and cached immutably.
/// Safe under concurrent first access. Throws std::invalid_argument outside
/// the supported range [2, 12].
const BlendingMatrices& blending_matrices(int order);

/// Basis weight vector lambda(u) = Mcum * (1, u, u^2, ...) and its
/// u-derivatives up to third order. All derivatives are with respect to the
/// normalized segment time u; callers apply 1/dt time scaling.
struct LambdaBundle {
  int order = 0;
  double u = 0.0;
  std::array<double, kMaxOrder> lambda{};
  std::array<double, kMaxOrder> dlambda{};
  std::array<double, kMaxOrder> ddlambda{};
  std::array<double, kMaxOrder> dddlambda{};
};

LambdaBundle lambda_bundle(int order, double u);

/// Monomial vector (1, u, u^2, ...) differentiated deriv_order times;
/// entry n is n!/(n-r)! * u^(n-r) for n >= r, else 0.
Eigen::VectorXd monomials(int order, double u, int deriv_order);

/// De Boor-Cox coefficient B_{i,j}(t) on the uniform grid t_i = t0 + i*dt,
/// evaluated by the two-branch recurrence (degree j; order j+1). Reference
/// path used as an oracle against the matrix representation.
double deboor_cox(int i, int j, double t, double t0, double dt);

}  // namespace liespline
