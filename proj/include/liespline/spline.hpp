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

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "liespline/blending.hpp"
#include "liespline/groups.hpp"
#include "liespline/op_counter.hpp"

namespace liespline {

enum class Formulation { kRecursive, kBaseline };

inline const char* to_string(Formulation f) {
  return f == Formulation::kRecursive ? "recursive" : "baseline";
}

/// Uniform cumulative B-spline on a Lie group: control points X_0..X_N on the
/// time grid t_i = t0 + i*dt, order k. Evaluation is valid on
/// [t0, t0 + (N-k+2)*dt); there is no extrapolation.
template <class G>
struct Spline {
  using Group = G;
  using Element = typename G::Element;

  std::vector<Element> knots;
  double t0 = 0.0;
  double dt = 1.0;
  int order = 4;

  int segment_count() const { return static_cast<int>(knots.size()) - order + 1; }
  double time_min() const { return t0; }
  double time_max() const { return t0 + segment_count() * dt; }  // exclusive
};

/// Everything needed to evaluate one spline segment: the k active control
/// points, the difference vectors d_j = Log(X_{i+j-1}^{-1} X_{i+j}) and
/// A_j = Exp(lambda_j d_j) for j = 1..k-1 (stored at index j-1), and the
/// basis weights. Shared across value/velocity/acceleration/jerk queries so
/// d_j and A_j are computed once per query point.
template <class G>
struct SegmentContext {
  using Element = typename G::Element;
  using Tangent = typename G::Tangent;

  int i = 0;      // segment index
  int order = 0;  // k
  LambdaBundle lam;
  std::array<Element, kMaxOrder> knot{};
  std::array<Tangent, kMaxOrder> d{};
  std::array<Element, kMaxOrder> A{};
};

/// Builds a segment context from k consecutive control points and a
/// normalized segment time u in [0, 1].
template <class G>
SegmentContext<G> make_context(const typename G::Element* active, int k, int segment_index,
                               double u) {
  using T = typename G::Scalar;
  SegmentContext<G> ctx;
  ctx.i = segment_index;
  ctx.order = k;
  ctx.lam = lambda_bundle(k, u);
  for (int m = 0; m < k; ++m) ctx.knot[m] = active[m];
  for (int m = 1; m < k; ++m) {
    ctx.d[m - 1] = G::log(G::compose(G::inverse(active[m - 1]), active[m]));
    ctx.A[m - 1] = G::exp((T(ctx.lam.lambda[m]) * ctx.d[m - 1]).eval());
  }
  return ctx;
}

/// Segment lookup with the half-open convention: a time exactly on a knot
/// boundary belongs to the segment on its right.
template <class G>
SegmentContext<G> locate(const Spline<G>& s, double t) {
  const int k = s.order;
  if (static_cast<int>(s.knots.size()) < k) {
    throw std::invalid_argument("locate: spline needs at least k control points");
  }
  const double sn = (t - s.t0) / s.dt;
  const int i = static_cast<int>(std::floor(sn));
  if (!(sn >= 0.0) || i >= s.segment_count()) {
    throw std::out_of_range("locate: t=" + std::to_string(t) + " outside valid interval [" +
                            std::to_string(s.time_min()) + ", " +
                            std::to_string(s.time_max()) + ")");
  }
  return make_context<G>(s.knots.data() + i, k, i, sn - i);
}

/// Spline value X_i * A_1 * ... * A_{k-1}.
template <class G>
typename G::Element evaluate(const SegmentContext<G>& ctx) {
  typename G::Element x = ctx.knot[0];
  for (int m = 1; m < ctx.order; ++m) x = G::compose(x, ctx.A[m - 1]);
  return x;
}

// ---- velocity -----------------------------------------------------------------

/// Velocity by the O(k) recurrence
///   w^(1) = 0,  w^(j) = Adj(A_{j-1}^{-1}) w^(j-1) + dlambda_{j-1} d_{j-1}.
/// The ledger covers the cost of producing Xdot: k-1 adjoint applications,
/// k-1 vector additions and the single product X * hat(w).
template <class G>
typename G::Tangent velocity_recursive(const SegmentContext<G>& ctx, OpCounter* c = nullptr) {
  using T = typename G::Scalar;
  typename G::Tangent w = G::zero_tangent();
  for (int m = 1; m < ctx.order; ++m) {
    if constexpr (G::kKind == GroupKind::kRd) {
      w = (w + T(ctx.lam.dlambda[m]) * ctx.d[m - 1]).eval();
      if (c) c->adds += 1;
    } else {
      w = (G::adjoint_of_inverse(ctx.A[m - 1]) * w).eval();
      if (c) c->mv_mults += 1;
      w = (w + T(ctx.lam.dlambda[m]) * ctx.d[m - 1]).eval();
      if (c) c->adds += 1;
    }
  }
  if constexpr (G::kKind != GroupKind::kRd) {
    if (c) {
      const auto xdot = (G::ambient(evaluate(ctx)) * G::hat(w)).eval();
      (void)xdot;
      c->mm_mults += 1;
    }
  }
  return w;
}

/// Velocity by the product-rule sum
///   Xdot = X_i * sum_j (prod_{l<j} A_l) Adot_j (prod_{l>j} A_l),
/// Adot_j = dlambda_j A_j D_j, resolved to w = (X^{-1} Xdot)^vee. Each chain
/// is built with fresh products, (k-1)^2 + 1 matrix multiplications in total;
/// the resolution products are outside the budget. For R^d the independent
/// route is the non-cumulative matrix representation.
template <class G>
typename G::Tangent velocity_baseline(const SegmentContext<G>& ctx, OpCounter* c = nullptr) {
  using T = typename G::Scalar;
  const int k = ctx.order;
  if constexpr (G::kKind == GroupKind::kRd) {
    const BlendingMatrices& bm = blending_matrices(k);
    const Eigen::VectorXd coeff = bm.m * monomials(k, ctx.lam.u, 1);
    typename G::Tangent w = G::zero_tangent();
    for (int n = 0; n < k; ++n) w = (w + T(coeff[n]) * ctx.knot[n]).eval();
    return w;
  } else {
    using Ambient = typename G::Ambient;
    std::array<Ambient, kMaxOrder> Am{}, Dm{};
    for (int m = 1; m < k; ++m) {
      Am[m - 1] = G::ambient(ctx.A[m - 1]);
      Dm[m - 1] = G::hat(ctx.d[m - 1]);
    }
    Ambient S = Ambient::Zero();
    for (int j = 1; j < k; ++j) {
      Ambient adot = (Am[j - 1] * Dm[j - 1]).eval();
      if (c) c->mm_mults += 1;
      adot *= T(ctx.lam.dlambda[j]);
      Ambient chain;
      bool first = true;
      for (int l = 1; l < k; ++l) {
        const Ambient& f = (l == j) ? adot : Am[l - 1];
        if (first) {
          chain = f;
          first = false;
        } else {
          chain = (chain * f).eval();
          if (c) c->mm_mults += 1;
        }
      }
      if (j == 1) {
        S = chain;
      } else {
        S = (S + chain).eval();
        if (c) c->adds += 1;
      }
    }
    const Ambient xdot = (G::ambient(ctx.knot[0]) * S).eval();
    if (c) c->mm_mults += 1;
    const Ambient xinv = G::ambient_inverse(evaluate(ctx));
    return G::vee((xinv * xdot).eval());
  }
}

// ---- acceleration ----------------------------------------------------------------

/// Acceleration recurrence for a general Lie group,
///   wd^(j) = dlambda_{j-1} [hat(w^(j)), D_{j-1}]_vee
///            + Adj(A_{j-1}^{-1}) wd^(j-1) + ddlambda_{j-1} d_{j-1},
/// run jointly with the velocity recursion (whose cost belongs to the
/// velocity ledger). The ledger here covers the incremental cost of Xddot:
/// 2k matrix products, k-1 adjoint applications, 3k-2 additions.
template <class G>
typename G::Tangent acceleration_recursive_generic(const SegmentContext<G>& ctx,
                                                   OpCounter* c = nullptr,
                                                   typename G::Tangent* velocity_out = nullptr) {
  using T = typename G::Scalar;
  using Ambient = typename G::Ambient;
  const int k = ctx.order;
  typename G::Tangent w = G::zero_tangent();
  typename G::Tangent wd = G::zero_tangent();
  for (int m = 1; m < k; ++m) {
    const auto adj = G::adjoint_of_inverse(ctx.A[m - 1]);
    w = (adj * w + T(ctx.lam.dlambda[m]) * ctx.d[m - 1]).eval();
    const Ambient wn = G::hat(w);
    const Ambient dm = G::hat(ctx.d[m - 1]);
    Ambient b1 = (wn * dm).eval();
    if (c) c->mm_mults += 1;
    Ambient b2 = (dm * wn).eval();
    if (c) c->mm_mults += 1;
    const Ambient bracket = (b1 - b2).eval();
    if (c) c->adds += 1;
    wd = (adj * wd).eval();
    if (c) c->mv_mults += 1;
    wd = (wd + T(ctx.lam.dlambda[m]) * G::vee(bracket)).eval();
    if (c) c->adds += 1;
    wd = (wd + T(ctx.lam.ddlambda[m]) * ctx.d[m - 1]).eval();
    if (c) c->adds += 1;
  }
  if (c) {
    const Ambient wk = G::hat(w);
    Ambient s = (wk * wk).eval();
    c->mm_mults += 1;
    s = (s + G::hat(wd)).eval();
    c->adds += 1;
    const Ambient xddot = (G::ambient(evaluate(ctx)) * s).eval();
    (void)xddot;
    c->mm_mults += 1;
  }
  if (velocity_out) *velocity_out = w;
  return wd;
}

/// SO(3) specialization of the acceleration recurrence,
///   wd^(j) = dlambda_{j-1} w^(j) x d_{j-1} + A_{j-1}^T wd^(j-1)
///            + ddlambda_{j-1} d_{j-1}.
/// Cross products count as matrix-vector applications; the ledger totals are
/// 2 matrix products, 2(k-1) matrix-vector products and 2k-1 additions.
template <class T>
Vec3<T> acceleration_recursive_so3(const SegmentContext<So3Group<T>>& ctx, OpCounter* c = nullptr,
                                   Vec3<T>* velocity_out = nullptr) {
  const int k = ctx.order;
  Vec3<T> w = Vec3<T>::Zero();
  Vec3<T> wd = Vec3<T>::Zero();
  for (int m = 1; m < k; ++m) {
    w = (ctx.A[m - 1].transpose() * w + T(ctx.lam.dlambda[m]) * ctx.d[m - 1]).eval();
    const Vec3<T> cr = w.cross(ctx.d[m - 1]);
    if (c) c->mv_mults += 1;
    wd = (ctx.A[m - 1].transpose() * wd).eval();
    if (c) c->mv_mults += 1;
    wd = (wd + T(ctx.lam.dlambda[m]) * cr + T(ctx.lam.ddlambda[m]) * ctx.d[m - 1]).eval();
    if (c) c->adds += 2;
  }
  if (c) {
    const Mat3<T> wk = so3_hat(w);
    Mat3<T> s = (wk * wk).eval();
    c->mm_mults += 1;
    s = (s + so3_hat(wd)).eval();
    c->adds += 1;
    const Mat3<T> xddot = (evaluate(ctx) * s).eval();
    (void)xddot;
    c->mm_mults += 1;
  }
  if (velocity_out) *velocity_out = w;
  return wd;
}

template <class G>
typename G::Tangent acceleration_recursive(const SegmentContext<G>& ctx, OpCounter* c = nullptr,
                                           typename G::Tangent* velocity_out = nullptr) {
  using T = typename G::Scalar;
  if constexpr (G::kKind == GroupKind::kSo3) {
    return acceleration_recursive_so3<T>(ctx, c, velocity_out);
  } else if constexpr (G::kKind == GroupKind::kRd) {
    typename G::Tangent w = G::zero_tangent();
    typename G::Tangent wd = G::zero_tangent();
    for (int m = 1; m < ctx.order; ++m) {
      w = (w + T(ctx.lam.dlambda[m]) * ctx.d[m - 1]).eval();
      wd = (wd + T(ctx.lam.ddlambda[m]) * ctx.d[m - 1]).eval();
      if (c) c->adds += 1;
    }
    if (velocity_out) *velocity_out = w;
    return wd;
  } else {
    return acceleration_recursive_generic<G>(ctx, c, velocity_out);
  }
}

/// Xddot by the full double product rule over the A_j chain, cubic in the
/// spline order. Every chain forms its dotted factors afresh; products in
/// this path are accounted as multiply-accumulate pairs (one matrix product
/// plus one addition each), 0.5*k^2*(k-1) of either in total. The final
/// X_i * S product is outside the budget.
template <class G>
typename G::Ambient second_derivative_baseline(const SegmentContext<G>& ctx,
                                               OpCounter* c = nullptr) {
  static_assert(G::kKind != GroupKind::kRd);
  using T = typename G::Scalar;
  using Ambient = typename G::Ambient;
  const int k = ctx.order;
  std::array<Ambient, kMaxOrder> Am{}, Dm{};
  for (int m = 1; m < k; ++m) {
    Am[m - 1] = G::ambient(ctx.A[m - 1]);
    Dm[m - 1] = G::hat(ctx.d[m - 1]);
  }
  const auto fma = [&](const Ambient& a, const Ambient& b) {
    if (c) {
      c->mm_mults += 1;
      c->adds += 1;
    }
    return (a * b).eval();
  };
  Ambient S = Ambient::Zero();
  bool have = false;
  for (int j = 1; j < k; ++j) {
    // Addot_j = ddlambda_j A_j D_j + dlambda_j^2 A_j D_j^2
    const Ambient t1 = fma(Am[j - 1], Dm[j - 1]);
    const Ambient t2 = fma(t1, Dm[j - 1]);
    const Ambient fdd =
        (T(ctx.lam.ddlambda[j]) * t1 +
         T(ctx.lam.dlambda[j] * ctx.lam.dlambda[j]) * t2).eval();
    Ambient chain;
    bool first = true;
    for (int l = 1; l < k; ++l) {
      const Ambient& f = (l == j) ? fdd : Am[l - 1];
      if (first) {
        chain = f;
        first = false;
      } else {
        chain = fma(chain, f);
      }
    }
    S = have ? (S + chain).eval() : chain;
    have = true;
  }
  for (int j = 1; j < k; ++j) {
    for (int j2 = j + 1; j2 < k; ++j2) {
      const Ambient aj = fma(Am[j - 1], Dm[j - 1]);
      const Ambient aj2 = fma(Am[j2 - 1], Dm[j2 - 1]);
      Ambient chain;
      bool first = true;
      for (int l = 1; l < k; ++l) {
        const Ambient* f = (l == j) ? &aj : (l == j2) ? &aj2 : &Am[l - 1];
        if (first) {
          chain = *f;
          first = false;
        } else {
          chain = fma(chain, *f);
        }
      }
      const T scale = T(2.0 * ctx.lam.dlambda[j] * ctx.lam.dlambda[j2]);
      S = (S + scale * chain).eval();
    }
  }
  return (G::ambient(ctx.knot[0]) * S).eval();
}

/// Acceleration via the product-rule chains, resolved to the tangent by
/// wd = (X^{-1} Xddot - hat(w)^2)^vee with w from the baseline route.
template <class G>
typename G::Tangent acceleration_baseline(const SegmentContext<G>& ctx, OpCounter* c = nullptr) {
  using T = typename G::Scalar;
  const int k = ctx.order;
  if constexpr (G::kKind == GroupKind::kRd) {
    const BlendingMatrices& bm = blending_matrices(k);
    const Eigen::VectorXd coeff = bm.m * monomials(k, ctx.lam.u, 2);
    typename G::Tangent wd = G::zero_tangent();
    for (int n = 0; n < k; ++n) wd = (wd + T(coeff[n]) * ctx.knot[n]).eval();
    return wd;
  } else {
    using Ambient = typename G::Ambient;
    const Ambient xddot = second_derivative_baseline(ctx, c);
    const Ambient xinv = G::ambient_inverse(evaluate(ctx));
    const typename G::Tangent w = velocity_baseline(ctx);
    const Ambient wk = G::hat(w);
    return G::vee((xinv * xddot - wk * wk).eval());
  }
}

// ---- jerk -----------------------------------------------------------------------

/// Third-derivative recurrence,
///   wdd^(j) = Adj(A_{j-1}^{-1}) wdd^(j-1) + dddlambda_{j-1} d_{j-1}
///     + [ddlambda hat(w^(j)) + 2 dlambda hat(wd^(j))
///        - dlambda^2 [hat(w^(j)), D_{j-1}], D_{j-1}]_vee,
/// with the cross-product form on SO(3). Linear in k like the lower orders.
template <class G>
typename G::Tangent jerk_recursive(const SegmentContext<G>& ctx, OpCounter* c = nullptr,
                                   typename G::Tangent* velocity_out = nullptr,
                                   typename G::Tangent* acceleration_out = nullptr) {
  using T = typename G::Scalar;
  const int k = ctx.order;
  typename G::Tangent w = G::zero_tangent();
  typename G::Tangent wd = G::zero_tangent();
  typename G::Tangent wdd = G::zero_tangent();
  for (int m = 1; m < k; ++m) {
    const T dl = T(ctx.lam.dlambda[m]);
    const T ddl = T(ctx.lam.ddlambda[m]);
    const T dddl = T(ctx.lam.dddlambda[m]);
    if constexpr (G::kKind == GroupKind::kRd) {
      w = (w + dl * ctx.d[m - 1]).eval();
      wd = (wd + ddl * ctx.d[m - 1]).eval();
      wdd = (wdd + dddl * ctx.d[m - 1]).eval();
      if (c) c->adds += 1;
    } else if constexpr (G::kKind == GroupKind::kSo3) {
      const Mat3<T> at = ctx.A[m - 1].transpose();
      w = (at * w + dl * ctx.d[m - 1]).eval();
      const Vec3<T> cr = w.cross(ctx.d[m - 1]);
      wd = (at * wd + dl * cr + ddl * ctx.d[m - 1]).eval();
      const Vec3<T> inner = (ddl * w + T(2.0) * dl * wd - dl * dl * cr).eval();
      wdd = (at * wdd + dddl * ctx.d[m - 1] + inner.cross(ctx.d[m - 1])).eval();
      if (c) {
        c->mv_mults += 3;
        c->adds += 4;
      }
    } else {
      using Ambient = typename G::Ambient;
      const auto adj = G::adjoint_of_inverse(ctx.A[m - 1]);
      w = (adj * w + dl * ctx.d[m - 1]).eval();
      const Ambient wn = G::hat(w);
      const Ambient dm = G::hat(ctx.d[m - 1]);
      const Ambient br_wd = commutator(wn, dm);
      wd = (adj * wd + dl * G::vee(br_wd) + ddl * ctx.d[m - 1]).eval();
      const Ambient inner = (ddl * wn + T(2.0) * dl * G::hat(wd) - dl * dl * br_wd).eval();
      wdd = (adj * wdd + dddl * ctx.d[m - 1] + G::vee(commutator(inner, dm))).eval();
      if (c) {
        c->mm_mults += 4;
        c->mv_mults += 2;
        c->adds += 6;
      }
    }
  }
  if (velocity_out) *velocity_out = w;
  if (acceleration_out) *acceleration_out = wd;
  return wdd;
}

// ---- bundled queries -------------------------------------------------------------

/// Value plus the requested tangent derivatives at one query point.
/// Derivatives are with respect to u unless time_scaled, in which case they
/// carry 1/dt, 1/dt^2, 1/dt^3. The ops ledger accumulates the per-order
/// budgets of the chosen formulation.
template <class G>
struct DerivativeBundle {
  typename G::Element value{};
  std::optional<typename G::Tangent> velocity;
  std::optional<typename G::Tangent> acceleration;
  std::optional<typename G::Tangent> jerk;
  bool time_scaled = false;
  double dt = 1.0;
  OpCounter ops;
};

template <class G>
DerivativeBundle<G> derivatives(const Spline<G>& s, double t, int max_order,
                                Formulation f = Formulation::kRecursive,
                                bool time_scaled = false) {
  if (max_order < 0 || max_order > 3) {
    throw std::invalid_argument("derivatives: max_order must be in [0, 3]");
  }
  if (f == Formulation::kBaseline && max_order > 2) {
    throw std::invalid_argument("derivatives: baseline formulation supports max_order <= 2");
  }
  const SegmentContext<G> ctx = locate(s, t);
  DerivativeBundle<G> b;
  b.time_scaled = time_scaled;
  b.dt = s.dt;
  b.value = evaluate(ctx);
  if (max_order >= 1) {
    b.velocity = (f == Formulation::kRecursive) ? velocity_recursive(ctx, &b.ops)
                                                : velocity_baseline(ctx, &b.ops);
  }
  if (max_order >= 2) {
    b.acceleration = (f == Formulation::kRecursive) ? acceleration_recursive(ctx, &b.ops)
                                                    : acceleration_baseline(ctx, &b.ops);
  }
  if (max_order >= 3) {
    b.jerk = jerk_recursive(ctx, &b.ops);
  }
  if (time_scaled) {
    const double inv = 1.0 / s.dt;
    if (b.velocity) *b.velocity = (*b.velocity * inv).eval();
    if (b.acceleration) *b.acceleration = (*b.acceleration * (inv * inv)).eval();
    if (b.jerk) *b.jerk = (*b.jerk * (inv * inv * inv)).eval();
  }
  return b;
}

/// Algebra-valued time derivatives of the group element:
///   Xdot = X hat(w), Xddot = X (hat(w)^2 + hat(wd)),
///   Xdddot = X (hat(w)^3 + 2 hat(w) hat(wd) + hat(wd) hat(w) + hat(wdd)).
template <class G>
struct GroupDerivatives {
  typename G::Ambient xdot{};
  typename G::Ambient xddot{};
  typename G::Ambient xdddot{};
  int max_order = 0;
};

template <class G>
GroupDerivatives<G> reconstruct_group_derivative(const DerivativeBundle<G>& b) {
  static_assert(G::kKind != GroupKind::kRd,
                "group-derivative reconstruction applies to matrix Lie groups");
  using Ambient = typename G::Ambient;
  if (!b.velocity) {
    throw std::invalid_argument("reconstruct_group_derivative: bundle has no velocity");
  }
  GroupDerivatives<G> out;
  const Ambient x = G::ambient(b.value);
  const Ambient w = G::hat(*b.velocity);
  out.xdot = (x * w).eval();
  out.max_order = 1;
  if (b.acceleration) {
    const Ambient wd = G::hat(*b.acceleration);
    out.xddot = (x * (w * w + wd)).eval();
    out.max_order = 2;
    if (b.jerk) {
      const Ambient wdd = G::hat(*b.jerk);
      out.xdddot =
          (x * (w * w * w + 2.0 * (w * wd) + wd * w + wdd)).eval();
      out.max_order = 3;
    }
  }
  return out;
}

}  // namespace liespline
