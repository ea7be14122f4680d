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

#include "liespline/blending.hpp"

#include <mutex>
#include <numeric>
#include <stdexcept>

namespace liespline {

namespace {

std::int64_t factorial(int n) {
  std::int64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

std::int64_t binomial(int n, int s) {
  if (s < 0 || s > n) return 0;
  std::int64_t b = 1;
  for (int i = 0; i < s; ++i) {
    b = b * (n - i) / (i + 1);  // exact: product of i+1 consecutive integers
  }
  return b;
}

std::int64_t ipow(std::int64_t base, int e) {
  // 0^0 = 1 by the convention of the entry formula.
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

Rational reduced(std::int64_t num, std::int64_t den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return {num, den == 0 ? 1 : den};
}

Rational rational_sum(const Rational& a, const Rational& b) {
  return reduced(a.num * b.den + b.num * a.den, a.den * b.den);
}

// Entry m_{s,n} of the order-k blending matrix,
//   m_{s,n} = C(k-1,n)/(k-1)! * sum_{l=s}^{k-1} (-1)^{l-s} C(k,l-s) (k-1-l)^{k-1-n},
// kept as an exact rational (the sum is an integer; the denominator divides
// (k-1)!).
Rational blending_entry(int k, int s, int n) {
  std::int64_t acc = 0;
  for (int l = s; l <= k - 1; ++l) {
    const std::int64_t sign = ((l - s) % 2 == 0) ? 1 : -1;
    acc += sign * binomial(k, l - s) * ipow(k - 1 - l, k - 1 - n);
  }
  return reduced(binomial(k - 1, n) * acc, factorial(k - 1));
}

BlendingMatrices build(int k) {
  BlendingMatrices out;
  out.order = k;
  out.m.setZero(k, k);
  out.m_cum.setZero(k, k);
  for (int s = 0; s < k; ++s) {
    for (int n = 0; n < k; ++n) {
      out.m_exact[s][n] = blending_entry(k, s, n);
      out.m(s, n) = out.m_exact[s][n].to_double();
    }
  }
  for (int j = 0; j < k; ++j) {
    for (int n = 0; n < k; ++n) {
      Rational acc{0, 1};
      for (int s = j; s < k; ++s) acc = rational_sum(acc, out.m_exact[s][n]);
      out.m_cum_exact[j][n] = acc;
      out.m_cum(j, n) = acc.to_double();
    }
  }
  return out;
}

}  // namespace

std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

const BlendingMatrices& blending_matrices(int order) {
  if (order < kMinOrder || order > kMaxOrder) {
    throw std::invalid_argument("blending_matrices: order must be in [2, 12], got " +
                                std::to_string(order));
  }
  static std::array<BlendingMatrices, kMaxOrder + 1> cache;
  static std::array<std::once_flag, kMaxOrder + 1> flags;
  std::call_once(flags[order], [order] { cache[order] = build(order); });
  return cache[order];
}

LambdaBundle lambda_bundle(int order, double u) {
  const BlendingMatrices& bm = blending_matrices(order);
  LambdaBundle out;
  out.order = order;
  out.u = u;
  // Monomial powers and their derivatives, accumulated in one pass.
  std::array<double, kMaxOrder> p0{}, p1{}, p2{}, p3{};
  double up = 1.0;
  for (int n = 0; n < order; ++n) {
    p0[n] = up;  // u^n
    up *= u;
  }
  for (int n = 1; n < order; ++n) p1[n] = n * p0[n - 1];
  for (int n = 2; n < order; ++n) p2[n] = n * (n - 1) * p0[n - 2];
  for (int n = 3; n < order; ++n) p3[n] = n * (n - 1) * (n - 2) * p0[n - 3];
  for (int j = 0; j < order; ++j) {
    double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
    for (int n = 0; n < order; ++n) {
      const double c = bm.m_cum(j, n);
      a0 += c * p0[n];
      a1 += c * p1[n];
      a2 += c * p2[n];
      a3 += c * p3[n];
    }
    out.lambda[j] = a0;
    out.dlambda[j] = a1;
    out.ddlambda[j] = a2;
    out.dddlambda[j] = a3;
  }
  return out;
}

Eigen::VectorXd monomials(int order, double u, int deriv_order) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(order);
  for (int n = deriv_order; n < order; ++n) {
    double coeff = 1.0;
    for (int r = 0; r < deriv_order; ++r) coeff *= n - r;
    v[n] = coeff * std::pow(u, n - deriv_order);
  }
  return v;
}

double deboor_cox(int i, int j, double t, double t0, double dt) {
  const auto knot = [&](int idx) { return t0 + idx * dt; };
  if (j == 0) {
    return (knot(i) <= t && t < knot(i + 1)) ? 1.0 : 0.0;
  }
  const double left = (t - knot(i)) / (j * dt) * deboor_cox(i, j - 1, t, t0, dt);
  const double right =
      (knot(i + j + 1) - t) / (j * dt) * deboor_cox(i + 1, j - 1, t, t0, dt);
  return left + right;
}

}  // namespace liespline
