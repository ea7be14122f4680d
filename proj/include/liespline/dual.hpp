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
#include <cmath>
#include <ostream>

namespace liespline {

/// Forward-mode dual number carrying N partial derivatives alongside the
/// value. Usable as an Eigen scalar type, so full matrix expressions can be
/// differentiated by seeding the infinitesimal parts of the inputs.
template <int N>
struct Dual {
  using Partials = Eigen::Matrix<double, N, 1>;

  double a = 0.0;
  Partials v = Partials::Zero();

  Dual() = default;
  Dual(double value) : a(value) {}  // NOLINT: implicit by design
  Dual(double value, int seed_index) : a(value) { v[seed_index] = 1.0; }
  Dual(double value, const Partials& partials) : a(value), v(partials) {}
};

template <int N>
double scalar_value(const Dual<N>& x) {
  return x.a;
}
inline double scalar_value(double x) { return x; }

// ---- arithmetic -----------------------------------------------------------

template <int N>
Dual<N> operator+(const Dual<N>& x) {
  return x;
}
template <int N>
Dual<N> operator-(const Dual<N>& x) {
  return {-x.a, -x.v};
}

template <int N>
Dual<N> operator+(const Dual<N>& x, const Dual<N>& y) {
  return {x.a + y.a, x.v + y.v};
}
template <int N>
Dual<N> operator+(const Dual<N>& x, double y) {
  return {x.a + y, x.v};
}
template <int N>
Dual<N> operator+(double x, const Dual<N>& y) {
  return {x + y.a, y.v};
}

template <int N>
Dual<N> operator-(const Dual<N>& x, const Dual<N>& y) {
  return {x.a - y.a, x.v - y.v};
}
template <int N>
Dual<N> operator-(const Dual<N>& x, double y) {
  return {x.a - y, x.v};
}
template <int N>
Dual<N> operator-(double x, const Dual<N>& y) {
  return {x - y.a, -y.v};
}

template <int N>
Dual<N> operator*(const Dual<N>& x, const Dual<N>& y) {
  return {x.a * y.a, x.a * y.v + y.a * x.v};
}
template <int N>
Dual<N> operator*(const Dual<N>& x, double y) {
  return {x.a * y, x.v * y};
}
template <int N>
Dual<N> operator*(double x, const Dual<N>& y) {
  return {x * y.a, x * y.v};
}

template <int N>
Dual<N> operator/(const Dual<N>& x, const Dual<N>& y) {
  const double inv = 1.0 / y.a;
  const double val = x.a * inv;
  return {val, (x.v - val * y.v) * inv};
}
template <int N>
Dual<N> operator/(const Dual<N>& x, double y) {
  return {x.a / y, x.v / y};
}
template <int N>
Dual<N> operator/(double x, const Dual<N>& y) {
  const double inv = 1.0 / y.a;
  const double val = x * inv;
  return {val, (-val * inv) * y.v};
}

template <int N>
Dual<N>& operator+=(Dual<N>& x, const Dual<N>& y) {
  x.a += y.a;
  x.v += y.v;
  return x;
}
template <int N>
Dual<N>& operator-=(Dual<N>& x, const Dual<N>& y) {
  x.a -= y.a;
  x.v -= y.v;
  return x;
}
template <int N>
Dual<N>& operator*=(Dual<N>& x, const Dual<N>& y) {
  x = x * y;
  return x;
}
template <int N>
Dual<N>& operator/=(Dual<N>& x, const Dual<N>& y) {
  x = x / y;
  return x;
}

// ---- comparisons (on the value part) ---------------------------------------

template <int N>
bool operator<(const Dual<N>& x, const Dual<N>& y) {
  return x.a < y.a;
}
template <int N>
bool operator<(const Dual<N>& x, double y) {
  return x.a < y;
}
template <int N>
bool operator<(double x, const Dual<N>& y) {
  return x < y.a;
}
template <int N>
bool operator>(const Dual<N>& x, const Dual<N>& y) {
  return x.a > y.a;
}
template <int N>
bool operator>(const Dual<N>& x, double y) {
  return x.a > y;
}
template <int N>
bool operator>(double x, const Dual<N>& y) {
  return x > y.a;
}
template <int N>
bool operator<=(const Dual<N>& x, const Dual<N>& y) {
  return x.a <= y.a;
}
template <int N>
bool operator>=(const Dual<N>& x, const Dual<N>& y) {
  return x.a >= y.a;
}
template <int N>
bool operator==(const Dual<N>& x, const Dual<N>& y) {
  return x.a == y.a;
}
template <int N>
bool operator!=(const Dual<N>& x, const Dual<N>& y) {
  return x.a != y.a;
}

// ---- elementary functions ---------------------------------------------------

template <int N>
Dual<N> sqrt(const Dual<N>& x) {
  const double s = std::sqrt(x.a);
  return {s, x.v / (2.0 * s)};
}
template <int N>
Dual<N> sin(const Dual<N>& x) {
  return {std::sin(x.a), std::cos(x.a) * x.v};
}
template <int N>
Dual<N> cos(const Dual<N>& x) {
  return {std::cos(x.a), -std::sin(x.a) * x.v};
}
template <int N>
Dual<N> tan(const Dual<N>& x) {
  const double t = std::tan(x.a);
  return {t, (1.0 + t * t) * x.v};
}
template <int N>
Dual<N> exp(const Dual<N>& x) {
  const double e = std::exp(x.a);
  return {e, e * x.v};
}
template <int N>
Dual<N> log(const Dual<N>& x) {
  return {std::log(x.a), x.v / x.a};
}
template <int N>
Dual<N> atan2(const Dual<N>& y, const Dual<N>& x) {
  const double denom = x.a * x.a + y.a * y.a;
  return {std::atan2(y.a, x.a), (x.a * y.v - y.a * x.v) / denom};
}
template <int N>
Dual<N> abs(const Dual<N>& x) {
  return x.a < 0.0 ? -x : x;
}

// Eigen hooks.
template <int N>
const Dual<N>& conj(const Dual<N>& x) {
  return x;
}
template <int N>
const Dual<N>& real(const Dual<N>& x) {
  return x;
}
template <int N>
Dual<N> imag(const Dual<N>&) {
  return Dual<N>(0.0);
}
template <int N>
Dual<N> abs2(const Dual<N>& x) {
  return x * x;
}

template <int N>
std::ostream& operator<<(std::ostream& os, const Dual<N>& x) {
  return os << x.a << " + [" << x.v.transpose() << "]eps";
}

}  // namespace liespline

namespace Eigen {

template <int N>
struct NumTraits<liespline::Dual<N>> : NumTraits<double> {
  using Real = liespline::Dual<N>;
  using NonInteger = liespline::Dual<N>;
  using Nested = liespline::Dual<N>;
  using Literal = double;

  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    ReadCost = 1,
    AddCost = 1 + N,
    MulCost = 3 + 2 * N,
    RequireInitialization = 1,
  };
};

// Mixed double/Dual expressions keep the Dual type.
template <int N, typename BinaryOp>
struct ScalarBinaryOpTraits<liespline::Dual<N>, double, BinaryOp> {
  using ReturnType = liespline::Dual<N>;
};
template <int N, typename BinaryOp>
struct ScalarBinaryOpTraits<double, liespline::Dual<N>, BinaryOp> {
  using ReturnType = liespline::Dual<N>;
};

}  // namespace Eigen
