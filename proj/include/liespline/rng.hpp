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
#include <cstdint>
#include <string_view>

namespace liespline {

/// Deterministic random stream derived from a root seed and a stream name.
/// Every consumer draws from its own named substream, so adding one
/// experiment never perturbs another's draws. splitmix64 generator with
/// portable uniform/normal transforms; identical output on any platform.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view name) {
    state_ = 0xcbf29ce484222325ull;  // FNV-1a over the name, mixed with the seed
    for (const char ch : name) {
      state_ ^= static_cast<unsigned char>(ch);
      state_ *= 0x100000001b3ull;
    }
    state_ ^= seed + 0x9e3779b97f4a7c15ull;
    next_u64();
    next_u64();
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  Eigen::Vector3d normal3(double sigma = 1.0) {
    return {sigma * normal(), sigma * normal(), sigma * normal()};
  }

  /// Uniform per-axis in [-half_width, half_width]^n.
  template <int N>
  Eigen::Matrix<double, N, 1> box(double half_width) {
    Eigen::Matrix<double, N, 1> v;
    for (int i = 0; i < N; ++i) v[i] = uniform(-half_width, half_width);
    return v;
  }

  /// Uniform in the solid ball of the given radius (rejection sampling).
  template <int N>
  Eigen::Matrix<double, N, 1> ball(double radius) {
    while (true) {
      const Eigen::Matrix<double, N, 1> v = box<N>(1.0);
      if (v.squaredNorm() <= 1.0) return radius * v;
    }
  }

 private:
  std::uint64_t state_ = 0;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace liespline
