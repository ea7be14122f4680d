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

#include <cstdint>

namespace liespline {

/// Ledger of matrix operations performed while computing spline time
/// derivatives. One mm_mult is a product of two group-dimension square
/// matrices, one mv_mult a matrix-vector product (adjoint application,
/// including the Rᵀv form on SO(3)), adds counts matrix or vector additions.
/// Forming Aⱼ via the exponential map is never counted; it is common to all
/// formulations.
struct OpCounter {
  std::int64_t mm_mults = 0;
  std::int64_t mv_mults = 0;
  std::int64_t adds = 0;

  void reset() { mm_mults = mv_mults = adds = 0; }

  OpCounter& operator+=(const OpCounter& o) {
    mm_mults += o.mm_mults;
    mv_mults += o.mv_mults;
    adds += o.adds;
    return *this;
  }

  friend bool operator==(const OpCounter&, const OpCounter&) = default;
};

}  // namespace liespline
