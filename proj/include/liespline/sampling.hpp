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

#include "liespline/rng.hpp"
#include "liespline/spline.hpp"

namespace liespline {

/// Random group element: tangent sampled uniformly in a ball, then Exp.
inline Rotation3 random_rotation(RngStream& rng, double radius = 2.0) {
  return so3_exp<double>(rng.ball<3>(radius));
}

inline RigidTransformd random_rigid_transform(RngStream& rng, double radius = 2.0) {
  return se3_exp<double>(rng.ball<6>(radius));
}

template <class G>
typename G::Element random_element(RngStream& rng, double radius = 2.0) {
  return G::exp(rng.ball<G::kDof>(radius));
}

/// Random spline whose knots form a walk X_{i+1} = X_i Exp(step), keeping
/// every difference vector well inside the log branch.
template <class G>
Spline<G> random_walk_spline(RngStream& rng, int order, int num_knots, double t0 = 0.0,
                             double dt = 1.0, double step_radius = 0.6,
                             double start_radius = 2.0) {
  Spline<G> s;
  s.order = order;
  s.t0 = t0;
  s.dt = dt;
  s.knots.reserve(num_knots);
  typename G::Element x = random_element<G>(rng, start_radius);
  s.knots.push_back(x);
  for (int i = 1; i < num_knots; ++i) {
    x = G::compose(x, G::exp(rng.ball<G::kDof>(step_radius)));
    s.knots.push_back(x);
  }
  return s;
}

}  // namespace liespline
