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

#include <json.hpp>

#include "liespline/problem.hpp"

namespace liespline {

using Json = nlohmann::json;

// Group elements: Rotation3 as a row-major 9-array, RigidTransform as
// {"R": [9], "t": [3]}, tangents as plain arrays.
Json to_json(const Rotation3& r);
Json to_json(const RigidTransformd& x);
Rotation3 rotation_from_json(const Json& j);
RigidTransformd rigid_from_json(const Json& j);

// Splines: {"group": "SO3"|"SE3"|"Rd", "d": int (Rd only), "k": int,
// "t0": float, "dt": float, "knots": [...]}.
Json to_json(const Spline<So3d>& s);
Json to_json(const Spline<Se3d>& s);
Json to_json(const Spline<Rdd<3>>& s);
Spline<So3d> so3_spline_from_json(const Json& j);
Spline<Se3d> se3_spline_from_json(const Json& j);
Spline<Rdd<3>> r3_spline_from_json(const Json& j);

// Problems: {"splines": {"so3"/"r3"/"se3": ...}, "residuals": [...],
// "calibration": {...}?, "camera": {...}?}. Residual weights may be a scalar
// (isotropic), a full matrix, or absent (identity).
Json to_json(const Problem& p);
Problem problem_from_json(const Json& j);

Json to_json(const SolveReport& r);

/// CSV row "group,k,config,formulation,seconds,iterations". Empty seconds
/// when timing output is suppressed.
std::string report_csv_row(const std::string& group, int order, const std::string& config,
                           const SolveReport& r, bool with_timing);

}  // namespace liespline
