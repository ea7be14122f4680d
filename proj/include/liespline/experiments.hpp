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
#include <vector>

#include "liespline/problem.hpp"

namespace liespline {

enum class GroupTag { kSo3, kSe3 };
enum class DerivKind { kVelocity, kAcceleration };

inline const char* to_string(GroupTag g) { return g == GroupTag::kSo3 ? "so3" : "se3"; }
inline const char* to_string(DerivKind d) {
  return d == DerivKind::kVelocity ? "vel" : "acc";
}

/// Simulated trajectory-fitting experiment: a ground-truth spline with
/// 100 + k knots at 2 s spacing, 25 value measurements and 2020 velocity or
/// acceleration measurements sampled exactly from it, solved from perturbed
/// ground-truth knots with both derivative formulations.
struct SimConfig {
  GroupTag group = GroupTag::kSo3;
  int order = 4;
  int extra_knots = 100;  // knot count = extra_knots + order
  double dt = 2.0;
  int n_value = 25;
  int n_deriv = 2020;
  DerivKind deriv = DerivKind::kAcceleration;
  std::uint64_t seed = 1;
  double init_perturbation = 0.1;  // uniform per tangent axis
  int timing_runs = 5;             // wall time reported as the median
};

struct SimResult {
  SolveReport recursive;
  SolveReport baseline;
  double recursive_seconds = 0.0;  // median over timing_runs
  double baseline_seconds = 0.0;
  double speedup = 0.0;  // baseline_seconds / recursive_seconds
  bool iterations_equal = false;
  double max_final_knot_diff = 0.0;   // recursive vs baseline solutions
  double max_knot_error_vs_gt = 0.0;  // recursive solution vs ground truth
};

SimResult run_sim(const SimConfig& config);

/// Synthetic camera-IMU calibration scene: ground-truth IMU trajectory as a
/// split SO(3) x R^3 spline pair (order 5, 10 ms knots), two cameras with
/// known intrinsics observing a planar corner grid, gravity and static IMU
/// biases.
struct CalibScene {
  Spline<So3d> rot;
  Spline<Rdd<3>> trans;
  Eigen::Vector3d gravity = Eigen::Vector3d::Zero();
  Eigen::Vector3d bias_gyro = Eigen::Vector3d::Zero();
  Eigen::Vector3d bias_accel = Eigen::Vector3d::Zero();
  std::vector<RigidTransformd> T_ic;
  PinholeCamera camera;
  std::vector<Eigen::Vector3d> pattern;
  double duration = 20.0;
  double imu_rate = 200.0;
  double cam_rate = 20.0;
};

CalibScene make_calib_scene(std::uint64_t seed, double duration = 20.0, double imu_rate = 200.0,
                            double cam_rate = 20.0);

/// Sensor noise levels; also the source of the residual weights
/// (W = sigma^{-2} I), which stay in place for noise-free data.
struct CalibNoise {
  double gyro = 1e-3;   // rad/s
  double accel = 1e-2;  // m/s^2
  double pixel = 0.5;   // px
};

std::vector<ResidualBlock> synthesize_measurements(const CalibScene& scene,
                                                   const CalibNoise& sigma, bool add_noise,
                                                   std::uint64_t seed);

struct CalibEstimate {
  CalibrationParams params;
  SolveReport report;
};

/// Fits trajectory, biases, gravity and extrinsics to the measurements using
/// the chosen trajectory representation and derivative formulation, starting
/// from perturbed ground truth.
CalibEstimate run_calib(const CalibScene& scene, const std::vector<ResidualBlock>& measurements,
                        Representation representation, Formulation formulation,
                        std::uint64_t seed, double knot_perturbation = 0.01);

/// Parameter deviations in the norms used to compare calibration methods:
/// L2 for vectors and translations, rotation angle for the extrinsic
/// rotations.
struct CalibDeviation {
  double g = 0.0;
  double b_a = 0.0;
  double b_g = 0.0;
  double t_ic0 = 0.0;
  double t_ic1 = 0.0;
  double r_ic0 = 0.0;
  double r_ic1 = 0.0;
  double max() const;
};

CalibDeviation compare_estimates(const CalibrationParams& a, const CalibrationParams& b);

CalibrationParams scene_ground_truth(const CalibScene& scene);

}  // namespace liespline
