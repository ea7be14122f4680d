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
#include <Eigen/SparseCore>
#include <optional>
#include <string>
#include <vector>

#include "liespline/camera.hpp"
#include "liespline/spline.hpp"

namespace liespline {

enum class ResidualKind { kValue, kVelocity, kAcceleration, kProjection, kGyro, kAccel };
enum class JacobianMode { kForward, kAnalytic };
enum class Representation { kSplit, kSe3 };

inline const char* to_string(JacobianMode m) {
  return m == JacobianMode::kForward ? "forward" : "analytic";
}
inline const char* to_string(Representation r) {
  return r == Representation::kSplit ? "split" : "se3";
}

/// One weighted measurement. The measurement layout depends on the kind:
///  - kValue: flattened group element (9 for SO(3) row-major, 12 for SE(3) as
///    R row-major then t, d for R^d);
///  - kVelocity / kAcceleration / kGyro / kAccel: tangent-space vector, time
///    scaled (per second);
///  - kProjection: 2D pixel position, with `point` the observed 3D corner in
///    world coordinates and `camera_id` selecting the extrinsic transform.
struct ResidualBlock {
  ResidualKind kind = ResidualKind::kValue;
  double t = 0.0;
  Eigen::VectorXd measurement;
  Eigen::MatrixXd weight;  // symmetric PSD; empty means identity
  int camera_id = 0;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
};

/// Calibration unknowns shared by all calibration residuals.
struct CalibrationParams {
  Eigen::Vector3d b_g = Eigen::Vector3d::Zero();
  Eigen::Vector3d b_a = Eigen::Vector3d::Zero();
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  std::vector<RigidTransformd> T_ic;
};

/// Least-squares problem over spline knots (split SO(3) x R^3, single SE(3),
/// or single-group splines) plus optional calibration parameters.
struct Problem {
  std::optional<Spline<So3d>> so3;
  std::optional<Spline<Rdd<3>>> r3;
  std::optional<Spline<Se3d>> se3;
  std::vector<ResidualBlock> residuals;
  std::optional<CalibrationParams> calib;
  PinholeCamera camera;

  bool is_split() const { return so3.has_value() && r3.has_value(); }
};

struct SolveOptions {
  Formulation formulation = Formulation::kRecursive;
  JacobianMode jacobian_mode = JacobianMode::kForward;
  int max_iterations = 50;
  // Levenberg damping: mu starts at mu_init_scale * max diagonal of J^T W J,
  // grows by mu_up on rejection and shrinks by mu_down on acceptance. The
  // shrink factor keeps the damping bias below the quadratic contraction, so
  // near-exact fits terminate without a mu-limited linear tail.
  double mu_init_scale = 1e-4;
  double mu_up = 10.0;
  double mu_down = 0.1;
  double cost_rel_tol = 1e-10;
  double grad_tol = 1e-12;
  double mu_max = 1e32;
};

struct SolveReport {
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  std::vector<double> iteration_seconds;
  double total_seconds = 0.0;
  Formulation formulation = Formulation::kRecursive;
  JacobianMode jacobian_mode = JacobianMode::kForward;
  bool converged = false;
  std::string message;
};

/// Parameter block bookkeeping. Knot blocks are interleaved in time order
/// (rotation and translation knots alternate in the split representation) so
/// spline locality produces a banded Gauss-Newton Hessian; calibration
/// parameters sit in a border at the end.
enum class BlockKind { kRotKnot, kTransKnot, kSe3Knot, kBiasGyro, kBiasAccel, kGravity, kExtrinsic };

struct ActiveBlock {
  BlockKind kind;
  int index = 0;  // knot index, or camera id for kExtrinsic
  int dim = 0;
};

/// Parameter blocks a residual touches, in a fixed deterministic order.
std::vector<ActiveBlock> active_blocks(const Problem& p, const ResidualBlock& rb);

/// Stacked (unweighted) residual vector and the total cost sum r^T W r.
std::pair<Eigen::VectorXd, double> evaluate_residuals(const Problem& p, Formulation f);

double evaluate_cost(const Problem& p, Formulation f);

/// Residuals and Jacobian blocks are at most 6-dimensional; fixed-capacity
/// matrices keep the evaluation and assembly loops allocation free.
using ResidualVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 6, 1>;
using JacobianBlock = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 6>;

/// Residual Jacobian blocks (one dim_r x dim_b matrix per active block) by
/// dual-number propagation through the evaluation path; the baseline Jacobian
/// mode and the reference oracle for the analytic SO(3) blocks.
std::vector<JacobianBlock> forward_mode_jacobian(const Problem& p, const ResidualBlock& rb,
                                                 Formulation f);

/// Analytic Jacobian blocks; supported for value/velocity/acceleration
/// residuals on SO(3) and R^3 splines and for gyro residuals in the split
/// representation. Throws std::invalid_argument for unsupported kinds.
std::vector<JacobianBlock> analytic_jacobian(const Problem& p, const ResidualBlock& rb,
                                             Formulation f);

/// Gauss-Newton normal equations at the current state (upper-triangular
/// sparse H = J^T W J, gradient J^T W r, and the cost).
struct NormalEquations {
  Eigen::SparseMatrix<double> hessian;
  Eigen::VectorXd gradient;
  double cost = 0.0;
};

/// Levenberg-Marquardt over the problem's knots and calibration parameters,
/// updating the problem state in place. Knot updates use the
/// left-multiplicative perturbation convention.
SolveReport solve(Problem& p, const SolveOptions& options = {});

NormalEquations normal_equations(const Problem& p, Formulation f, JacobianMode mode);

/// Global offset of an active block in the solver's parameter vector.
int block_offset(const Problem& p, const ActiveBlock& b);

/// Total parameter dimension of the problem.
int parameter_dimension(const Problem& p);

}  // namespace liespline
