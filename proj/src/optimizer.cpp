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

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <chrono>
#include <cmath>
#include <map>

#include "liespline/residual_eval.hpp"
#include "liespline/so3_jacobians.hpp"

namespace liespline {

namespace {

using detail::eval_residual;
using detail::locate_segment;

void validate(const Problem& p) {
  const bool split = p.so3.has_value() && p.r3.has_value();
  const bool single = (p.so3.has_value() + p.r3.has_value() + p.se3.has_value()) == 1;
  if (!split && !single) {
    throw std::invalid_argument("problem must hold one spline or the split SO(3) x R^3 pair");
  }
  if (split) {
    if (p.so3->order != p.r3->order || p.so3->t0 != p.r3->t0 || p.so3->dt != p.r3->dt ||
        p.so3->knots.size() != p.r3->knots.size()) {
      throw std::invalid_argument("split representation requires aligned SO(3)/R^3 splines");
    }
  }
  for (const auto& rb : p.residuals) {
    const bool needs_calib = rb.kind == ResidualKind::kGyro || rb.kind == ResidualKind::kAccel ||
                             rb.kind == ResidualKind::kProjection;
    if (needs_calib && !p.calib) {
      throw std::invalid_argument("calibration residuals require calibration parameters");
    }
    if (rb.kind == ResidualKind::kProjection &&
        rb.camera_id >= static_cast<int>(p.calib->T_ic.size())) {
      throw std::invalid_argument("projection residual references an unknown camera");
    }
    if (rb.weight.size() > 0 &&
        (rb.weight - rb.weight.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw std::invalid_argument("residual weight must be symmetric");
    }
  }
}

int knot_parameter_dimension(const Problem& p) {
  if (p.is_split()) return 6 * static_cast<int>(p.so3->knots.size());
  if (p.so3) return 3 * static_cast<int>(p.so3->knots.size());
  if (p.r3) return 3 * static_cast<int>(p.r3->knots.size());
  return 6 * static_cast<int>(p.se3->knots.size());
}

// Symmetric PSD square root, eigenvalues clamped at zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w);
  Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

int parameter_dimension(const Problem& p) {
  int dim = knot_parameter_dimension(p);
  if (p.calib) dim += 9 + 6 * static_cast<int>(p.calib->T_ic.size());
  return dim;
}

int block_offset(const Problem& p, const ActiveBlock& b) {
  const int base = knot_parameter_dimension(p);
  switch (b.kind) {
    case BlockKind::kRotKnot:
      return p.is_split() ? 6 * b.index : 3 * b.index;
    case BlockKind::kTransKnot:
      return p.is_split() ? 6 * b.index + 3 : 3 * b.index;
    case BlockKind::kSe3Knot:
      return 6 * b.index;
    case BlockKind::kBiasGyro:
      return base;
    case BlockKind::kBiasAccel:
      return base + 3;
    case BlockKind::kGravity:
      return base + 6;
    case BlockKind::kExtrinsic:
      return base + 9 + 6 * b.index;
  }
  throw std::logic_error("block_offset: unknown block kind");
}

std::vector<ActiveBlock> active_blocks(const Problem& p, const ResidualBlock& rb) {
  std::vector<ActiveBlock> out;
  const auto add_spline_knots = [&](BlockKind kind, int i, int k, int dim) {
    for (int m = 0; m < k; ++m) out.push_back({kind, i + m, dim});
  };
  switch (rb.kind) {
    case ResidualKind::kValue:
    case ResidualKind::kVelocity:
    case ResidualKind::kAcceleration: {
      if (p.se3) {
        add_spline_knots(BlockKind::kSe3Knot, locate_segment(*p.se3, rb.t).first, p.se3->order, 6);
      } else if (p.so3) {
        add_spline_knots(BlockKind::kRotKnot, locate_segment(*p.so3, rb.t).first, p.so3->order, 3);
      } else {
        add_spline_knots(BlockKind::kTransKnot, locate_segment(*p.r3, rb.t).first, p.r3->order, 3);
      }
      break;
    }
    case ResidualKind::kGyro: {
      if (p.is_split()) {
        add_spline_knots(BlockKind::kRotKnot, locate_segment(*p.so3, rb.t).first, p.so3->order, 3);
      } else {
        add_spline_knots(BlockKind::kSe3Knot, locate_segment(*p.se3, rb.t).first, p.se3->order, 6);
      }
      out.push_back({BlockKind::kBiasGyro, 0, 3});
      break;
    }
    case ResidualKind::kAccel: {
      if (p.is_split()) {
        const int i = locate_segment(*p.so3, rb.t).first;
        add_spline_knots(BlockKind::kRotKnot, i, p.so3->order, 3);
        add_spline_knots(BlockKind::kTransKnot, i, p.r3->order, 3);
      } else {
        add_spline_knots(BlockKind::kSe3Knot, locate_segment(*p.se3, rb.t).first, p.se3->order, 6);
      }
      out.push_back({BlockKind::kGravity, 0, 3});
      out.push_back({BlockKind::kBiasAccel, 0, 3});
      break;
    }
    case ResidualKind::kProjection: {
      if (p.is_split()) {
        const int i = locate_segment(*p.so3, rb.t).first;
        add_spline_knots(BlockKind::kRotKnot, i, p.so3->order, 3);
        add_spline_knots(BlockKind::kTransKnot, i, p.r3->order, 3);
      } else {
        add_spline_knots(BlockKind::kSe3Knot, locate_segment(*p.se3, rb.t).first, p.se3->order, 6);
      }
      out.push_back({BlockKind::kExtrinsic, rb.camera_id, 6});
      break;
    }
  }
  return out;
}

std::pair<Eigen::VectorXd, double> evaluate_residuals(const Problem& p, Formulation f) {
  validate(p);
  std::vector<Eigen::VectorXd> parts;
  parts.reserve(p.residuals.size());
  double cost = 0.0;
  int rows = 0;
  for (const auto& rb : p.residuals) {
    Eigen::VectorXd r = eval_residual<double>(p, rb, f);
    cost += rb.weight.size() > 0 ? r.dot(rb.weight * r) : r.squaredNorm();
    rows += static_cast<int>(r.size());
    parts.push_back(std::move(r));
  }
  Eigen::VectorXd stacked(rows);
  int at = 0;
  for (const auto& r : parts) {
    stacked.segment(at, r.size()) = r;
    at += static_cast<int>(r.size());
  }
  return {stacked, cost};
}

double evaluate_cost(const Problem& p, Formulation f) {
  double cost = 0.0;
  for (const auto& rb : p.residuals) {
    const Eigen::VectorXd r = eval_residual<double>(p, rb, f);
    cost += rb.weight.size() > 0 ? r.dot(rb.weight * r) : r.squaredNorm();
  }
  return cost;
}

std::vector<JacobianBlock> forward_mode_jacobian(const Problem& p, const ResidualBlock& rb,
                                                 Formulation f) {
  const std::vector<ActiveBlock> blocks = active_blocks(p, rb);
  std::vector<JacobianBlock> out;
  out.reserve(blocks.size());
  for (int o = 0; o < static_cast<int>(blocks.size()); ++o) {
    JacobianBlock j;
    if (blocks[o].dim == 3) {
      const auto r = eval_residual<Dual<3>>(p, rb, f, o);
      j.resize(r.size(), 3);
      for (int row = 0; row < r.size(); ++row) j.row(row) = r[row].v.transpose();
    } else {
      const auto r = eval_residual<Dual<6>>(p, rb, f, o);
      j.resize(r.size(), 6);
      for (int row = 0; row < r.size(); ++row) j.row(row) = r[row].v.transpose();
    }
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<JacobianBlock> analytic_jacobian(const Problem& p, const ResidualBlock& rb,
                                             Formulation f) {
  (void)f;  // the analytic blocks are formulation independent
  std::vector<JacobianBlock> out;
  const bool so3_target = p.so3.has_value() && !p.se3.has_value();
  const bool r3_target = p.r3.has_value() && !p.so3.has_value() && !p.se3.has_value();

  const auto r3_pattern = [&](int deriv_order) {
    const auto [i, u] = locate_segment(*p.r3, rb.t);
    const int k = p.r3->order;
    const LambdaBundle lam = lambda_bundle(k, u);
    const double scale = std::pow(1.0 / p.r3->dt, deriv_order);
    const auto weight_of = [&](int j) {
      if (j == 0) return deriv_order == 0 ? 1.0 : 0.0;
      switch (deriv_order) {
        case 0:
          return lam.lambda[j];
        case 1:
          return lam.dlambda[j];
        default:
          return lam.ddlambda[j];
      }
    };
    for (int j = 0; j < k; ++j) {
      const double w_j = weight_of(j);
      const double w_next = (j + 1 < k) ? weight_of(j + 1) : 0.0;
      out.push_back(scale * (w_j - w_next) * Eigen::Matrix3d::Identity());
    }
  };

  switch (rb.kind) {
    case ResidualKind::kValue: {
      if (so3_target) {
        const auto ctx = locate(*p.so3, rb.t);
        const auto inter = so3_intermediates(ctx);
        Rotation3 meas;
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) meas(r, c) = rb.measurement[3 * r + c];
        const Eigen::Vector3d err = so3_log<double>((meas.transpose() * evaluate(ctx)).eval());
        const auto local = local_jacobians(ctx, inter, err);
        const auto kj = knot_jacobians(ctx, local);
        for (int j = 0; j < ctx.order; ++j) out.push_back(kj.d_rho[j]);
        return out;
      }
      if (r3_target) {
        r3_pattern(0);
        return out;
      }
      break;
    }
    case ResidualKind::kVelocity:
    case ResidualKind::kAcceleration: {
      if (so3_target) {
        const auto ctx = locate(*p.so3, rb.t);
        const auto inter = so3_intermediates(ctx);
        // rho blocks are not needed; a zero override skips the value log.
        const auto local = local_jacobians(ctx, inter, Eigen::Vector3d::Zero());
        const auto kj = knot_jacobians(ctx, local);
        const bool vel = rb.kind == ResidualKind::kVelocity;
        const double scale = vel ? 1.0 / p.so3->dt : 1.0 / (p.so3->dt * p.so3->dt);
        for (int j = 0; j < ctx.order; ++j) {
          out.push_back(scale * (vel ? kj.d_omega[j] : kj.d_omegadot[j]));
        }
        return out;
      }
      if (r3_target) {
        r3_pattern(rb.kind == ResidualKind::kVelocity ? 1 : 2);
        return out;
      }
      break;
    }
    case ResidualKind::kGyro: {
      if (p.is_split()) {
        const auto ctx = locate(*p.so3, rb.t);
        const auto inter = so3_intermediates(ctx);
        const auto local = local_jacobians(ctx, inter, Eigen::Vector3d::Zero());
        const auto kj = knot_jacobians(ctx, local);
        for (int j = 0; j < ctx.order; ++j) out.push_back(kj.d_omega[j] / p.so3->dt);
        out.push_back(Eigen::Matrix3d::Identity());  // d r / d b_g
        return out;
      }
      break;
    }
    default:
      break;
  }
  throw std::invalid_argument(
      "analytic_jacobian: unsupported residual kind for this problem structure");
}

namespace {

// Assembly plan built once per problem structure: per-residual active blocks,
// global offsets, whitening factors, and the scatter slots of the upper block
// triangle of J^T W J. The per-iteration pass is then allocation free apart
// from the Jacobian block vectors.
struct HessianSlot {
  int row = 0;
  int col = 0;
  JacobianBlock acc;
};

struct ResidualPlan {
  std::vector<ActiveBlock> blocks;
  std::vector<int> offsets;
  std::vector<int> pair_slot;
  std::vector<bool> pair_flip;  // accumulate transposed (row block below column)
  JacobianBlock sqrt_w;         // empty when the weight is the identity
};

struct AssemblyPlan {
  int dim = 0;
  std::vector<ResidualPlan> residuals;
  std::vector<HessianSlot> slots;
};

AssemblyPlan make_plan(const Problem& p) {
  AssemblyPlan plan;
  plan.dim = parameter_dimension(p);
  std::map<std::pair<int, int>, int> slot_ids;
  for (const auto& rb : p.residuals) {
    ResidualPlan rp;
    rp.blocks = active_blocks(p, rb);
    rp.offsets.reserve(rp.blocks.size());
    for (const auto& b : rp.blocks) rp.offsets.push_back(block_offset(p, b));
    for (size_t b = 0; b < rp.blocks.size(); ++b) {
      for (size_t b2 = b; b2 < rp.blocks.size(); ++b2) {
        int ro = rp.offsets[b], co = rp.offsets[b2];
        int rd = rp.blocks[b].dim, cd = rp.blocks[b2].dim;
        const bool flip = ro > co;
        if (flip) {
          std::swap(ro, co);
          std::swap(rd, cd);
        }
        auto [it, inserted] = slot_ids.try_emplace({ro, co}, plan.slots.size());
        if (inserted) {
          HessianSlot slot;
          slot.row = ro;
          slot.col = co;
          slot.acc.setZero(rd, cd);
          plan.slots.push_back(std::move(slot));
        }
        rp.pair_slot.push_back(it->second);
        rp.pair_flip.push_back(flip);
      }
    }
    if (rb.weight.size() > 0) rp.sqrt_w = psd_sqrt(rb.weight);
    plan.residuals.push_back(std::move(rp));
  }
  return plan;
}

// Fills the plan's Hessian slots and the gradient; returns the cost.
double assemble(const Problem& p, Formulation f, JacobianMode mode, AssemblyPlan* plan,
                Eigen::VectorXd* gradient) {
  for (auto& s : plan->slots) s.acc.setZero();
  gradient->setZero(plan->dim);
  double cost = 0.0;
  for (size_t ri = 0; ri < p.residuals.size(); ++ri) {
    const ResidualBlock& rb = p.residuals[ri];
    const ResidualPlan& rp = plan->residuals[ri];
    ResidualVec r = eval_residual<double>(p, rb, f);
    std::vector<JacobianBlock> jac = mode == JacobianMode::kForward
                                         ? forward_mode_jacobian(p, rb, f)
                                         : analytic_jacobian(p, rb, f);
    if (rp.sqrt_w.size() > 0) {
      r = (rp.sqrt_w * r).eval();
      for (auto& j : jac) j = (rp.sqrt_w * j).eval();
    }
    cost += r.squaredNorm();
    int pair = 0;
    for (size_t b = 0; b < rp.blocks.size(); ++b) {
      gradient->segment(rp.offsets[b], rp.blocks[b].dim).noalias() += jac[b].transpose() * r;
      for (size_t b2 = b; b2 < rp.blocks.size(); ++b2, ++pair) {
        HessianSlot& slot = plan->slots[rp.pair_slot[pair]];
        if (rp.pair_flip[pair]) {
          slot.acc.noalias() += jac[b2].transpose() * jac[b];
        } else {
          slot.acc.noalias() += jac[b].transpose() * jac[b2];
        }
      }
    }
  }
  return cost;
}

Eigen::SparseMatrix<double> to_sparse_upper(const AssemblyPlan& plan) {
  std::vector<Eigen::Triplet<double>> trips;
  for (const auto& slot : plan.slots) {
    for (int r = 0; r < slot.acc.rows(); ++r) {
      for (int c = 0; c < slot.acc.cols(); ++c) {
        if (slot.row + r <= slot.col + c) {
          trips.emplace_back(slot.row + r, slot.col + c, slot.acc(r, c));
        }
      }
    }
  }
  Eigen::SparseMatrix<double> h(plan.dim, plan.dim);
  h.setFromTriplets(trips.begin(), trips.end());
  return h;
}

// Left-multiplicative update of every parameter block.
void apply_step(Problem& p, const Eigen::VectorXd& delta) {
  if (p.is_split()) {
    for (size_t i = 0; i < p.so3->knots.size(); ++i) {
      p.so3->knots[i] = so3_exp<double>(delta.segment<3>(6 * i)) * p.so3->knots[i];
      p.r3->knots[i] += delta.segment<3>(6 * i + 3);
    }
  } else if (p.so3) {
    for (size_t i = 0; i < p.so3->knots.size(); ++i) {
      p.so3->knots[i] = so3_exp<double>(delta.segment<3>(3 * i)) * p.so3->knots[i];
    }
  } else if (p.r3) {
    for (size_t i = 0; i < p.r3->knots.size(); ++i) {
      p.r3->knots[i] += delta.segment<3>(3 * i);
    }
  } else {
    for (size_t i = 0; i < p.se3->knots.size(); ++i) {
      p.se3->knots[i] = se3_exp<double>(delta.segment<6>(6 * i)) * p.se3->knots[i];
    }
  }
  if (p.calib) {
    const int base = knot_parameter_dimension(p);
    p.calib->b_g += delta.segment<3>(base);
    p.calib->b_a += delta.segment<3>(base + 3);
    p.calib->g += delta.segment<3>(base + 6);
    for (size_t c = 0; c < p.calib->T_ic.size(); ++c) {
      p.calib->T_ic[c] = se3_exp<double>(delta.segment<6>(base + 9 + 6 * c)) * p.calib->T_ic[c];
    }
  }
}

void reproject_rotations(Problem& p) {
  if (p.so3) {
    for (auto& r : p.so3->knots) r = so3_project(r);
  }
  if (p.se3) {
    for (auto& x : p.se3->knots) x.R = so3_project(x.R);
  }
  if (p.calib) {
    for (auto& x : p.calib->T_ic) x.R = so3_project(x.R);
  }
}

}  // namespace

NormalEquations normal_equations(const Problem& p, Formulation f, JacobianMode mode) {
  validate(p);
  AssemblyPlan plan = make_plan(p);
  NormalEquations out;
  out.cost = assemble(p, f, mode, &plan, &out.gradient);
  out.hessian = to_sparse_upper(plan);
  return out;
}

SolveReport solve(Problem& p, const SolveOptions& options) {
  using Clock = std::chrono::steady_clock;
  validate(p);
  const auto t_start = Clock::now();
  const int n = parameter_dimension(p);
  AssemblyPlan plan = make_plan(p);
  Eigen::VectorXd gradient(n);

  SolveReport report;
  report.formulation = options.formulation;
  report.jacobian_mode = options.jacobian_mode;

  double cost = evaluate_cost(p, options.formulation);
  report.initial_cost = cost;
  double mu = -1.0;  // set from the first Hessian diagonal
  int accepted_since_projection = 0;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Upper> ldlt;
  bool pattern_analyzed = false;
  Eigen::SparseMatrix<double> identity(n, n);
  identity.setIdentity();

  for (int outer = 0; outer < options.max_iterations; ++outer) {
    const auto t_iter = Clock::now();
    cost = assemble(p, options.formulation, options.jacobian_mode, &plan, &gradient);
    const Eigen::SparseMatrix<double> h = to_sparse_upper(plan);

    if (gradient.lpNorm<Eigen::Infinity>() < options.grad_tol) {
      report.converged = true;
      report.message = "gradient below tolerance";
      break;
    }
    if (mu < 0.0) {
      double max_diag = 0.0;
      for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, h.coeff(i, i));
      mu = options.mu_init_scale * std::max(max_diag, 1e-300);
    }

    bool stop = false;
    while (true) {
      Eigen::SparseMatrix<double> damped = h;
      damped += mu * identity;
      if (!pattern_analyzed) {
        ldlt.analyzePattern(damped);
        pattern_analyzed = true;
      }
      ldlt.factorize(damped);
      if (ldlt.info() != Eigen::Success) {
        mu *= options.mu_up;
        if (mu > options.mu_max) {
          report.message = "damping escalation exhausted (factorization)";
          stop = true;
          break;
        }
        continue;
      }
      const Eigen::VectorXd delta = ldlt.solve(-gradient);
      Problem candidate = p;
      apply_step(candidate, delta);
      const double new_cost = evaluate_cost(candidate, options.formulation);
      const double decrease = cost - new_cost;
      if (decrease > 0.0) {
        p = std::move(candidate);
        const double prev = cost;
        cost = new_cost;
        mu = std::max(mu * options.mu_down, 1e-300);
        report.iterations += 1;
        if (++accepted_since_projection >= 64) {
          reproject_rotations(p);
          accepted_since_projection = 0;
        }
        if (decrease <= options.cost_rel_tol * std::max(prev, 1e-300)) {
          report.converged = true;
          report.message = "relative cost decrease below tolerance";
          stop = true;
        }
        break;
      }
      if (-decrease <= options.cost_rel_tol * std::max(cost, 1e-300)) {
        // The step no longer changes the cost materially; stop at the floor.
        report.converged = true;
        report.message = "cost change below tolerance";
        stop = true;
        break;
      }
      mu *= options.mu_up;
      if (mu > options.mu_max) {
        report.message = "damping escalation exhausted";
        stop = true;
        break;
      }
    }
    report.iteration_seconds.push_back(
        std::chrono::duration<double>(Clock::now() - t_iter).count());
    if (stop) break;
    if (outer == options.max_iterations - 1) {
      report.message = "iteration limit reached";
    }
  }

  report.final_cost = cost;
  report.total_seconds = std::chrono::duration<double>(Clock::now() - t_start).count();
  if (report.message.empty()) report.message = "iteration limit reached";
  return report;
}

}  // namespace liespline
