#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "liespline/sampling.hpp"
#include "liespline/so3_jacobians.hpp"

using namespace liespline;

namespace {

constexpr double kFdStep = 1e-6;

// Context assembled directly from a base knot and difference vectors; used to
// differentiate with respect to the d_j themselves.
SegmentContext<So3d> ctx_from_d(const Rotation3& x0, const std::vector<Eigen::Vector3d>& d,
                                int k, double u) {
  std::vector<Rotation3> knots(k);
  knots[0] = x0;
  for (int j = 1; j < k; ++j) knots[j] = knots[j - 1] * so3_exp(d[j - 1]);
  return make_context<So3d>(knots.data(), k, 0, u);
}

struct Fd3 {
  Eigen::Matrix3d rho, omega, omegadot;
};

// Central finite differences of (rho, omega, omegadot) under a user-supplied
// perturbation of the context.
template <class Perturb>
Fd3 fd_blocks(const Perturb& perturbed_ctx) {
  Fd3 out;
  for (int axis = 0; axis < 3; ++axis) {
    Eigen::Vector3d step = Eigen::Vector3d::Zero();
    step[axis] = kFdStep;
    const SegmentContext<So3d> hi = perturbed_ctx(step);
    const SegmentContext<So3d> lo = perturbed_ctx((-step).eval());
    out.rho.col(axis) =
        (so3_log<double>(evaluate(hi)) - so3_log<double>(evaluate(lo))) / (2 * kFdStep);
    out.omega.col(axis) = (velocity_recursive(hi) - velocity_recursive(lo)) / (2 * kFdStep);
    out.omegadot.col(axis) =
        (acceleration_recursive(hi) - acceleration_recursive(lo)) / (2 * kFdStep);
  }
  return out;
}

double rel(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

TEST_CASE("jac_exp_vector: degenerate inputs and finite differences") {
  RngStream rng(60, "jac/expvec");
  CHECK(jac_exp_vector(0.0, rng.ball<3>(2.0), rng.ball<3>(2.0)).norm() == 0.0);
  CHECK(jac_exp_vector(0.7, rng.ball<3>(2.0), Eigen::Vector3d::Zero()).norm() == 0.0);

  for (int n = 0; n < 200; ++n) {
    const double lambda = rng.uniform(-1.0, 1.0);
    const Eigen::Vector3d d = rng.ball<3>(1.5);
    const Eigen::Vector3d w = rng.ball<3>(2.0);
    const Eigen::Matrix3d jac = jac_exp_vector(lambda, d, w);
    for (int axis = 0; axis < 3; ++axis) {
      Eigen::Vector3d step = Eigen::Vector3d::Zero();
      step[axis] = kFdStep;
      const Eigen::Vector3d hi = so3_exp<double>((-lambda * (d + step)).eval()) * w;
      const Eigen::Vector3d lo = so3_exp<double>((-lambda * (d - step)).eval()) * w;
      CHECK(((hi - lo) / (2 * kFdStep) - jac.col(axis)).norm() <=
            1e-5 * std::max(1.0, jac.col(axis).norm()));
    }
  }
}

TEST_CASE("local jacobians: last-index block equals the theorem expression") {
  RngStream rng(61, "jac/lastindex");
  for (int k = 3; k <= 6; ++k) {
    auto s = random_walk_spline<So3d>(rng, k, k + 3, 0.0, 1.0, 0.5);
    auto ctx = locate(s, rng.uniform(s.time_min(), s.time_max() - 1e-9));
    const auto inter = so3_intermediates(ctx);
    const auto local = local_jacobians(ctx, inter);

    const int j = k - 1;
    const double lam = ctx.lam.lambda[j];
    const Eigen::Matrix3d expected =
        lam * ctx.A[j - 1].transpose() * so3_hat(inter.omega[j]) *
            so3_right_jacobian<double>((-lam * ctx.d[j - 1]).eval()) +
        ctx.lam.dlambda[j] * Eigen::Matrix3d::Identity();
    CHECK((local.d_omega_dd[j - 1] - expected).norm() < 1e-13);
  }
}

TEST_CASE("local jacobians: constant knots reduce to dlambda identity") {
  RngStream rng(62, "jac/const");
  const Rotation3 x = random_rotation(rng);
  for (int k = 3; k <= 6; ++k) {
    Spline<So3d> s;
    s.order = k;
    s.knots.assign(k + 2, x);
    auto ctx = locate(s, 1.4);
    const auto inter = so3_intermediates(ctx);
    const auto local = local_jacobians(ctx, inter);
    for (int j = 1; j < k; ++j) {
      CHECK((local.d_omega_dd[j - 1] -
             ctx.lam.dlambda[j] * Eigen::Matrix3d::Identity())
                .norm() < 1e-13);
      CHECK((local.d_omegadot_dd[j - 1] -
             ctx.lam.ddlambda[j] * Eigen::Matrix3d::Identity())
                .norm() < 1e-13);
    }
  }
}

TEST_CASE("local jacobians match finite differences over d_j") {
  RngStream rng(63, "jac/fd_d");
  int cases = 0;
  while (cases < 500) {
    const int k = 3 + static_cast<int>(rng.uniform(0, 4 - 1e-12));
    const Rotation3 x0 = random_rotation(rng);
    std::vector<Eigen::Vector3d> d(k - 1);
    for (auto& v : d) v = rng.ball<3>(0.7);
    const double u = rng.uniform(0.02, 0.98);
    const auto ctx = ctx_from_d(x0, d, k, u);
    const auto inter = so3_intermediates(ctx);
    const auto local = local_jacobians(ctx, inter);
    if (local.rho_near_branch) continue;
    ++cases;
    for (int j = 1; j < k; ++j) {
      const Fd3 fd = fd_blocks([&](const Eigen::Vector3d& step) {
        std::vector<Eigen::Vector3d> dp = d;
        dp[j - 1] += step;
        return ctx_from_d(x0, dp, k, u);
      });
      CHECK(rel(local.d_rho_dd[j - 1], fd.rho) < 1e-5);
      CHECK(rel(local.d_omega_dd[j - 1], fd.omega) < 1e-5);
      CHECK(rel(local.d_omegadot_dd[j - 1], fd.omegadot) < 1e-5);
    }
  }
}

TEST_CASE("knot jacobians match finite differences over left-perturbed knots") {
  RngStream rng(64, "jac/fd_knot");
  int cases = 0;
  while (cases < 500) {
    const int k = 3 + static_cast<int>(rng.uniform(0, 4 - 1e-12));
    auto s = random_walk_spline<So3d>(rng, k, k + 2, 0.0, 1.0, 0.5);
    const double t = rng.uniform(s.time_min(), s.time_max() - 1e-9);
    auto ctx = locate(s, t);
    const auto inter = so3_intermediates(ctx);
    const auto local = local_jacobians(ctx, inter);
    if (local.rho_near_branch) continue;
    ++cases;
    const auto knots = knot_jacobians(ctx, local);
    for (int j = 0; j < k; ++j) {
      const Fd3 fd = fd_blocks([&](const Eigen::Vector3d& step) {
        std::array<Rotation3, kMaxOrder> active{};
        for (int m = 0; m < k; ++m) active[m] = ctx.knot[m];
        active[j] = so3_exp(step) * active[j];
        return make_context<So3d>(active.data(), k, ctx.i, ctx.lam.u);
      });
      CHECK(rel(knots.d_rho[j], fd.rho) < 1e-5);
      CHECK(rel(knots.d_omega[j], fd.omega) < 1e-5);
      CHECK(rel(knots.d_omegadot[j], fd.omegadot) < 1e-5);
    }
  }
}

TEST_CASE("accumulator and direct acceleration jacobians are equivalent") {
  RngStream rng(65, "jac/equiv");
  for (int n = 0; n < 200; ++n) {
    const int k = 3 + static_cast<int>(rng.uniform(0, 4 - 1e-12));
    auto s = random_walk_spline<So3d>(rng, k, k + 2, 0.0, 1.0, 0.6);
    auto ctx = locate(s, rng.uniform(s.time_min(), s.time_max() - 1e-9));
    const auto inter = so3_intermediates(ctx);
    const auto local = local_jacobians(ctx, inter);
    for (int j = 1; j < k; ++j) {
      const Eigen::Matrix3d direct = acc_jacobian_direct(ctx, inter, j);
      CHECK((local.d_omegadot_dd[j - 1] - direct).norm() <
            1e-12 * std::max(1.0, direct.norm()));
    }
  }
}

TEST_CASE("velocity level jacobians have the zero structure") {
  RngStream rng(66, "jac/zero");
  auto s = random_walk_spline<So3d>(rng, 5, 8);
  auto ctx = locate(s, 2.2);
  const auto inter = so3_intermediates(ctx);
  for (int j = 1; j < 5; ++j) {
    for (int level = 1; level <= j; ++level) {
      CHECK(omega_level_jacobian(ctx, inter, level, j).norm() == 0.0);
    }
    CHECK(omega_level_jacobian(ctx, inter, j + 1, j).norm() > 0.0);
  }
}

TEST_CASE("constant knots: knot blocks follow the dlambda difference pattern") {
  RngStream rng(67, "jac/constknot");
  const Rotation3 x = random_rotation(rng);
  for (int k = 3; k <= 6; ++k) {
    Spline<So3d> s;
    s.order = k;
    s.knots.assign(k + 2, x);
    auto ctx = locate(s, 1.3);
    const auto inter = so3_intermediates(ctx);
    const auto knots = knot_jacobians(ctx, local_jacobians(ctx, inter));
    const Eigen::Matrix3d rt = x.transpose();
    for (int j = 0; j < k; ++j) {
      const double dl_j = (j >= 1) ? ctx.lam.dlambda[j] : 0.0;
      const double dl_next = (j + 1 < k) ? ctx.lam.dlambda[j + 1] : 0.0;
      CHECK((knots.d_omega[j] - (dl_j - dl_next) * rt).norm() < 1e-12);
    }
  }
}

TEST_CASE("commuting rotations reduce to the Euclidean weight pattern") {
  RngStream rng(68, "jac/commuting");
  Eigen::Vector3d axis(0.3, -0.5, 0.81);
  axis.normalize();
  for (int k = 3; k <= 6; ++k) {
    Spline<So3d> s;
    s.order = k;
    double theta = 0.2;
    for (int i = 0; i < k + 2; ++i) {
      s.knots.push_back(so3_exp<double>((theta * axis).eval()));
      theta += rng.uniform(0.05, 0.25);
    }
    auto ctx = locate(s, rng.uniform(s.time_min(), s.time_max() - 1e-9));
    const auto inter = so3_intermediates(ctx);
    const auto knots = knot_jacobians(ctx, local_jacobians(ctx, inter));
    for (int j = 0; j < k; ++j) {
      const double l_j = (j >= 1) ? ctx.lam.lambda[j] : 1.0;
      const double l_next = (j + 1 < k) ? ctx.lam.lambda[j + 1] : 0.0;
      const double dl_j = (j >= 1) ? ctx.lam.dlambda[j] : 0.0;
      const double dl_next = (j + 1 < k) ? ctx.lam.dlambda[j + 1] : 0.0;
      const double ddl_j = (j >= 1) ? ctx.lam.ddlambda[j] : 0.0;
      const double ddl_next = (j + 1 < k) ? ctx.lam.ddlambda[j + 1] : 0.0;
      CHECK((knots.d_rho[j] * axis - (l_j - l_next) * axis).norm() < 1e-11);
      CHECK((knots.d_omega[j] * axis - (dl_j - dl_next) * axis).norm() < 1e-11);
      CHECK((knots.d_omegadot[j] * axis - (ddl_j - ddl_next) * axis).norm() < 1e-11);
    }
  }
}

TEST_CASE("jacobian op counts grow linearly in the order") {
  std::array<std::int64_t, 7> mm{}, mv{};
  for (int k = 3; k <= 6; ++k) {
    const OpCounter c = jacobian_opcount(k);
    CHECK(c.mm_mults > 0);
    mm[k] = c.mm_mults;
    mv[k] = c.mv_mults;
  }
  const std::int64_t d1 = mm[4] - mm[3];
  CHECK(mm[5] - mm[4] == d1);
  CHECK(mm[6] - mm[5] == d1);
  CHECK(mv[4] - mv[3] == mv[5] - mv[4]);
  CHECK(mv[5] - mv[4] == mv[6] - mv[5]);
}
