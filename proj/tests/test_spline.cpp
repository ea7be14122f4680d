#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "liespline/sampling.hpp"
#include "liespline/spline.hpp"

using namespace liespline;

namespace {

template <class G>
Spline<G> constant_spline(int k, const typename G::Element& x, int num_knots = 10) {
  Spline<G> s;
  s.order = k;
  s.t0 = 0.0;
  s.dt = 1.0;
  s.knots.assign(num_knots, x);
  return s;
}

template <class G>
double rel_err(const typename G::Tangent& a, const typename G::Tangent& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

TEST_CASE("locate: segment index, normalized time, boundary ownership") {
  RngStream rng(11, "spline/locate");
  auto s = random_walk_spline<So3d>(rng, 4, 12, 2.0, 0.5);
  auto c0 = locate(s, 2.0);
  CHECK(c0.i == 0);
  CHECK(c0.lam.u == 0.0);
  auto c1 = locate(s, 2.0 + 1.5 * 0.5);
  CHECK(c1.i == 1);
  CHECK(c1.lam.u == doctest::Approx(0.5).epsilon(1e-12));

  CHECK(s.segment_count() == 9);
  CHECK_THROWS_AS((void)locate(s, 2.0 - 1e-9), std::out_of_range);
  CHECK_THROWS_AS((void)locate(s, s.time_max()), std::out_of_range);
  CHECK_NOTHROW((void)locate(s, s.time_max() - 1e-9));
}

TEST_CASE("locate on constant knots: zero differences, identity factors") {
  RngStream rng(12, "spline/const");
  const Rotation3 x = random_rotation(rng);
  auto s = constant_spline<So3d>(5, x);
  auto ctx = locate(s, 3.7);
  for (int m = 1; m < 5; ++m) {
    CHECK(ctx.d[m - 1].norm() < 1e-14);
    CHECK((ctx.A[m - 1] - Rotation3::Identity()).norm() < 1e-14);
  }
  CHECK((evaluate(ctx) - x).norm() < 1e-14);
  CHECK(velocity_recursive(ctx).norm() < 1e-14);
  CHECK(velocity_baseline(ctx).norm() < 1e-14);
  CHECK(acceleration_recursive(ctx).norm() < 1e-14);
  CHECK(acceleration_baseline(ctx).norm() < 1e-14);
  CHECK(jerk_recursive(ctx).norm() < 1e-14);
}

TEST_CASE("order-2 spline interpolates its knots exactly") {
  RngStream rng(13, "spline/k2");
  auto s = random_walk_spline<So3d>(rng, 2, 8);
  for (int i = 0; i + 1 < static_cast<int>(s.knots.size()); ++i) {
    auto ctx = locate(s, s.t0 + i * s.dt);
    CHECK(ctx.lam.u == 0.0);
    CHECK((evaluate(ctx) - s.knots[i]).norm() == 0.0);
  }
}

TEST_CASE("R^d tag reproduces the Euclidean matrix form and its derivatives") {
  RngStream rng(14, "spline/rd");
  for (int k = 2; k <= 6; ++k) {
    Spline<Rdd<3>> s;
    s.order = k;
    s.t0 = -1.0;
    s.dt = 0.8;
    for (int i = 0; i < 12; ++i) s.knots.push_back(rng.ball<3>(4.0));
    const auto& bm = blending_matrices(k);
    for (int n = 0; n < 100; ++n) {
      const double t = rng.uniform(s.time_min(), s.time_max() - 1e-9);
      auto ctx = locate(s, t);
      Eigen::Vector3d mat[4];
      for (int r = 0; r < 4; ++r) {
        const Eigen::VectorXd coeff = bm.m * monomials(k, ctx.lam.u, r);
        mat[r].setZero();
        for (int j = 0; j < k; ++j) mat[r] += coeff[j] * s.knots[ctx.i + j];
      }
      CHECK((evaluate(ctx) - mat[0]).norm() < 1e-12 * std::max(1.0, mat[0].norm()));
      CHECK(rel_err<Rdd<3>>(velocity_recursive(ctx), mat[1]) < 1e-12);
      CHECK(rel_err<Rdd<3>>(velocity_baseline(ctx), mat[1]) < 1e-12);
      CHECK(rel_err<Rdd<3>>(acceleration_recursive(ctx), mat[2]) < 1e-12);
      CHECK(rel_err<Rdd<3>>(acceleration_baseline(ctx), mat[2]) < 1e-12);
      CHECK(rel_err<Rdd<3>>(jerk_recursive(ctx), mat[3]) < 1e-12);
    }
  }
}

TEST_CASE("recursive and baseline formulations agree on SO(3) and SE(3)") {
  RngStream rng(15, "spline/equiv");
  for (int k = 2; k <= 6; ++k) {
    for (int n = 0; n < 200; ++n) {
      {
        auto s = random_walk_spline<So3d>(rng, k, k + 4);
        const double t = rng.uniform(s.time_min(), s.time_max() - 1e-9);
        auto ctx = locate(s, t);
        const auto wr = velocity_recursive(ctx);
        const auto wb = velocity_baseline(ctx);
        CHECK(rel_err<So3d>(wr, wb) < 1e-12);
        const auto ar = acceleration_recursive(ctx);
        const auto ab = acceleration_baseline(ctx);
        CHECK(rel_err<So3d>(ar, ab) < 1e-11);
        const auto ag = acceleration_recursive_generic(ctx);
        CHECK(rel_err<So3d>(ag, ar) < 1e-12);
      }
      {
        auto s = random_walk_spline<Se3d>(rng, k, k + 4);
        const double t = rng.uniform(s.time_min(), s.time_max() - 1e-9);
        auto ctx = locate(s, t);
        CHECK(rel_err<Se3d>(velocity_recursive(ctx), velocity_baseline(ctx)) < 1e-12);
        CHECK(rel_err<Se3d>(acceleration_recursive(ctx), acceleration_baseline(ctx)) < 1e-11);
      }
    }
  }
}

TEST_CASE("operation counts match the complexity table") {
  RngStream rng(16, "spline/opcount");
  for (int k = 2; k <= 6; ++k) {
    auto s = random_walk_spline<So3d>(rng, k, k + 3);
    auto se = random_walk_spline<Se3d>(rng, k, k + 3);
    auto ctx = locate(s, s.time_min() + 0.4 * (s.time_max() - s.time_min()));
    auto ctxe = locate(se, se.time_min() + 0.4 * (se.time_max() - se.time_min()));

    OpCounter c;
    (void)velocity_baseline(ctx, &c);
    CHECK(c.mm_mults == (k - 1) * (k - 1) + 1);
    CHECK(c.mv_mults == 0);
    CHECK(c.adds == k - 2);

    c.reset();
    (void)velocity_recursive(ctx, &c);
    CHECK(c.mm_mults == 1);
    CHECK(c.mv_mults == k - 1);
    CHECK(c.adds == k - 1);

    c.reset();
    (void)velocity_recursive(ctxe, &c);
    CHECK(c.mm_mults == 1);
    CHECK(c.mv_mults == k - 1);
    CHECK(c.adds == k - 1);

    c.reset();
    (void)acceleration_baseline(ctx, &c);
    CHECK(c.mm_mults == k * k * (k - 1) / 2);
    CHECK(c.adds == k * k * (k - 1) / 2);

    c.reset();
    (void)acceleration_baseline(ctxe, &c);
    CHECK(c.mm_mults == k * k * (k - 1) / 2);
    CHECK(c.adds == k * k * (k - 1) / 2);

    c.reset();
    (void)acceleration_recursive(ctxe, &c);  // generic path
    CHECK(c.mm_mults == 2 * k);
    CHECK(c.mv_mults == k - 1);
    CHECK(c.adds == 3 * k - 2);

    c.reset();
    (void)acceleration_recursive(ctx, &c);  // SO(3) specialization
    CHECK(c.mm_mults == 2);
    CHECK(c.mv_mults == 2 * (k - 1));
    CHECK(c.adds == 2 * k - 1);
  }
}

TEST_CASE("blue numbers for cubic splines") {
  RngStream rng(17, "spline/blue");
  auto s = random_walk_spline<So3d>(rng, 4, 8);
  auto se = random_walk_spline<Se3d>(rng, 4, 8);
  auto ctx = locate(s, 1.3);
  auto ctxe = locate(se, 1.3);

  OpCounter c;
  (void)velocity_baseline(ctx, &c);
  CHECK(c.mm_mults == 10);
  CHECK(c.adds == 2);
  c.reset();
  (void)velocity_recursive(ctx, &c);
  CHECK(c.mm_mults == 1);
  CHECK(c.mv_mults == 3);
  CHECK(c.adds == 3);
  c.reset();
  (void)acceleration_baseline(ctx, &c);
  CHECK(c.mm_mults == 24);
  CHECK(c.adds == 24);
  c.reset();
  (void)acceleration_recursive(ctxe, &c);
  CHECK(c.mm_mults == 8);
  CHECK(c.mv_mults == 3);
  CHECK(c.adds == 10);
  c.reset();
  (void)acceleration_recursive(ctx, &c);
  CHECK(c.mm_mults == 2);
  CHECK(c.mv_mults == 6);
  CHECK(c.adds == 7);
}

TEST_CASE("finite-difference ladder for SO(3) and SE(3)") {
  RngStream rng(18, "spline/fdladder");
  const double h = 1e-6;
  for (int k = 2; k <= 6; ++k) {
    for (int n = 0; n < 40; ++n) {
      auto run = [&](auto group_tag) {
        using G = decltype(group_tag);
        auto s = random_walk_spline<G>(rng, k, k + 4);
        const int i = static_cast<int>(rng.uniform(0, s.segment_count() - 1e-9));
        const double u = rng.uniform(0.05, 0.95);
        auto at = [&](double uu) { return make_context<G>(s.knots.data() + i, k, i, uu); };
        auto ctx = at(u);
        auto lo = at(u - h);
        auto hi = at(u + h);

        // velocity vs Log-local displacement of the value
        const auto xlo = evaluate(lo);
        const auto xhi = evaluate(hi);
        const typename G::Tangent w_fd =
            G::log(G::compose(G::inverse(xlo), xhi)) / (2 * h);
        CHECK(rel_err<G>(w_fd, velocity_recursive(ctx)) < 1e-5);

        // acceleration vs FD of velocity
        const typename G::Tangent a_fd =
            (velocity_recursive(hi) - velocity_recursive(lo)) / (2 * h);
        CHECK(rel_err<G>(a_fd, acceleration_recursive(ctx)) < 1e-5);

        // jerk vs FD of acceleration
        const typename G::Tangent j_fd =
            (acceleration_recursive(hi) - acceleration_recursive(lo)) / (2 * h);
        CHECK(rel_err<G>(j_fd, jerk_recursive(ctx)) < 1e-5);
      };
      run(So3d{});
      run(Se3d{});
    }
  }
}

TEST_CASE("value, velocity and acceleration are continuous at interior knots") {
  RngStream rng(19, "spline/smooth");
  for (int k = 4; k <= 6; ++k) {
    for (int n = 0; n < 20; ++n) {
      auto s = random_walk_spline<So3d>(rng, k, k + 5);
      for (int i = 0; i + 1 < s.segment_count(); ++i) {
        auto left = make_context<So3d>(s.knots.data() + i, k, i, 1.0);
        auto right = make_context<So3d>(s.knots.data() + i + 1, k, i + 1, 0.0);
        CHECK((evaluate(left) - evaluate(right)).norm() < 1e-8);
        CHECK((velocity_recursive(left) - velocity_recursive(right)).norm() < 1e-8);
        CHECK((acceleration_recursive(left) - acceleration_recursive(right)).norm() < 1e-8);
      }
    }
  }
}

TEST_CASE("derivatives bundle: orders, time scaling, formulation agreement") {
  RngStream rng(20, "spline/bundle");
  auto s = random_walk_spline<So3d>(rng, 4, 10, 0.0, 2.0);
  const double t = 7.3;

  auto b0 = derivatives(s, t, 0);
  CHECK(!b0.velocity);
  CHECK(!b0.acceleration);
  CHECK(!b0.jerk);

  auto b1 = derivatives(s, t, 1);
  auto b1t = derivatives(s, t, 1, Formulation::kRecursive, true);
  CHECK((*b1t.velocity - *b1.velocity / 2.0).norm() < 1e-15);

  auto br = derivatives(s, t, 2, Formulation::kRecursive);
  auto bb = derivatives(s, t, 2, Formulation::kBaseline);
  CHECK(rel_err<So3d>(*br.velocity, *bb.velocity) < 1e-11);
  CHECK(rel_err<So3d>(*br.acceleration, *bb.acceleration) < 1e-11);

  CHECK_THROWS_AS((void)derivatives(s, t, 3, Formulation::kBaseline), std::invalid_argument);
  CHECK_THROWS_AS((void)derivatives(s, s.time_max() + 1.0, 1), std::out_of_range);
}

TEST_CASE("group-derivative reconstruction") {
  RngStream rng(21, "spline/reconstruct");
  auto s = random_walk_spline<So3d>(rng, 5, 11);
  const double t = 3.21;
  auto b = derivatives(s, t, 3);
  auto g = reconstruct_group_derivative(b);

  // X^{-1} Xdot lies in the algebra: skew-symmetric
  const Eigen::Matrix3d body = b.value.transpose() * g.xdot;
  CHECK((body + body.transpose()).norm() < 1e-10);

  // entrywise FD of the value matches Xdot (u-parameterized)
  const double h = 1e-6;
  auto ctx = locate(s, t);
  auto lo = make_context<So3d>(s.knots.data() + ctx.i, 5, ctx.i, ctx.lam.u - h);
  auto hi = make_context<So3d>(s.knots.data() + ctx.i, 5, ctx.i, ctx.lam.u + h);
  const Eigen::Matrix3d fd = (evaluate(hi) - evaluate(lo)) / (2 * h);
  CHECK((fd - g.xdot).norm() < 1e-5);

  // zero motion: all reconstructions vanish
  auto cs = constant_spline<So3d>(4, random_rotation(rng));
  auto cb = derivatives(cs, 2.5, 2);
  auto cg = reconstruct_group_derivative(cb);
  CHECK(cg.xdot.norm() < 1e-14);
  CHECK(cg.xddot.norm() < 1e-14);

  auto bv = derivatives(s, t, 0);
  CHECK_THROWS_AS((void)reconstruct_group_derivative(bv), std::invalid_argument);
}

TEST_CASE("constant-rate spline has constant body velocity") {
  // Knots X_i = X_0 Exp(i c) give d_j = c for every j; since the lambda
  // derivative weights sum to 1, the u-velocity equals c everywhere.
  RngStream rng(22, "spline/geodesic");
  const Eigen::Vector3d c = rng.ball<3>(0.8);
  Spline<So3d> s;
  s.order = 5;
  s.t0 = 0;
  s.dt = 1;
  Rotation3 x = random_rotation(rng);
  for (int i = 0; i < 12; ++i) {
    s.knots.push_back(x);
    x = x * so3_exp(c);
  }
  for (int n = 0; n < 25; ++n) {
    const double t = rng.uniform(s.time_min(), s.time_max() - 1e-9);
    CHECK((velocity_recursive(locate(s, t)) - c).norm() < 1e-12);
    CHECK(acceleration_recursive(locate(s, t)).norm() < 1e-12);
  }
}
