#include <doctest.h>

#include <cmath>

#include "liespline/groups.hpp"
#include "liespline/lie.hpp"
#include "liespline/sampling.hpp"

using namespace liespline;

namespace {
constexpr double kPi = 3.14159265358979323846;

Eigen::Vector3d random_tangent_below_pi(RngStream& rng) {
  Eigen::Vector3d v = rng.ball<3>(kPi - 1e-3);
  return v;
}
}  // namespace

TEST_CASE("so3 exp: zero tangent gives identity") {
  const Rotation3 r = so3_exp<double>(Eigen::Vector3d::Zero());
  CHECK((r - Rotation3::Identity()).norm() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("so3 exp: quarter turn about x") {
  // Rodrigues by hand: R = I + sin(t) K + (1-cos t) K^2 with t = pi/2,
  // K = hat(e_x), giving rows (1,0,0), (0,0,-1), (0,1,0).
  const Rotation3 r = so3_exp<double>(Eigen::Vector3d(kPi / 2, 0, 0));
  Rotation3 expected;
  expected << 1, 0, 0, 0, 0, -1, 0, 1, 0;
  CHECK((r - expected).norm() < 1e-14);
  CHECK((r.col(1) - Eigen::Vector3d(0, 0, 1)).norm() < 1e-14);
}

TEST_CASE("so3 exp/log round trip on 1000 random rotations") {
  RngStream rng(42, "lie/roundtrip");
  for (int n = 0; n < 1000; ++n) {
    const Eigen::Vector3d v = random_tangent_below_pi(rng);
    const Rotation3 r = so3_exp(v);
    const Rotation3 r2 = so3_exp<double>(so3_log(r));
    CHECK((r - r2).norm() < 1e-12);
  }
}

TEST_CASE("so3 log: identity and quarter turn about z") {
  CHECK(so3_log<double>(Rotation3::Identity()).norm() == 0.0);
  const Rotation3 r = so3_exp<double>(Eigen::Vector3d(0, 0, kPi / 2));
  const Eigen::Vector3d v = so3_log(r);
  CHECK((v - Eigen::Vector3d(0, 0, kPi / 2)).norm() < 1e-14);
}

TEST_CASE("so3 log preserves tangent norm below pi") {
  RngStream rng(43, "lie/lognorm");
  for (int n = 0; n < 300; ++n) {
    const Eigen::Vector3d v = random_tangent_below_pi(rng);
    CHECK(so3_log(so3_exp(v)).norm() == doctest::Approx(v.norm()).epsilon(1e-11));
  }
}

TEST_CASE("so3 log rejects the branch at pi") {
  const Rotation3 r = so3_exp<double>(Eigen::Vector3d(kPi, 0, 0));
  CHECK_THROWS_AS((void)so3_log(r), std::domain_error);
}

TEST_CASE("hat and vee") {
  const Eigen::Vector3d v(1, 2, 3);
  Eigen::Matrix3d expected;
  expected << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  CHECK((so3_hat(v) - expected).norm() == 0.0);

  RngStream rng(44, "lie/hatvee");
  for (int n = 0; n < 100; ++n) {
    const Eigen::Vector3d a = rng.ball<3>(5.0);
    const Eigen::Vector3d b = rng.ball<3>(5.0);
    CHECK((so3_vee(so3_hat(a)) - a).norm() == 0.0);
    CHECK((so3_hat(a) * b - a.cross(b)).norm() < 1e-14);
  }
}

TEST_CASE("vee rejects non-skew matrices") {
  Eigen::Matrix3d m = so3_hat(Eigen::Vector3d(1, 2, 3));
  m(0, 1) += 1e-6;
  CHECK_THROWS_AS((void)so3_vee(m), std::invalid_argument);
  Eigen::Matrix4d m4 = se3_hat<double>(Vec6<double>::Ones());
  m4(3, 0) = 1e-6;
  CHECK_THROWS_AS((void)se3_vee(m4), std::invalid_argument);
}

TEST_CASE("adjoint: identity, SO(3) equality, defining property") {
  CHECK((So3d::adjoint(Rotation3::Identity()) - Eigen::Matrix3d::Identity()).norm() == 0.0);

  RngStream rng(45, "lie/adjoint");
  for (int n = 0; n < 1000; ++n) {
    const Rotation3 r = random_rotation(rng);
    CHECK((So3d::adjoint(r) - r).norm() == 0.0);

    const Eigen::Vector3d v = rng.ball<3>(2.0);
    // Adj_X v = (X hat(v) X^{-1})^vee
    const Eigen::Vector3d lhs = So3d::adjoint(r) * v;
    const Eigen::Vector3d rhs = so3_vee_unchecked<double>((r * so3_hat(v) * r.transpose()).eval());
    CHECK((lhs - rhs).norm() < 1e-12);

    const RigidTransformd x = random_rigid_transform(rng);
    const Vec6<double> v6 = rng.ball<6>(2.0);
    const Vec6<double> lhs6 = se3_adjoint(x) * v6;
    const Vec6<double> rhs6 = se3_vee_unchecked<double>(
        (x.matrix() * se3_hat(v6) * x.inverse().matrix()).eval());
    CHECK((lhs6 - rhs6).norm() < 1e-11);
  }
}

TEST_CASE("adjoint identities on both sides, 1000 draws") {
  RngStream rng(46, "lie/adjident");
  for (int n = 0; n < 1000; ++n) {
    const Rotation3 x = random_rotation(rng);
    const Eigen::Vector3d v = rng.ball<3>(1.5);
    // X Exp(v) = Exp(Adj_X v) X
    CHECK((x * so3_exp(v) - so3_exp<double>((So3d::adjoint(x) * v).eval()) * x).norm() < 1e-12);
    // Exp(v) X = X Exp(Adj_{X^{-1}} v)
    CHECK((so3_exp(v) * x -
           x * so3_exp<double>((So3d::adjoint(x.transpose().eval()) * v).eval()))
              .norm() < 1e-12);

    const RigidTransformd t = random_rigid_transform(rng);
    const Vec6<double> v6 = rng.ball<6>(1.5);
    const Eigen::Matrix4d lhs = (t * se3_exp(v6)).matrix();
    const Eigen::Matrix4d rhs =
        (se3_exp<double>((se3_adjoint(t) * v6).eval()) * t).matrix();
    CHECK((lhs - rhs).norm() < 1e-11);
  }
}

TEST_CASE("adjoint is a homomorphism") {
  RngStream rng(47, "lie/adjhom");
  for (int n = 0; n < 200; ++n) {
    const RigidTransformd a = random_rigid_transform(rng);
    const RigidTransformd b = random_rigid_transform(rng);
    CHECK((se3_adjoint(a * b) - se3_adjoint(a) * se3_adjoint(b)).norm() < 1e-11);
  }
}

TEST_CASE("commutator") {
  const Eigen::Matrix3d m = so3_hat(Eigen::Vector3d(0.3, -0.2, 0.9));
  CHECK(commutator(m, m).norm() == 0.0);

  const Eigen::Vector3d e1(1, 0, 0), e2(0, 1, 0), e3(0, 0, 1);
  CHECK((so3_vee(commutator(so3_hat(e1), so3_hat(e2))) - e3).norm() == 0.0);

  RngStream rng(48, "lie/commutator");
  for (int n = 0; n < 500; ++n) {
    const Eigen::Vector3d v = rng.ball<3>(3.0);
    const Eigen::Vector3d w = rng.ball<3>(3.0);
    CHECK((so3_vee(commutator(so3_hat(v), so3_hat(w))) - v.cross(w)).norm() < 1e-13);
  }
}

TEST_CASE("right jacobian: limit at zero and inverse pair") {
  CHECK((so3_right_jacobian<double>(Eigen::Vector3d::Zero()) - Eigen::Matrix3d::Identity())
            .norm() == 0.0);

  RngStream rng(49, "lie/jr");
  for (int n = 0; n < 500; ++n) {
    Eigen::Vector3d dir = rng.ball<3>(1.0);
    if (dir.norm() < 1e-12) dir = Eigen::Vector3d(1, 0, 0);
    dir.normalize();
    const double mag = std::exp(rng.uniform(std::log(1e-8), std::log(3.0)));
    const Eigen::Vector3d v = mag * dir;
    const Eigen::Matrix3d prod = so3_right_jacobian(v) * so3_right_jacobian_inv(v);
    CHECK((prod - Eigen::Matrix3d::Identity()).norm() < 1e-10);
    if (mag >= 1e-6) {
      CHECK((so3_right_jacobian_inv(v) - so3_right_jacobian(v).inverse()).norm() < 1e-9);
    }
  }
}

TEST_CASE("right jacobian matches its defining finite difference") {
  RngStream rng(50, "lie/jrfd");
  const double eps = 1e-6;
  for (int n = 0; n < 200; ++n) {
    const Eigen::Vector3d v = rng.ball<3>(2.5);
    Eigen::Vector3d w = rng.ball<3>(1.0);
    if (w.norm() < 1e-12) w = Eigen::Vector3d(0, 1, 0);
    w.normalize();
    const Eigen::Vector3d fd =
        so3_log<double>((so3_exp(v).transpose() * so3_exp<double>((v + eps * w).eval())).eval()) /
        eps;
    CHECK((fd - so3_right_jacobian(v) * w).norm() <= 1e-5);
  }
}

TEST_CASE("perturb follows the left-multiplicative convention") {
  RngStream rng(51, "lie/perturb");
  const Rotation3 x = random_rotation(rng);
  CHECK((perturb(x, Eigen::Vector3d::Zero()) - x).norm() == 0.0);
  const Eigen::Vector3d v = rng.ball<3>(2.0);
  CHECK((perturb(Rotation3::Identity(), v) - so3_exp(v)).norm() == 0.0);
  for (int n = 0; n < 100; ++n) {
    const Eigen::Vector3d delta = rng.ball<3>(1e-3);
    const Rotation3 y = perturb(x, delta);
    CHECK((so3_log<double>((y * x.transpose()).eval()) - delta).norm() < 1e-9);
  }
}

TEST_CASE("group closure under long products") {
  RngStream rng(52, "lie/closure");
  Rotation3 r = Rotation3::Identity();
  RigidTransformd t;
  for (int n = 0; n < 64; ++n) {
    r = r * random_rotation(rng);
    t = t * random_rigid_transform(rng);
  }
  CHECK(is_rotation(r, 1e-11));
  CHECK(is_rotation(t.R, 1e-11));
  CHECK(is_rotation(so3_project(r), 1e-14));

  const Rotation3 rinv = r.transpose();
  CHECK(is_rotation((r * rinv).eval(), 1e-11));
}

TEST_CASE("se3 exp/log round trip and V-matrix coupling") {
  RngStream rng(53, "lie/se3");
  for (int n = 0; n < 500; ++n) {
    Vec6<double> v = rng.ball<6>(2.0);
    const RigidTransformd x = se3_exp(v);
    CHECK(is_rotation(x.R, 1e-12));
    const Vec6<double> v2 = se3_log(x);
    CHECK((v - v2).norm() < 1e-11);
  }
  // zero rotation: translation passes through unchanged
  Vec6<double> v = Vec6<double>::Zero();
  v.head<3>() = Eigen::Vector3d(1, -2, 3);
  const RigidTransformd x = se3_exp(v);
  CHECK((x.t - Eigen::Vector3d(1, -2, 3)).norm() == 0.0);
  CHECK((x.R - Rotation3::Identity()).norm() == 0.0);
}
