#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "liespline/dual.hpp"
#include "liespline/lie.hpp"
#include "liespline/rng.hpp"

using namespace liespline;

namespace {

using D3 = Dual<3>;

// f evaluated at a dual-seeded point vs central differences.
template <class F>
void check_scalar_fn(F f, double x, double tol = 1e-8) {
  const double h = 1e-7;
  const double fd = (f(x + h) - f(x - h)) / (2 * h);
  Dual<1> dx(x, 0);
  const Dual<1> y = f(dx);
  CHECK(y.a == doctest::Approx(f(x)).epsilon(1e-14));
  CHECK(y.v[0] == doctest::Approx(fd).epsilon(tol));
}

}  // namespace

TEST_CASE("dual arithmetic and elementary functions match finite differences") {
  using std::abs;
  using std::atan2;
  using std::cos;
  using std::sin;
  using std::sqrt;
  check_scalar_fn([](auto x) { return x * x * x - 2.0 * x + 1.0; }, 0.7);
  check_scalar_fn([](auto x) { return (x + 2.0) / (3.0 * x - 1.0); }, 1.3);
  check_scalar_fn([](auto x) { return sqrt(x); }, 2.1);
  check_scalar_fn([](auto x) { return sin(x) * cos(2.0 * x); }, 0.4);
  check_scalar_fn([](auto x) { return atan2(sin(x), 1.0 + cos(x)); }, 0.9);
}

TEST_CASE("dual-valued rotation exponential differentiates like the right setup") {
  RngStream rng(80, "dual/exp");
  const double h = 1e-7;
  for (int n = 0; n < 100; ++n) {
    const Eigen::Vector3d v = rng.ball<3>(2.0);
    Vec3<D3> vd;
    for (int i = 0; i < 3; ++i) vd[i] = D3(v[i], i);
    const Mat3<D3> r = so3_exp<D3>(vd);
    for (int axis = 0; axis < 3; ++axis) {
      Eigen::Vector3d step = Eigen::Vector3d::Zero();
      step[axis] = h;
      const Rotation3 hi = so3_exp<double>((v + step).eval());
      const Rotation3 lo = so3_exp<double>((v - step).eval());
      for (int rr = 0; rr < 3; ++rr) {
        for (int cc = 0; cc < 3; ++cc) {
          const double fd = (hi(rr, cc) - lo(rr, cc)) / (2 * h);
          CHECK(r(rr, cc).v[axis] == doctest::Approx(fd).epsilon(5e-6));
        }
      }
    }
  }
}

TEST_CASE("dual exponential is smooth through zero") {
  Vec3<D3> v;
  for (int i = 0; i < 3; ++i) v[i] = D3(0.0, i);
  const Mat3<D3> r = so3_exp<D3>(v);
  // d/d v_z of R at v = 0 is hat(e_z)
  CHECK(r(1, 0).v[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r(0, 1).v[2] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r(0, 0).v[2] == doctest::Approx(0.0).epsilon(1e-12));

  const Vec3<D3> l = so3_log<D3>(r);
  for (int i = 0; i < 3; ++i) {
    CHECK(l[i].a == 0.0);
    for (int j = 0; j < 3; ++j) {
      CHECK(l[i].v[j] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("mixed double/dual Eigen expressions") {
  Eigen::Matrix3d m = Eigen::Matrix3d::Random();
  Vec3<D3> v;
  for (int i = 0; i < 3; ++i) v[i] = D3(0.5 * i + 0.1, i);
  const Vec3<D3> w = (m * v).eval();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      CHECK(w[r].v[c] == doctest::Approx(m(r, c)).epsilon(1e-14));
    }
  }
  const Vec3<D3> scaled = (2.5 * v).eval();
  CHECK(scaled[1].v[1] == doctest::Approx(2.5).epsilon(1e-15));
}
