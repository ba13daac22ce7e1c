#include "doctest.h"
#include "test_util.hpp"

#include "sphereflow/linalg.hpp"

using namespace sftest;

namespace {

using P3 = Poly3<Q>;
using P2 = Poly2<Q>;

P2 uu() { return P2::var(0); }
P2 vv() { return P2::var(1); }

/// F(u,v) -> F(2u, 2v, u^2+v^2-1)
std::array<P2, 3> stereo_tilde() {
  return {uu() * Q(2), vv() * Q(2), uu() * uu() + vv() * vv() - P2(Q(1))};
}

}  // namespace

TEST_CASE("quadratic surd arithmetic") {
  Q r2 = Q::sqrt_of(2);
  CHECK(r2 * r2 == Q(2));
  CHECK(Q::sqrt_of(Rational(8)) == r2 * Q(2));
  CHECK(Q::sqrt_of(Rational(9, 4)) == Q(Rational(3, 2)));
  CHECK((Q(1) + r2).inverse() * (Q(1) + r2) == Q(1));
  CHECK((Q(1) - r2).sign() < 0);
  CHECK((Q(3) - Q(2) * r2).sign() > 0);  // 3 > 2.828
  CHECK(Q(3, 2, 2).sqrt() == Q(1) + r2);  // (1 + sqrt 2)^2 = 3 + 2 sqrt 2
  CHECK_THROWS_AS(Q(1, 1, 2).sqrt(), NotRepresentable);
  CHECK_THROWS_AS(r2 + Q::sqrt_of(3), MixedRadicand);
  CHECK(parse_rational("-1.25") == Rational(-5, 4));
  CHECK(parse_rational("3/6") == Rational(1, 2));
  CHECK(parse_rational("9/5") == Rational(9, 5));
  CHECK(parse_rational("-0.8") == Rational(-4, 5));
  CHECK(parse_rational("0.10") == Rational(1, 10));
  CHECK(parse_rational("007") == Rational(7));
  CHECK(parse_rational("0") == Rational(0));
  CHECK(parse_rational("000.000") == Rational(0));
  CHECK(parse_rational("1.5e-2") == Rational(3, 200));
  CHECK(std::fabs(r2.to_double() - std::sqrt(2.0)) < 1e-15);
}

TEST_CASE("substitute with the stereographic tilde map") {
  auto m = stereo_tilde();
  CHECK(pz<Q>().substitute<2>(m) == uu() * uu() + vv() * vv() - P2(Q(1)));
  CHECK(px<Q>().substitute<2>(m) == uu() * Q(2));
  // R = (a1 a5/sqrt(a2^2+a5^2)) x^2 with a1=3, a2=0, a5=4
  P3 R = px<Q>() * px<Q>() * Q(3);
  CHECK(R.substitute<2>(m) == uu() * uu() * Q(12));
}

TEST_CASE("substitute is a ring homomorphism") {
  std::mt19937 g(11);
  auto m = stereo_tilde();
  for (int trial = 0; trial < 25; ++trial) {
    P3 p = rand_poly<3>(g, 4, 5), q = rand_poly<3>(g, 4, 5);
    CHECK((p * q).substitute<2>(m) == p.substitute<2>(m) * q.substitute<2>(m));
    CHECK((p + q).substitute<2>(m) == p.substitute<2>(m) + q.substitute<2>(m));
    std::array<P3, 3> lin{rand_poly<3>(g, 2, 3), rand_poly<3>(g, 2, 3), rand_poly<3>(g, 2, 3)};
    CHECK((p * q).substitute<3>(lin) == p.substitute<3>(lin) * q.substitute<3>(lin));
  }
}

TEST_CASE("reduce_mod_sphere") {
  P3 x = px<Q>(), y = py<Q>(), z = pz<Q>();
  auto r1 = reduce_mod_sphere(x * x + y * y + z * z);
  CHECK(r1.multiplier == P3(Q(1)));
  CHECK(r1.remainder == P3(Q(1)));
  auto r2 = reduce_mod_sphere(sphere_poly<Q>());
  CHECK(r2.multiplier == P3(Q(1)));
  CHECK(r2.remainder.is_zero());
  // z^3 - z is -z(x^2+y^2) on the sphere; the remainder must agree with it there
  P3 cubic = z * z * z - z;
  auto r3 = reduce_mod_sphere(cubic);
  CHECK(r3.remainder == -(z * x * x) - z * y * y);
  std::mt19937 g(3);
  for (int i = 0; i < 20; ++i) {
    Eigen::Vector3d p = rand_unit(g);
    std::array<double, 3> a{p(0), p(1), p(2)};
    CHECK(std::fabs(r3.remainder.eval<double>(a) - cubic.eval<double>(a)) < 1e-12);
  }
  for (int trial = 0; trial < 20; ++trial) {
    P3 p = rand_poly<3>(g, 5, 6);
    auto red = reduce_mod_sphere(p);
    CHECK(p - red.multiplier * sphere_poly<Q>() - red.remainder == P3());
    for (const auto& [e, c] : red.remainder.terms()) CHECK(e[2] < 2);
    CHECK(reduce_mod_sphere(red.remainder).remainder == red.remainder);
  }
}

TEST_CASE("partials") {
  P3 x = px<Q>(), y = py<Q>(), z = pz<Q>();
  CHECK((x * x * y).derivative(0) == x * y * Q(2));
  P3 s = sphere_poly<Q>();
  CHECK(s.derivative(0) == x * Q(2));
  CHECK(s.derivative(1) == y * Q(2));
  CHECK(s.derivative(2) == z * Q(2));
  std::mt19937 g(5);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int trial = 0; trial < 10; ++trial) {
    P3 p = rand_poly<3>(g, 4, 6);
    std::array<double, 3> a{U(g), U(g), U(g)};
    for (int i = 0; i < 3; ++i) {
      const double h = 1e-5;
      auto ap = a, am = a;
      ap[i] += h;
      am[i] -= h;
      double fd = (p.eval<double>(ap) - p.eval<double>(am)) / (2 * h);
      double ex = p.derivative(i).eval<double>(a);
      CHECK(std::fabs(fd - ex) <= 1e-6 * std::max(1.0, std::fabs(ex)));
    }
  }
}

TEST_CASE("exact linear solve and Sturm counting") {
  std::vector<std::vector<Q>> A{{Q(1), Q(2)}, {Q(2), Q(4)}};
  auto s = solve_linear<Q>(A, {Q(3), Q(6)});
  CHECK(s.consistent);
  CHECK(s.rank == 1);
  CHECK(s.nullspace.size() == 1);
  CHECK_FALSE(solve_linear<Q>(A, {Q(3), Q(7)}).consistent);
  // (t-1)(t+2)(t^2+1)
  UPoly<Q> p({Q(-2), Q(1), Q(-1), Q(1), Q(1)});
  CHECK(count_real_roots(p) == 2);
  UPoly<Q> sq({Q(1), Q(-2), Q(1)});  // (t-1)^2
  CHECK(count_real_roots(sq) == 1);
}
