#include "doctest.h"
#include "test_util.hpp"

using namespace sftest;

namespace {

using P3 = Poly3<Q>;
P3 X_() { return px<Q>(); }
P3 Y_() { return py<Q>(); }
P3 Z_() { return pz<Q>(); }

/// rigid body field (a5 zy, -(a5+a7) zx, a7 yx)
HomVectorField<Q> triple_center(const Q& a5, const Q& a7) {
  return {{Z_() * Y_() * a5, Z_() * X_() * (-(a5 + a7)), Y_() * X_() * a7}};
}

}  // namespace

TEST_CASE("is_tangent") {
  QuadCoeffs<Q> ones;
  ones.a.fill(Q(1));
  CHECK(is_tangent(expand_quad(ones)));
  HomVectorField<Q> radial{{X_(), Y_(), Z_()}};
  CHECK_FALSE(is_tangent(radial));
  CHECK(is_tangent(triple_center(Q(1), Q(-2))));
  HomVectorField<Q> mixed{{X_() * X_(), Y_(), Z_()}};
  CHECK_THROWS_AS(is_tangent(mixed), DegreeMismatch);
}

TEST_CASE("to_quad_normal_form") {
  HomVectorField<Q> s{{X_() * Y_(), -(X_() * X_()), P3()}};
  CHECK(to_quad_normal_form(s) == quad({1, 0, 0, 0, 0, 0, 0, 0}));
  Q a1(2), a2(3), a5(5);
  HomVectorField<Q> f133{{X_() * Y_() * a1 + Y_() * Y_() * a2 + Y_() * Z_() * a5,
                          -(X_() * X_() * a1) - X_() * Y_() * a2, -(X_() * Y_() * a5)}};
  CHECK(to_quad_normal_form(f133) == quad({2, 3, 0, 0, 5, 0, 0, 0}));
  HomVectorField<Q> bad{{X_() * X_(), P3(), P3()}};
  CHECK_THROWS_AS(to_quad_normal_form(bad), NotInNormalForm);
  HomVectorField<Q> cubic{{X_() * X_() * Y_(), -(X_() * X_() * X_()), P3()}};
  CHECK_THROWS_AS(to_quad_normal_form(cubic), NotDegreeTwo);
  HomVectorField<Q> untangent{{X_() * Y_(), P3(), P3()}};
  CHECK_THROWS_AS(to_quad_normal_form(untangent), NotTangent);
}

TEST_CASE("normal form round trip on random coefficients") {
  std::mt19937 g(17);
  for (int trial = 0; trial < 50; ++trial) {
    auto q = rand_quad(g);
    auto X = expand_quad(q);
    CHECK(is_tangent(X));
    CHECK(to_quad_normal_form(X) == q);
  }
}

TEST_CASE("rotate") {
  std::mt19937 g(23);
  auto X = expand_quad(rand_quad(g));
  CHECK(rotate(X, Mat3<Q>(Mat3<Q>::Identity())) == X);
  for (int trial = 0; trial < 20; ++trial) {
    auto O = rand_rotation(g);
    auto Y = rotate(X, O);
    CHECK(is_tangent(Y));
    CHECK(Y.degree() == 2);
    CHECK(rotate(Y, Mat3<Q>(O.transpose())) == X);
  }
  Mat3<Q> skew = Mat3<Q>::Identity();
  skew(0, 1) = Q(1);
  CHECK_THROWS_AS(rotate(X, skew), NotOrthogonal);
}

TEST_CASE("nilpotent reduction matrix gives a5 = -a4^2/a7") {
  // nilpotent field with a1 = a2 = a4 = 1, a7 = 2; a5 = -a4^2/a7, a8 = -a4
  Q a1(1), a2(1), a4(1), a7(2);
  auto q = quad({a1, a2, 0, a4, -(a4 * a4) / a7, 0, a7, -a4});
  Q n = Q::sqrt_of(5);
  Mat3<Q> M;
  M << a4 / n, -a7 / n, Q(0), a7 / n, a4 / n, Q(0), Q(0), Q(0), Q(1);
  auto r = to_quad_normal_form(rotate(expand_quad(q), M));
  CHECK(r(5) == Q(Rational(-5, 2)));
  CHECK(r(4) == Q(0));
  CHECK(r(1) == (a1 * a4 + a2 * a7) / n);
  CHECK(r(2) == (a2 * a4 - a1 * a7) / n);
}

TEST_CASE("a4-removing rotation gives a4' = 0 and a8' = a4 + a8") {
  // a = (1,0,0,1,3,0,1,-5): alpha = (a5+a7)^2 - 4 a4 a8 = 36
  auto q = quad({1, 0, 0, 1, 3, 0, 1, -5});
  Q s = Q(4) + Q(6);  // a5 + a7 + sqrt(alpha)
  Q a8 = q(8);
  Q n = (s * s + Q(4) * a8 * a8).sqrt();
  Mat3<Q> M;
  M << -Q(2) * a8 / n, s / n, Q(0), s / n, Q(2) * a8 / n, Q(0), Q(0), Q(0), Q(1);
  auto r = to_quad_normal_form(rotate(expand_quad(q), M));
  CHECK(r(4) == Q(0));
  CHECK(r(8) == q(4) + q(8));
  CHECK(r(3) == Q(0));
  CHECK(r(6) == Q(0));
}

TEST_CASE("move_singularity_to_south_pole") {
  auto X = triple_center(Q(1), Q(-2));
  auto id = move_singularity_to_south_pole(X, Vec3<Q>(Q(0), Q(0), Q(-1)));
  CHECK(id.frame == "identity");
  CHECK(id.rotation == Mat3<Q>::Identity());
  auto mv = move_singularity_to_south_pole(X, Vec3<Q>(Q(0), Q(1), Q(0)));
  auto q = to_quad_normal_form(mv.field);
  CHECK(q(3) == Q(0));
  CHECK(q(6) == Q(0));
  CHECK(mv.rotation.transpose() * Vec3<Q>(Q(0), Q(1), Q(0)) == Vec3<Q>(Q(0), Q(0), Q(-1)));
  CHECK(mv.rotation.determinant() == Q(1));
  // homoclinic family: a1=-1, a2=-2, a5=1, a7=1, a8 free; already at the south pole
  auto f156 = expand_quad(quad({-1, -2, 0, 0, 1, 0, 1, Q(Rational(9, 5))}));
  auto m156 = move_singularity_to_south_pole(f156, Vec3<Q>(Q(0), Q(0), Q(-1)));
  CHECK(m156.frame == "identity");
  CHECK_THROWS_AS(move_singularity_to_south_pole(X, Vec3<Q>(Q(Rational(3, 5)), Q(Rational(4, 5)), Q(0))),
                  NotASingularity);
  // a singular point with mixed radicands forces the Householder frame
  std::mt19937 g(2);
  for (int trial = 0; trial < 10; ++trial) {
    auto O = rand_rotation(g);
    auto Y = rotate(X, Mat3<Q>(O.transpose()));
    Vec3<Q> p = O * Vec3<Q>(Q(0), Q(1), Q(0));
    auto m = move_singularity_to_south_pole(Y, p);
    auto qq = to_quad_normal_form(m.field);
    CHECK(qq(3) == Q(0));
    CHECK(qq(6) == Q(0));
    CHECK(m.rotation.determinant() == Q(1));
  }
}

TEST_CASE("invariant_plane_cofactor") {
  // centre family field: a2 = 5, a5 = -1, a7 = 2 (discriminant 17)
  Q a2(5), a5(-1), a7(2);
  auto X = expand_quad(quad({0, a2, 0, 0, a5, 0, a7, 0}));
  Q root = -a2 + Q::sqrt_of(17);
  Plane<Q> fp{Q(0), Q(1), Q(2) * a7 / root, Q(0)};
  auto res = invariant_plane_cofactor(X, fp);
  REQUIRE(res.invariant);
  CHECK(res.K == X_() * (root / Q(2)));
  CHECK(res.transversal);
  CHECK(derive_along(X, fp.poly()) - res.K * fp.poly() - res.multiplier * sphere_poly<Q>() == P3());

  Q b1(1), b2(1), b5(1);
  auto X133 = expand_quad(quad({b1, b2, 0, 0, b5, 0, 0, 0}));
  CHECK_FALSE(invariant_plane_cofactor(X133, Plane<Q>{Q(0), Q(0), Q(1), Q(0)}).invariant);

  // a1 = 0: circle of singularities with first integral a5 y - a2 z
  auto X2 = expand_quad(quad({0, 1, 0, 0, 1, 0, 0, 0}));
  auto r2 = invariant_plane_cofactor(X2, Plane<Q>{Q(0), Q(1), Q(-1), Q(0)});
  REQUIRE(r2.invariant);
  CHECK(r2.K.is_zero());
}

TEST_CASE("first_integral_check") {
  std::mt19937 g(8);
  auto X = expand_quad(rand_quad(g));
  CHECK(first_integral_check(X, sphere_poly<Q>()));
  // a2 a7 = a8 a1: H = a7 x + a1 z
  auto X5 = expand_quad(quad({1, 1, 0, 0, 0, 0, 2, 2}));
  CHECK(first_integral_check(X5, X_() * Q(2) + Z_()));
  CHECK_FALSE(first_integral_check(X5, X_()));
  // planar first integral of the a1 = a2 = 0 center, pulled back by u = -x/z, v = -y/z
  Q a4(1), a5(1), a7(-3);
  auto Xc = expand_quad(quad({0, 0, 0, a4, a5, 0, a7, -a4}));
  P3 num = X_() * X_() * (a7 + a5) - X_() * Y_() * (Q(2) * a4) + Z_() * Z_() * a5;
  P3 den = X_() * X_() * (a5 - a7) + X_() * Y_() * (Q(2) * a4) + Y_() * Y_() * (Q(2) * a5) + Z_() * Z_() * a5;
  CHECK(first_integral_check(Xc, num, den));
}

TEST_CASE("even degree fields are symmetric under the antipodal map") {
  std::mt19937 g(9);
  auto X = expand_quad(rand_quad(g)).to_double();
  for (int i = 0; i < 10; ++i) {
    Eigen::Vector3d p = rand_unit(g);
    CHECK((X.eval<double>(p) - X.eval<double>(Eigen::Vector3d(-p))).norm() < 1e-14);
  }
}
