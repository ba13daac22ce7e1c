#include "doctest.h"
#include "sphereflow/singular.hpp"
#include "test_util.hpp"

using namespace sftest;

namespace {

using P3 = Poly3<Q>;
P3 X_() { return px<Q>(); }
P3 Y_() { return py<Q>(); }
P3 Z_() { return pz<Q>(); }

HomVectorField<Q> euler_top(const Q& a5, const Q& a7) {
  return {{Z_() * Y_() * a5, Z_() * X_() * (-(a5 + a7)), Y_() * X_() * a7}};
}

bool same_point_sets(const std::vector<Eigen::Vector3d>& a, const SingularSet& s, double tol) {
  if (a.size() != s.points.size()) return false;
  for (const auto& r : s.points) {
    bool hit = false;
    for (const auto& p : a)
      if ((p - r.point).norm() < tol) hit = true;
    if (!hit) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("build_A reproduces the field by the cross product") {
  auto one = build_A(quad({1, 0, 0, 0, 0, 0, 0, 0}));
  CHECK(one.forms.L.is_zero());
  CHECK(one.forms.M.is_zero());
  CHECK(one.forms.N == -X_());
  CHECK(one.A(2, 0) == Q(-1));
  CHECK(one.A(2, 1) == Q(0));
  std::mt19937 g(11);
  for (int k = 0; k < 30; ++k) {
    auto q = rand_quad(g);
    auto m = build_A(q);
    const auto& f = m.forms;
    HomVectorField<Q> cross{{f.M * Z_() - f.N * Y_(), f.N * X_() - f.L * Z_(), f.L * Y_() - f.M * X_()}};
    CHECK(cross == expand_quad(q));
    CHECK(field_matrix(expand_quad(q)) == m.A);
  }
}

TEST_CASE("zero eigenvalue when the south pole is singular") {
  std::mt19937 g(12);
  for (int k = 0; k < 30; ++k) {
    auto q = rand_quad(g);
    q(3) = Q(0);
    q(6) = Q(0);
    auto A = build_A(q).A;
    CHECK(A.determinant() == Q(0));
    CHECK(A(0, 2) == Q(0));
    CHECK(A(1, 2) == Q(0));
    auto s = enumerate_singularities(expand_quad(q));
    const double a5 = to_double(q(5)), a7 = to_double(q(7));
    const double al = to_double(alpha_of(q));
    std::vector<std::complex<double>> expect{0.0, (a5 - a7 + std::sqrt(std::complex<double>(al))) / 2.0,
                                             (a5 - a7 - std::sqrt(std::complex<double>(al))) / 2.0};
    for (auto z : expect) {
      bool hit = false;
      for (auto w : s.eigenvalues) hit = hit || std::abs(z - w) < 1e-6;
      CHECK(hit);
    }
  }
}

TEST_CASE("rigid body field has six singularities") {
  auto X = euler_top(Q(1), Q(-2));
  auto s = enumerate_singularities(X);
  REQUIRE(s.kind == SingularSet::Kind::Finite);
  CHECK(s.exact);
  REQUIRE(s.points.size() == 6);
  for (const auto& r : s.points) {
    CHECK(r.point.cwiseAbs().maxCoeff() == doctest::Approx(1.0));
    CHECK(r.point.cwiseAbs().sum() == doctest::Approx(1.0));
  }
  auto oracle = brute_force_singularities(X.to_double(), 40);
  CHECK(same_point_sets(oracle, s, 1e-9));
  // z-axis pair: -(a5^2 + a5 a7) = 1 > 0 gives a saddle pair there, the others alternate
  int saddles = 0, nonhyp = 0;
  for (const auto& r : s.points) {
    saddles += r.type == LocalType::Saddle;
    nonhyp += r.type == LocalType::NonDegenerateNonHyperbolic;
  }
  CHECK(saddles == 2);
  CHECK(nonhyp == 4);
}

TEST_CASE("four singularities with a nilpotent pair") {
  auto X = expand_quad(quad({1, 1, 0, 0, 1, 0, 0, 0}));
  auto s = enumerate_singularities(X);
  REQUIRE(s.kind == SingularSet::Kind::Finite);
  REQUIRE(s.points.size() == 4);
  const double r = 1 / std::sqrt(2.0);
  bool found = false;
  for (const auto& p : s.points) {
    if ((p.point - Eigen::Vector3d(0, r, -r)).norm() < 1e-12) found = true;
    if (std::fabs(std::fabs(p.point(2)) - 1) < 1e-12) CHECK(p.type == LocalType::Nilpotent);
  }
  CHECK(found);
  auto oracle = brute_force_singularities(X.to_double(), 40);
  CHECK(same_point_sets(oracle, s, 1e-6));
}

TEST_CASE("circle of singularities") {
  auto X = expand_quad(quad({0, 1, 0, 0, 1, 0, 0, 0}));
  auto s = enumerate_singularities(X);
  REQUIRE(s.kind == SingularSet::Kind::Circle);
  CHECK(std::fabs(std::fabs(s.circle_normal(1)) - 1) < 1e-12);
  REQUIRE(s.circle_normal_exact.has_value());
  CHECK((*s.circle_normal_exact)(0) == Q(0));
  CHECK((*s.circle_normal_exact)(2) == Q(0));
  auto oracle = brute_force_singularities(X.to_double(), 40);
  CHECK(oracle.size() >= 12);
  int on_circle = 0;
  for (const auto& p : oracle) on_circle += std::fabs(p(1)) < 1e-7;
  CHECK(on_circle >= 12);
  auto sd = enumerate_singularities(X.to_double());
  CHECK(sd.kind == SingularSet::Kind::Circle);
}

TEST_CASE("linearize_at examples") {
  for (Q a8 : {Q(0), Q(Rational(9, 5)), Q(-3)}) {
    auto X = expand_quad(quad({-1, -2, 0, 0, 1, 0, 1, a8}));
    auto r = linearize_at(X, Vec3<Q>(Q(0), Q(0), Q(-1)));
    CHECK(r.det == doctest::Approx(-1.0));
    CHECK(r.type == LocalType::Saddle);
  }
  auto c = linearize_at(expand_quad(quad({0, 0, 0, 0, 1, 0, -2, 0})), Vec3<Q>(Q(0), Q(0), Q(-1)));
  CHECK(c.trace == 0.0);
  CHECK(c.det == doctest::Approx(2.0));
  CHECK(c.type == LocalType::NonDegenerateNonHyperbolic);
  auto z = linearize_at(expand_quad(quad({1, 2, 0, 0, 0, 0, 0, 0})), Vec3<Q>(Q(0), Q(0), Q(-1)));
  CHECK(z.type == LocalType::LinearlyZero);
  auto sh = linearize_at(expand_quad(quad({1, 0, 0, 1, 1, 0, 0, 0})), Vec3<Q>(Q(0), Q(0), Q(-1)));
  CHECK(sh.type == LocalType::SemiHyperbolic);
  CHECK_THROWS_AS(linearize_at(expand_quad(quad({1, 0, 1, 1, 1, 0, 0, 0})), Vec3<Q>(Q(0), Q(0), Q(-1))),
                  NotASingularity);
}

TEST_CASE("trace and det do not depend on the frame completion") {
  std::mt19937 g(13);
  for (int k = 0; k < 20; ++k) {
    auto q = rand_quad(g);
    q(3) = Q(0);
    q(6) = Q(0);
    auto O = rand_rotation(g);
    auto X = rotate(expand_quad(q), O);
    Vec3<Q> p = O.transpose() * Vec3<Q>(Q(0), Q(0), Q(-1));
    auto mv = move_singularity_to_south_pole(X, p);
    auto spin = cayley_rotation(0, 0, rand_rational(g, 3, 3));
    auto q1 = to_quad_normal_form(mv.field);
    auto q2 = to_quad_normal_form(rotate(mv.field, spin));
    CHECK(q1(4) + q1(8) == q2(4) + q2(8));
    CHECK(q1(4) * q1(8) - q1(5) * q1(7) == q2(4) * q2(8) - q2(5) * q2(7));
    CHECK(q1(4) + q1(8) == q(4) + q(8));
    auto r = linearize_at(X, p);
    CHECK(r.type == local_type_from(q(4), q(5), q(7), q(8)));
  }
}

TEST_CASE("exact direction signs match the rotated frame") {
  std::mt19937 g(14);
  for (int k = 0; k < 40; ++k) {
    auto q = rand_quad(g);
    q(3) = Q(0);
    q(6) = Q(0);
    auto A = build_A(q).A;
    auto r = classify_direction(A, Vec3<Q>(Q(0), Q(0), Q(-3)));
    CHECK(r.type == local_type_from(q(4), q(5), q(7), q(8)));
    const Q w = q(4) * q(1) * q(1) + (q(5) + q(7)) * q(1) * q(2) + q(8) * q(2) * q(2);
    CHECK(r.w_sign == w.sign());
    CHECK(r.ell_zero == (q(1).is_zero() && q(2).is_zero()));
    // the antipode reverses time
    auto ra = classify_direction(A, Vec3<Q>(Q(0), Q(0), Q(2)));
    CHECK(ra.det_sign == r.det_sign);
    CHECK(ra.trace_sign == -r.trace_sign);
  }
}

TEST_CASE("random fields agree with the Newton oracle") {
  std::mt19937 g(15);
  std::mt19937 gd(16);
  std::uniform_real_distribution<double> u(-3, 3);
  int exact_runs = 0;
  for (int k = 0; k < 50; ++k) {
    auto q = rand_quad(g);
    if (k % 3 == 0) {
      q(3) = Q(0);
      q(6) = Q(0);
    }
    auto X = expand_quad(q);
    auto s = enumerate_singularities(X);
    if (s.kind != SingularSet::Kind::Finite) continue;
    exact_runs += s.exact;
    CHECK(s.points.size() <= static_cast<std::size_t>(singularity_bound(2)));
    CHECK(s.points.size() % 2 == 0);
    auto oracle = brute_force_singularities(X.to_double(), 40);
    CHECK(same_point_sets(oracle, s, 1e-7));
    for (const auto& r : s.points) {
      if (!r.exact) continue;
      if (r.det_sign < 0) CHECK(r.det < 0);
      if (r.det_sign > 0) CHECK(r.det > 0);
    }
  }
  CHECK(exact_runs > 0);
  for (int k = 0; k < 20; ++k) {
    QuadCoeffs<double> q;
    for (auto& v : q.a) v = u(gd);
    auto X = expand_quad(q);
    auto s = enumerate_singularities(X);
    REQUIRE(s.kind == SingularSet::Kind::Finite);
    CHECK(s.points.size() % 2 == 0);
    CHECK(same_point_sets(brute_force_singularities(X, 40), s, 1e-7));
  }
}

TEST_CASE("singularity bound") {
  CHECK(singularity_bound(2) == 6);
  CHECK(singularity_bound(3) == 14);
  CHECK(singularity_bound(1) == 2);
}
