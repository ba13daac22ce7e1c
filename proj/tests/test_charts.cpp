#include "doctest.h"
#include "test_util.hpp"

#include "sphereflow/charts.hpp"

using namespace sftest;

namespace {

using P2 = Poly2<Q>;
P2 U() { return P2::var(0); }
P2 V() { return P2::var(1); }
P2 mono(int i, int j, const Q& c) { return P2::monomial({i, j}, c); }

ChartSpec<Q> central_at(int a, int b, int c) {
  return {ChartKind::Central, Vec3<Q>(Q(a), Q(b), Q(c)), ChartBranch::Auto};
}
ChartSpec<Q> stereo_at(int a, int b, int c) {
  return {ChartKind::Stereographic, Vec3<Q>(Q(a), Q(b), Q(c)), ChartBranch::Auto};
}

}  // namespace

TEST_CASE("central projection at the south pole gives the a3 = a6 = 0 planar system") {
  std::mt19937 g(4);
  for (int trial = 0; trial < 10; ++trial) {
    auto q = rand_quad(g);
    q(3) = Q(0);
    q(6) = Q(0);
    auto sys = central_project(expand_quad(q), central_at(0, 0, -1));
    P2 expP = mono(1, 0, -q(4)) + mono(0, 1, -q(5)) + mono(1, 1, q(1)) + mono(0, 2, q(2)) +
              mono(3, 0, -q(4)) + mono(2, 1, -(q(5) + q(7))) + mono(1, 2, -q(8));
    P2 expQ = mono(1, 0, -q(7)) + mono(0, 1, -q(8)) + mono(2, 0, -q(1)) + mono(1, 1, -q(2)) +
              mono(2, 1, -q(4)) + mono(1, 2, -(q(5) + q(7))) + mono(0, 3, -q(8));
    CHECK(sys.P == expP);
    CHECK(sys.Q == expQ);
    CHECK(sys.branch == ChartBranch::C);
  }
}

TEST_CASE("family 144 at the south pole") {
  Q c1(1), c2(2), c5(1), c7(1);
  Q k = c2 * (c5 + c7) / c1;  // = 4
  auto X = expand_quad(quad({c1, c2, 0, 0, c5, 0, c7, k}));
  auto sys = central_project(X, central_at(0, 0, -1));
  P2 expP = mono(0, 1, -c5) + mono(1, 1, c1) + mono(0, 2, c2) + mono(2, 1, -(c5 + c7)) + mono(1, 2, -k);
  P2 expQ = mono(1, 0, -c7) + mono(0, 1, -k) + mono(2, 0, -c1) + mono(1, 1, -c2) +
            mono(1, 2, -(c5 + c7)) + mono(0, 3, -k);
  CHECK(sys.P == expP);
  CHECK(sys.Q == expQ);
  CHECK(k == Q(4));
}

TEST_CASE("homoclinic family chart systems") {
  Q a8(Rational(9, 5));
  auto X = expand_quad(quad({-1, -2, 0, 0, 1, 0, 1, a8}));
  auto sys = central_project(X, central_at(0, 0, -1));
  CHECK(sys.P == mono(0, 1, -1) + mono(1, 1, -1) + mono(0, 2, -2) + mono(2, 1, -2) + mono(1, 2, -a8));
  CHECK(sys.Q == mono(1, 0, -1) + mono(0, 1, -a8) + mono(2, 0, 1) + mono(1, 1, 2) + mono(1, 2, -2) +
                     mono(0, 3, -a8));
  // the a != 0 branch at (1,0,0) is a different chart: singular at the image of (1,0,0)?
  auto sa = central_project(X, central_at(1, 0, 0));
  CHECK(sa.branch == ChartBranch::A);
  // (1,0,0) is not a singularity of the homoclinic family, so the origin is regular there
  CHECK(!(sa.P.coeff({0, 0}).is_zero() && sa.Q.coeff({0, 0}).is_zero()));
  // consistency: the chart vector field is the pushforward of X (up to the positive time factor)
  auto Xd = X.to_double();
  auto sd = sa.to_double();
  std::mt19937 g(1);
  std::uniform_real_distribution<double> Uu(-0.7, 0.7);
  for (int i = 0; i < 10; ++i) {
    Eigen::Vector2d w(Uu(g), Uu(g));
    const double h = 1e-6;
    Eigen::Vector3d x = from_chart(sd.chart, w);
    Eigen::Vector3d xt = (x + h * Xd.eval<double>(x)).normalized();
    Eigen::Vector2d dw = (to_chart(sd.chart, xt) - w) / h;
    Eigen::Vector2d f = sd.eval(w);
    CHECK(std::fabs(dw(0) * f(1) - dw(1) * f(0)) < 1e-4 * (1 + f.norm() * dw.norm()));
    CHECK(dw.dot(f) > 0);
  }
}

TEST_CASE("stereographic projection at the north pole") {
  Q a2(3), a5(2), a7(-5);
  auto X3 = expand_quad(quad({0, a2, 0, 0, a5, 0, a7, 0}));
  auto s3 = stereo_project(X3, stereo_at(0, 0, 1));
  CHECK(s3.P == mono(0, 1, Q(-2) * a5) + mono(0, 2, Q(4) * a2) + mono(2, 1, Q(-2) * (a5 + Q(2) * a7)) +
                     mono(0, 3, Q(2) * a5));
  CHECK(s3.Q == mono(1, 0, Q(-2) * a7) + mono(1, 1, Q(-4) * a2) + mono(1, 2, Q(-2) * (a7 + Q(2) * a5)) +
                     mono(3, 0, Q(2) * a7));
  Q a1(2), b2(1), a8(3);
  auto X6 = expand_quad(quad({a1, b2, 0, 0, 0, 0, 0, a8}));
  auto s6 = stereo_project(X6, stereo_at(0, 0, 1));
  CHECK(s6.P == mono(1, 1, Q(4) * a1) + mono(0, 2, Q(4) * b2) + mono(1, 2, Q(-4) * a8));
  CHECK(s6.Q == mono(0, 1, Q(-2) * a8) + mono(2, 0, Q(-4) * a1) + mono(1, 1, Q(-4) * b2) +
                     mono(2, 1, Q(2) * a8) + mono(0, 3, Q(-2) * a8));
  CHECK(s6.degree() == 3);
  std::mt19937 g(6);
  auto generic = stereo_project(expand_quad(rand_quad(g)), stereo_at(0, 0, 1));
  CHECK(generic.degree() == 4);
}

TEST_CASE("planar degree bounds") {
  std::mt19937 g(12);
  for (int trial = 0; trial < 10; ++trial) {
    auto X = expand_quad(rand_quad(g));
    auto c = central_project(X, central_at(0, 0, -1));
    CHECK(c.degree() <= 3);
    auto s = stereo_project(X, stereo_at(0, 1, 0));
    CHECK(s.degree() <= 4);
    CHECK(s.branch == ChartBranch::B);
  }
  // z = 0 invariant when z divides R: the central chart keeps degree 2
  auto inv = expand_quad(quad({1, 2, 3, 0, 5, 7, -5, 0}));
  CHECK(invariant_plane_cofactor(inv, Plane<Q>{Q(0), Q(0), Q(1), Q(0)}).invariant);
  CHECK(central_project(inv, central_at(0, 0, -1)).degree() == 2);
  Q a5(1), a7(-2);
  HomVectorField<Q> X152{{pz<Q>() * py<Q>() * a5, pz<Q>() * px<Q>() * (-(a5 + a7)), py<Q>() * px<Q>() * a7}};
  CHECK(central_project(X152, central_at(0, 0, -1)).degree() == 3);
}

TEST_CASE("invariant circles of the a1 = a4 = a8 = 0 family correspond to invariant lines of the chart system") {
  Q a2(5), a5(-1), a7(2);
  auto X = expand_quad(quad({0, a2, 0, 0, a5, 0, a7, 0}));
  auto sys = central_project(X, central_at(0, 0, -1));
  for (int sgn : {1, -1}) {
    Q root = -a2 + Q(sgn) * Q::sqrt_of(17);
    Plane<Q> f{Q(0), Q(1), Q(2) * a7 / root, Q(0)};
    CHECK(invariant_plane_cofactor(X, f).invariant);
    // f(u, v, -1) = v - 2 a7 / root; invariant iff Q vanishes on that line
    Q v0 = Q(2) * a7 / root;
    std::array<Poly2<Q>, 2> line{U(), P2(v0)};
    CHECK(sys.Q.substitute<2>(line).is_zero());
  }
}

TEST_CASE("stereographic invariant curve u^2+v^2+1 with cofactor R~") {
  std::mt19937 g(21);
  for (int trial = 0; trial < 10; ++trial) {
    auto X = expand_quad(rand_quad(g));
    auto s = stereo_project(X, stereo_at(0, 0, 1));
    P2 f = U() * U() + V() * V() + P2(Q(1));
    std::array<P2, 3> tilde{U() * Q(2), V() * Q(2), U() * U() + V() * V() - P2(Q(1))};
    P2 Rt = X.c[2].substitute<2>(tilde);
    CHECK(s.P * f.derivative(0) + s.Q * f.derivative(1) == Rt * f);
  }
}

TEST_CASE("branch guard and roundtrip") {
  auto X = expand_quad(quad({1, 1, 0, 0, 1, 0, 1, 1}));
  ChartSpec<Q> bad{ChartKind::Central, Vec3<Q>(Q(1), Q(0), Q(0)), ChartBranch::C};
  CHECK_THROWS_AS(central_project(X, bad), BranchCoordinateZero);
  bad.branch = ChartBranch::A;
  CHECK_NOTHROW(central_project(X, bad));

  ChartSpec<double> south{ChartKind::Central, Eigen::Vector3d(0, 0, -1), ChartBranch::Auto};
  CHECK(chart_roundtrip_check(south, Eigen::Vector3d(0, 0, -1)) == 0.0);
  std::mt19937 g(14);
  for (int i = 0; i < 50; ++i) {
    Eigen::Vector3d p = rand_unit(g);
    if (p(2) > 0) p(2) = -p(2);
    if (p(2) > -1e-3) continue;
    CHECK(chart_roundtrip_check(south, p) < 1e-12);
  }
  CHECK_THROWS_AS(to_chart(south, Eigen::Vector3d(0, 0, 1)), OutOfDomain);
  ChartSpec<double> north{ChartKind::Stereographic, Eigen::Vector3d(0, 0, 1), ChartBranch::Auto};
  CHECK(to_chart(north, Eigen::Vector3d(0, 0, -1)).norm() == 0.0);
  CHECK(chart_roundtrip_check(north, Eigen::Vector3d(0, 0, -1)) == 0.0);
  CHECK_THROWS_AS(to_chart(north, Eigen::Vector3d(0, 0, 1)), OutOfDomain);
  for (const Eigen::Vector3d& base : {Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, -1, 0),
                                      Eigen::Vector3d(0.6, 0, 0.8), Eigen::Vector3d(0.48, 0.6, 0.64)}) {
    for (ChartKind kind : {ChartKind::Central, ChartKind::Stereographic}) {
      ChartSpec<double> ch{kind, base, ChartBranch::Auto};
      for (int i = 0; i < 20; ++i) {
        Eigen::Vector3d p = rand_unit(g);
        if (kind == ChartKind::Central && p.dot(base) < 0.05) p = -p;
        if (kind == ChartKind::Central && p.dot(base) < 0.05) continue;
        CHECK(chart_roundtrip_check(ch, p) < 1e-12);
      }
    }
  }
}

TEST_CASE("all stereographic branches induce the pushforward field") {
  std::mt19937 g(30);
  auto X = expand_quad(rand_quad(g));
  auto Xd = X.to_double();
  for (const auto& base : {Vec3<Q>(Q(0), Q(0), Q(1)), Vec3<Q>(Q(1), Q(0), Q(0)), Vec3<Q>(Q(0), Q(1), Q(0)),
                           Vec3<Q>(Q(Rational(3, 5)), Q(0), Q(Rational(4, 5))),
                           Vec3<Q>(Q(Rational(4, 5)), Q(Rational(-3, 5)), Q(0))}) {
    for (ChartKind kind : {ChartKind::Central, ChartKind::Stereographic}) {
      for (ChartBranch br : {ChartBranch::C, ChartBranch::A, ChartBranch::B}) {
        ChartSpec<Q> ch{kind, base, br};
        PlanarSystem<double> sd;
        try {
          sd = project(X, ch).to_double();
        } catch (const BranchCoordinateZero&) {
          continue;
        }
        ChartSpec<double> chd = ch.to_double();
        std::uniform_real_distribution<double> Uu(-0.5, 0.5);
        for (int i = 0; i < 5; ++i) {
          Eigen::Vector2d w(Uu(g), Uu(g));
          const double h = 1e-7;
          Eigen::Vector3d x = from_chart(chd, w);
          Eigen::Vector3d xt = (x + h * Xd.eval<double>(x)).normalized();
          Eigen::Vector2d dw = (to_chart(chd, xt) - w) / h;
          Eigen::Vector2d f = sd.eval(w);
          CHECK(std::fabs(dw(0) * f(1) - dw(1) * f(0)) < 1e-4 * (1 + f.norm() * dw.norm()));
          CHECK(dw.dot(f) >= 0);
        }
      }
    }
  }
}
