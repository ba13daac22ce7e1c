#include "doctest.h"
#include "sphereflow/numerics.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace sftest;

namespace {

HomVectorField<double> dfield(std::initializer_list<double> a) {
  QuadCoeffs<double> q;
  int i = 0;
  for (double v : a) q.a[i++] = v;
  return expand_quad(q);
}

PlanarSystem<double> linear_center() {
  PlanarSystem<double> s;
  s.P = -Poly2<double>::var(1);
  s.Q = Poly2<double>::var(0);
  return s;
}

Poly2<double> mono(double c, int i, int j) { return Poly2<double>::monomial({i, j}, c); }

// u' = -v - uv - 2v^2 - 2u^2 v - a8 u v^2,  v' = -u - a8 v + u^2 + 2uv - 2uv^2 - a8 v^3
PlanarSystem<double> literal_homoclinic(double a8) {
  PlanarSystem<double> s;
  s.P = mono(-1, 0, 1) + mono(-1, 1, 1) + mono(-2, 0, 2) + mono(-2, 2, 1) + mono(-a8, 1, 2);
  s.Q = mono(-1, 1, 0) + mono(-a8, 0, 1) + mono(1, 2, 0) + mono(2, 1, 1) + mono(-2, 1, 2) + mono(-a8, 0, 3);
  return s;
}

QuadCoeffs<double> rand_dquad(std::mt19937& g) { return rand_quad(g).to_double(); }

}  // namespace

TEST_CASE("compiled evaluation agrees with the polynomial") {
  std::mt19937 g(3);
  for (int k = 0; k < 20; ++k) {
    auto X = expand_quad(rand_dquad(g));
    SphereRhs f = compile(X);
    Eigen::Vector3d p = rand_unit(g);
    CHECK((f(p) - X.eval<double>(p)).norm() < 1e-13);
    auto J = f.jacobian(p);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(J(i, j) == doctest::Approx(X.c[i].derivative(j).eval<double>({p(0), p(1), p(2)})).epsilon(1e-12));
  }
}

TEST_CASE("equilibrium start gives a constant trajectory") {
  auto X = dfield({0, 0, 0, 0, 1, 0, -2, 0});
  Trajectory tr = integrate_sphere(X, Eigen::Vector3d(0, 0, 1), 10.0);
  CHECK(tr.size() > 2);
  for (const auto& p : tr.x) CHECK(p == Eigen::Vector3d(0, 0, 1));
  CHECK_THROWS_AS(integrate_sphere(X, Eigen::Vector3d(0, 0, 2), 1.0), PreconditionViolated);
}

TEST_CASE("orbits near a centre close up") {
  auto X = dfield({0, 0, 0, 0, 1, 0, -2, 0});
  const double z = std::sqrt(0.98);
  SphereReturn r = sphere_return(X, Eigen::Vector3d(0.1, 0.1, z));
  CHECK(r.period > 0);
  CHECK(r.closure < 1e-5);
  // x . A x is a first integral of (A x) x x
  Trajectory tr = integrate_sphere(X, Eigen::Vector3d(0.1, 0.1, z), r.period);
  auto H = [](const Eigen::Vector3d& p) { return 2 * p(0) * p(0) + p(1) * p(1); };
  for (const auto& p : tr.x) CHECK(std::fabs(H(p) - H(tr.x.front())) < 1e-9);
}

TEST_CASE("antipodal start with reversed time mirrors the trajectory") {
  std::mt19937 g(11);
  for (int k = 0; k < 10; ++k) {
    auto X = expand_quad(rand_dquad(g));
    Eigen::Vector3d x0 = rand_unit(g);
    Trajectory fwd = integrate_sphere(X, -x0, 3.0);
    Trajectory bwd = integrate_sphere(X, x0, -3.0);
    REQUIRE(fwd.size() == bwd.size());
    double worst = 0;
    for (std::size_t i = 0; i < fwd.size(); ++i) {
      worst = std::max(worst, (fwd.x[i] + bwd.x[i]).norm());
      CHECK(fwd.t[i] == -bwd.t[i]);
    }
    CHECK(worst < 1e-7);
  }
}

TEST_CASE("sphere norm drift stays below 1e-9") {
  std::mt19937 g(5);
  for (int k = 0; k < 20; ++k) {
    auto X = expand_quad(rand_dquad(g));
    IntegratorOptions o;
    o.tol = 1e-10;
    Trajectory tr = integrate_sphere(X, rand_unit(g), 50.0, o);
    CHECK(tr.max_norm_drift() <= 1e-9);
    CHECK(tr.t.back() == 50.0);
  }
}

TEST_CASE("chart trajectory matches the projected sphere trajectory up to reparameterization") {
  auto X = dfield({0, 0, 0, 0, 1, 0, -2, 0});
  ChartSpec<double> chart;  // central at (0,0,-1)
  PlanarSystem<double> sys = central_project(X, chart);
  const Eigen::Vector3d x0 = Eigen::Vector3d(0.2, -0.1, -1.0).normalized();
  const Eigen::Vector2d w0 = to_chart(chart, x0);

  Trajectory sph = integrate_sphere(X, x0, 2.0);
  // sign of the chart time change
  const double h = 1e-7;
  const Eigen::Vector2d image_vel = (to_chart(chart, (x0 + h * X.eval<double>(x0)).normalized()) - w0) / h;
  const double sgn = image_vel.dot(sys.eval(w0)) > 0 ? 1.0 : -1.0;

  // polyline with fine Hermite sampling, then arclength resampling
  auto dense = [](const Trajectory& tr, auto&& to_plane) {
    std::vector<Eigen::Vector2d> pts;
    for (std::size_t i = 0; i + 1 < tr.size(); ++i)
      for (int k = 0; k < 200; ++k) {
        double s = tr.t[i] + (tr.t[i + 1] - tr.t[i]) * k / 200.0;
        pts.push_back(to_plane(tr, s));
      }
    pts.push_back(to_plane(tr, tr.t.back()));
    return pts;
  };
  auto sphere_pts = dense(sph, [&](const Trajectory& tr, double s) { return to_chart(chart, tr.sphere_at(s).normalized()); });
  auto length = [](const std::vector<Eigen::Vector2d>& p) {
    std::vector<double> L(p.size(), 0.0);
    for (std::size_t i = 1; i < p.size(); ++i) L[i] = L[i - 1] + (p[i] - p[i - 1]).norm();
    return L;
  };
  auto Ls = length(sphere_pts);
  const double total = Ls.back();

  double T = 1.0;
  std::vector<Eigen::Vector2d> chart_pts;
  std::vector<double> Lc;
  for (;;) {
    Trajectory pl = integrate_plane(sys, w0, sgn * T);
    chart_pts = dense(pl, [](const Trajectory& tr, double s) { return tr.plane_at(s); });
    Lc = length(chart_pts);
    if (Lc.back() >= total) break;
    T *= 2;
  }
  auto at = [](const std::vector<Eigen::Vector2d>& p, const std::vector<double>& L, double s) {
    auto it = std::lower_bound(L.begin(), L.end(), s);
    std::size_t i = std::max<std::size_t>(1, static_cast<std::size_t>(it - L.begin()));
    i = std::min(i, L.size() - 1);
    const double th = (s - L[i - 1]) / std::max(L[i] - L[i - 1], 1e-300);
    return Eigen::Vector2d(p[i - 1] + th * (p[i] - p[i - 1]));
  };
  double worst = 0;
  for (int k = 0; k <= 400; ++k) {
    const double s = total * k / 400.0;
    worst = std::max(worst, (at(sphere_pts, Ls, s) - at(chart_pts, Lc, s)).norm());
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("return map of the harmonic rotation") {
  auto sys = linear_center();
  ReturnResult r = poincare_return(sys, Section{}, Eigen::Vector2d(1, 0));
  CHECK((r.point - Eigen::Vector2d(1, 0)).norm() < 1e-9);
  CHECK(r.time == doctest::Approx(2 * M_PI).epsilon(1e-9));
  CHECK_THROWS_AS(poincare_return(sys, Section{}, Eigen::Vector2d(1, 0.5)), PreconditionViolated);
  // identical inputs, identical bits
  ReturnResult r2 = poincare_return(sys, Section{}, Eigen::Vector2d(1, 0));
  CHECK(r.point == r2.point);
  CHECK(r.time == r2.time);
}

TEST_CASE("homoclinic family chart is the literal planar system") {
  for (double a8 : {1.6, 1.8}) {
    auto lit = literal_homoclinic(a8);
    auto ch = homoclinic_family_chart(a8);
    auto diff = [](const Poly2<double>& a, const Poly2<double>& b) {
      double m = 0;
      const Poly2<double> d = a - b;
      for (const auto& [e, c] : d.terms()) m = std::max(m, std::fabs(c));
      return m;
    };
    CHECK(diff(lit.P, ch.P) < 1e-15);
    CHECK(diff(lit.Q, ch.Q) < 1e-15);
  }
}

TEST_CASE("limit cycle around the focus at a8 = 9/5") {
  auto sys = homoclinic_family_chart(1.8);
  Section sec{Eigen::Vector2d(1, 0), Eigen::Vector2d(-1, 0)};
  const double d_in = poincare_return(sys, sec, sec.point(0.3)).r - 0.3;
  const double d_out = poincare_return(sys, sec, sec.point(0.95)).r - 0.95;
  CHECK(d_in > 0);
  CHECK(d_out < 0);
  CycleSearch cs = find_limit_cycle(sys, sec, 0.3, 0.95);
  REQUIRE(cs.cycle);
  const CycleEstimate& c = *cs.cycle;
  CHECK(c.residual < 1e-8);
  CHECK(c.r == doctest::Approx(0.776).epsilon(2e-3));
  CHECK(c.slope < 1.0);
  CHECK(c.stability == CycleStability::Stable);
  CHECK(c.period > 0);
  // the fixed point is a fixed point of a fresh return computation
  ReturnResult rr = poincare_return(sys, sec, c.point);
  CHECK((rr.point - c.point).norm() < 1e-8);
  CHECK_THROWS_AS(find_limit_cycle(sys, sec, 0.3, 0.5), BracketInvalid);
  CHECK_THROWS_AS(find_limit_cycle(sys, sec, 0.5, 0.3), BracketInvalid);
}

TEST_CASE("escaping start has no return") {
  auto sys = homoclinic_family_chart(1.8);
  Section sec{Eigen::Vector2d(1, 0), Eigen::Vector2d(-1, 3)};
  CHECK_THROWS_AS(poincare_return(compile(sys), sec, std::sqrt(10.0)), NoReturn);
}

TEST_CASE("linear centre is an annulus, not a limit cycle") {
  CycleSearch cs = find_limit_cycle(linear_center(), Section{}, 0.5, 2.0);
  CHECK_FALSE(cs.cycle);
  CHECK(cs.period_annulus);
  CHECK(scan_limit_cycles(linear_center(), Section{}, 2.0, 10).empty());
}

TEST_CASE("no cycles for the conjecture sample") {
  QuadCoeffs<double> q;
  q.a = {1, 0, 0, 0, 1, 0, 2, 1};
  auto sys = south_pole_system(q);
  PlanarRhs f = compile(sys);
  for (Eigen::Vector2d p : {Eigen::Vector2d(-2, 0), Eigen::Vector2d(1, -3)}) {
    CHECK(f(p).norm() < 1e-12);
    for (Eigen::Vector2d d : {Eigen::Vector2d(-p.normalized()), Eigen::Vector2d(p.normalized()),
                              Eigen::Vector2d(-p(1), p(0)).normalized()}) {
      Section sec{p, d};
      CHECK(scan_limit_cycles(sys, sec, 0.999 * p.norm(), 30).empty());
    }
  }
}

TEST_CASE("separatrix side switches between 1.68 and 1.70") {
  for (double a8 : {1.6, 1.68}) {
    auto s = separatrix_crossing(homoclinic_family_chart(a8), Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 0));
    CHECK(s.side() == "stable");
  }
  for (double a8 : {1.70, 1.8}) {
    auto s = separatrix_crossing(homoclinic_family_chart(a8), Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 0));
    CHECK(s.side() == "unstable");
  }
  auto s = separatrix_crossing(homoclinic_family_chart(1.6), Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 0));
  CHECK(s.stable_at == doctest::Approx(0.5779).epsilon(1e-3));
  CHECK_THROWS_AS(separatrix_crossing(homoclinic_family_chart(1.6), Eigen::Vector2d(1, 0), Eigen::Vector2d::Zero()),
                  PreconditionViolated);
}

TEST_CASE("first focus: closed-form eigenvalues and transversality") {
  std::mt19937 g(21);
  int done = 0;
  while (done < 10) {
    const double a1 = to_double(Q(rand_nonzero(g))), a2 = to_double(Q(rand_rational(g)));
    const double a5 = to_double(Q(rand_nonzero(g))), a7 = to_double(Q(rand_nonzero(g)));
    if (a5 * a7 <= 0) continue;
    auto family = [=](double mu) {
      QuadCoeffs<double> q;
      q.a = {a1, a2, 0, 0, a5, 0, a7, (mu + a2 * a7) / a1};
      return q;
    };
    if (std::fabs(family(0)(2) * (a5 + a7) - a1 * family(0)(8)) < 1e-9) continue;
    ++done;
    QuadCoeffs<double> q0 = family(0);
    PlanarRhs f = compile(south_pole_system(q0));
    Eigen::Vector2d p(-a7 / a1, 0);
    CHECK(f(p).norm() < 1e-12);
    auto cf = first_focus_closed_form(q0);
    CHECK(std::fabs(cf[0].real()) < 1e-12);
    Eigen::EigenSolver<Eigen::Matrix2d> es(f.jacobian(p));
    CHECK(std::fabs(es.eigenvalues()(0).real()) < 1e-9);
    CHECK(std::fabs(std::fabs(es.eigenvalues()(0).imag()) - std::fabs(cf[0].imag())) < 1e-9);

    HopfOptions o;
    o.search_cycles = false;
    o.separatrices = false;
    HopfReport rep = hopf_scan(family, "mu", -0.35, 0.25, 7, o);
    const HopfEvent* first = nullptr;
    for (const auto& e : rep.events)
      if (e.focus == 0) first = &e;
    REQUIRE(first);
    const HopfEvent& ev = *first;
    CHECK(std::fabs(ev.mu) < 1e-9);
    CHECK(std::fabs(ev.derivative - (-1.0 / (2 * a1))) < 1e-6);
    CHECK(ev.derivative_normalized == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::fabs(ev.eig[0].real()) < 1e-8);
    CHECK_FALSE(ev.other_focus_weak);
    REQUIRE(ev.V1);
    REQUIRE(ev.weak_focus_stable);
    CHECK(*ev.weak_focus_stable == (*ev.V1 < 0));
  }
}

TEST_CASE("second focus produces its own Hopf event") {
  // a2 chosen so that the second weakness parameter equals mu
  const double a1 = 1, a5 = 1, a7 = 2, a8 = 1;
  auto family = [=](double mu) {
    QuadCoeffs<double> q;
    q.a = {a1, (a1 * (a8 * a8 + a5 * a5 + a5 * a7) - mu) / (a7 * a8), 0, 0, a5, 0, a7, a8};
    return q;
  };
  HopfOptions o;
  o.search_cycles = false;
  o.separatrices = false;
  HopfReport rep = hopf_scan(family, "mu", -0.45, 0.45, 10, o);
  int second = 0;
  for (const auto& ev : rep.events) {
    if (ev.focus != 1) continue;
    ++second;
    CHECK(std::fabs(ev.mu) < 1e-9);
    CHECK_FALSE(ev.other_focus_weak);
    CHECK(std::fabs(ev.eig[0].real()) < 1e-8);
    CHECK(ev.eig[0].imag() != 0);
  }
  CHECK(second == 1);
  for (const auto& s : rep.samples) CHECK_FALSE((std::fabs(s.foci[0].re) < 1e-9 && std::fabs(s.foci[1].re) < 1e-9));
}

TEST_CASE("scan of the homoclinic family over [1.6, 1.8]") {
  HopfOptions o;
  o.cycle_radii = 24;
  HopfReport rep = hopf_scan(homoclinic_family_coeffs, "a8", 1.6, 1.8, 21, o);
  REQUIRE(rep.samples.size() == 21);
  CHECK(rep.events.empty());  // the focus stays unstable: trace 2 - a8 > 0
  for (const auto& s : rep.samples) {
    CHECK(s.foci[0].re == doctest::Approx((2 - s.param) / 2).epsilon(1e-9));
    CHECK(s.foci[0].focus);
  }
  const auto& last = rep.samples.back();
  REQUIRE(last.cycles.size() == 1);
  CHECK(last.cycles[0].residual < 1e-8);
  CHECK(last.cycles[0].stability == CycleStability::Stable);
  CHECK(rep.samples.front().cycles.empty());
  REQUIRE(rep.separatrix_events.size() == 1);
  const auto& ev = rep.separatrix_events[0];
  CHECK(ev.param_lo >= 1.68 - 1e-12);
  CHECK(ev.param_hi <= 1.70 + 1e-12);
  CHECK(ev.side_lo == "stable");
  CHECK(ev.side_hi == "unstable");
  // cycles only on the unstable-separatrix side; the one born at the loop is found from 1.72 on
  for (const auto& s : rep.samples) {
    INFO("a8 = " << s.param);
    if (s.separatrix_side == "stable") CHECK(s.cycles.empty());
    if (s.param > 1.715) CHECK(s.cycles.size() == 1);
  }
}

TEST_CASE("hopf scan preconditions and the centre family") {
  auto no_a1 = [](double p) {
    QuadCoeffs<double> q;
    q.a = {0, 1, 0, 0, 1, 0, 1, p};
    return q;
  };
  CHECK_THROWS_AS(hopf_scan(no_a1, "a8", 0, 1, 3), PreconditionViolated);
  // a8 = a2 (a5 + a7) / a1 for every sample
  auto centre = [](double p) {
    QuadCoeffs<double> q;
    q.a = {1, p, 0, 0, 1, 0, 2, 3 * p};
    return q;
  };
  HopfReport rep = hopf_scan(centre, "a2", 0.5, 1.5, 5);
  CHECK_FALSE(rep.hopf_possible);
  CHECK(rep.events.empty());
}

TEST_CASE("scan results do not depend on the worker count") {
  HopfOptions one, many;
  one.threads = 1;
  many.threads = 4;
  one.cycle_radii = many.cycle_radii = 12;
  auto a = hopf_scan(homoclinic_family_coeffs, "a8", 1.7, 1.8, 4, one);
  auto b = hopf_scan(homoclinic_family_coeffs, "a8", 1.7, 1.8, 4, many);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    REQUIRE(a.samples[i].cycles.size() == b.samples[i].cycles.size());
    for (std::size_t k = 0; k < a.samples[i].cycles.size(); ++k)
      CHECK(a.samples[i].cycles[k].r == b.samples[i].cycles[k].r);
    CHECK(a.samples[i].separatrix_side == b.samples[i].separatrix_side);
  }
}

TEST_CASE("trajectory csv") {
  Trajectory tr = integrate_plane(linear_center(), Eigen::Vector2d(1, 0), 1.0);
  std::string csv = tr.to_csv();
  CHECK(csv.rfind("t,u,v\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(tr.size()) + 1);
  Trajectory esc = integrate_plane(homoclinic_family_chart(1.8), Eigen::Vector2d(0, 3), 100.0);
  CHECK(esc.left_disc);
}

TEST_CASE("cycle sweep finds the cycle of the homoclinic family and nothing in the rigid body") {
  int pts = 0;
  auto hits = cycle_sweep(expand_quad(homoclinic_family_coeffs(1.8)), {}, &pts);
  CHECK(pts == 2);
  REQUIRE(!hits.empty());
  double period = -1;
  for (const auto& h : hits) {
    CHECK(h.cycle.residual < 1e-8);
    CHECK(std::fabs(h.sphere_point.norm() - 1) < 1e-12);
    // every hit lies on the same closed orbit of the sphere flow
    const SphereReturn sr = sphere_return(expand_quad(homoclinic_family_coeffs(1.8)), h.sphere_point);
    CHECK(sr.closure < 1e-6);
    if (period < 0) period = sr.period;
    CHECK(sr.period == doctest::Approx(period).epsilon(1e-6));
  }
  CHECK(period == doctest::Approx(6.8533).epsilon(1e-4));
  // the loop side of the family has no cycle
  CHECK(cycle_sweep(expand_quad(homoclinic_family_coeffs(1.6))).empty());
  // centres: displacement vanishes, no isolated root
  CHECK(cycle_sweep(expand_quad(QuadCoeffs<double>({0, 0, 0, 0, 1, 0, -2, 0}))).empty());
}
