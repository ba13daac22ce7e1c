#include "sphereflow/charts.hpp"

#include <cmath>

namespace sphereflow {

template <class S>
ChartBranch resolve_branch(const ChartSpec<S>& chart) {
  const Vec3<S>& n = chart.base;
  ChartBranch br = chart.branch;
  if (br == ChartBranch::Auto) {
    // largest |coordinate|, ties resolved c, a, b
    br = ChartBranch::C;
    S best = abs_scalar(n(2));
    if (abs_scalar(n(0)) > best) {
      br = ChartBranch::A;
      best = abs_scalar(n(0));
    }
    if (abs_scalar(n(1)) > best) br = ChartBranch::B;
  }
  int idx = br == ChartBranch::C ? 2 : br == ChartBranch::A ? 0 : 1;
  if (is_zero(n(idx))) throw BranchCoordinateZero("eliminated basepoint coordinate is zero");
  return br;
}

namespace {

template <class S>
std::array<Poly2<S>, 3> compose(const HomVectorField<S>& X, const std::array<Poly2<S>, 3>& pt) {
  return {X.c[0].template substitute<2>(pt), X.c[1].template substitute<2>(pt),
          X.c[2].template substitute<2>(pt)};
}

template <class S>
Poly2<S> U() {
  return Poly2<S>::var(0);
}
template <class S>
Poly2<S> V() {
  return Poly2<S>::var(1);
}

}  // namespace

template <class S>
PlanarSystem<S> central_project(const HomVectorField<S>& X, const ChartSpec<S>& chart) {
  if (chart.kind != ChartKind::Central) throw PreconditionViolated("chart is not central");
  const ChartBranch br = resolve_branch(chart);
  const S a = chart.base(0), b = chart.base(1), c = chart.base(2);
  const Poly2<S> u = U<S>(), v = V<S>();
  std::array<Poly2<S>, 3> pt;
  if (br == ChartBranch::C)
    pt = {u + Poly2<S>(a), v + Poly2<S>(b), Poly2<S>(c) - (u * a + v * b) * (S(1) / c)};
  else if (br == ChartBranch::A)
    pt = {Poly2<S>(a) - (u * b + v * c) * (S(1) / a), u + Poly2<S>(b), v + Poly2<S>(c)};
  else
    pt = {u + Poly2<S>(a), Poly2<S>(b) - (u * a + v * c) * (S(1) / b), v + Poly2<S>(c)};
  auto F = compose(X, pt);
  Poly2<S> K = F[0] * a + F[1] * b + F[2] * c;
  PlanarSystem<S> out;
  out.chart = chart;
  out.branch = br;
  if (br == ChartBranch::C) {
    out.P = F[0] - (u + Poly2<S>(a)) * K;
    out.Q = F[1] - (v + Poly2<S>(b)) * K;
  } else if (br == ChartBranch::A) {
    out.P = F[1] - (u + Poly2<S>(b)) * K;
    out.Q = F[2] - (v + Poly2<S>(c)) * K;
  } else {
    out.P = F[0] - (u + Poly2<S>(a)) * K;
    out.Q = F[2] - (v + Poly2<S>(c)) * K;
  }
  out.time_factor = "ds = (sqrt(lambda)/|coord|)^(1-m) dt";
  out.provenance = "central projection";
  return out;
}

template <class S>
PlanarSystem<S> stereo_project(const HomVectorField<S>& X, const ChartSpec<S>& chart) {
  if (chart.kind != ChartKind::Stereographic) throw PreconditionViolated("chart is not stereographic");
  const ChartBranch br = resolve_branch(chart);
  const S a = chart.base(0), b = chart.base(1), c = chart.base(2);
  const Poly2<S> u = U<S>(), v = V<S>(), one(S(1));
  const Poly2<S> r2 = one + u * u + v * v;
  std::array<Poly2<S>, 3> pt;
  if (br == ChartBranch::C) {
    Poly2<S> w = u * a + v * b;
    Poly2<S> lam = r2 * (c * c) + w * w;
    pt = {lam * a - (Poly2<S>(a) - u) * (S(2) * c * c), lam * b - (Poly2<S>(b) - v) * (S(2) * c * c),
          lam * c - (Poly2<S>(c * c) + w) * (S(2) * c)};
  } else if (br == ChartBranch::A) {
    Poly2<S> w = u * b + v * c;
    Poly2<S> lam = r2 * (a * a) + w * w;
    pt = {lam * a - (Poly2<S>(a * a) + w) * (S(2) * a), lam * b - (Poly2<S>(b) - u) * (S(2) * a * a),
          lam * c - (Poly2<S>(c) - v) * (S(2) * a * a)};
  } else {
    Poly2<S> w = u * a + v * c;
    Poly2<S> lam = r2 * (b * b) + w * w;
    pt = {lam * a - (Poly2<S>(a) - u) * (S(2) * b * b), lam * b - (Poly2<S>(b * b) + w) * (S(2) * b),
          lam * c - (Poly2<S>(c) - v) * (S(2) * b * b)};
  }
  auto F = compose(X, pt);
  Poly2<S> K = F[0] * a + F[1] * b + F[2] * c;
  PlanarSystem<S> out;
  out.chart = chart;
  out.branch = br;
  if (br == ChartBranch::C) {
    out.P = F[0] + (u - Poly2<S>(a)) * K;
    out.Q = F[1] + (v - Poly2<S>(b)) * K;
  } else if (br == ChartBranch::A) {
    out.P = F[1] + (u - Poly2<S>(b)) * K;
    out.Q = F[2] + (v - Poly2<S>(c)) * K;
  } else {
    out.P = F[0] + (u - Poly2<S>(a)) * K;
    out.Q = F[2] + (v - Poly2<S>(c)) * K;
  }
  out.time_factor = "ds = lambda^(1-m)/(2 coord^2) dt";
  out.provenance = "stereographic projection";
  return out;
}

namespace {

std::pair<int, int> kept_axes(ChartBranch br) {
  if (br == ChartBranch::C) return {0, 1};
  if (br == ChartBranch::A) return {1, 2};
  return {0, 2};
}

int dropped_axis(ChartBranch br) { return br == ChartBranch::C ? 2 : br == ChartBranch::A ? 0 : 1; }

}  // namespace

Eigen::Vector2d to_chart(const ChartSpec<double>& chart, const Eigen::Vector3d& x) {
  const ChartBranch br = resolve_branch(chart);
  const Eigen::Vector3d& n = chart.base;
  const double k = n.dot(x);
  auto [i, j] = kept_axes(br);
  if (chart.kind == ChartKind::Central) {
    if (k <= 0) throw OutOfDomain("point outside the chart hemisphere");
    Eigen::Vector3d q = x / k;
    return {q(i) - n(i), q(j) - n(j)};
  }
  if (std::fabs(1.0 - k) < 1e-15) throw OutOfDomain("point is the projection centre");
  Eigen::Vector3d q = (x - n * k) / (1.0 - k);
  return {q(i), q(j)};
}

Eigen::Vector3d from_chart(const ChartSpec<double>& chart, const Eigen::Vector2d& w) {
  const ChartBranch br = resolve_branch(chart);
  const Eigen::Vector3d& n = chart.base;
  auto [i, j] = kept_axes(br);
  const int k = dropped_axis(br);
  Eigen::Vector3d q;
  if (chart.kind == ChartKind::Central) {
    q(i) = w(0) + n(i);
    q(j) = w(1) + n(j);
    q(k) = (1.0 - n(i) * q(i) - n(j) * q(j)) / n(k);
    return q.normalized();
  }
  // point of the plane n.q = 0, then inverse stereographic from n
  q(i) = w(0);
  q(j) = w(1);
  q(k) = -(n(i) * w(0) + n(j) * w(1)) / n(k);
  const double r2 = q.squaredNorm();
  return (n * (r2 - 1.0) + 2.0 * q) / (r2 + 1.0);
}

double chart_roundtrip_check(const ChartSpec<double>& chart, const Eigen::Vector3d& x) {
  return (from_chart(chart, to_chart(chart, x)) - x).norm();
}

#define SPHEREFLOW_INSTANTIATE(S)                                                              \
  template ChartBranch resolve_branch(const ChartSpec<S>&);                                    \
  template PlanarSystem<S> central_project(const HomVectorField<S>&, const ChartSpec<S>&);     \
  template PlanarSystem<S> stereo_project(const HomVectorField<S>&, const ChartSpec<S>&);

SPHEREFLOW_INSTANTIATE(QuadSurd)
SPHEREFLOW_INSTANTIATE(double)

}  // namespace sphereflow
