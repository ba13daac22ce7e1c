#pragma once
// Central and stereographic charts of the sphere and the planar systems they induce.

#include "sphereflow/field.hpp"

#include <string>

namespace sphereflow {

enum class ChartKind { Central, Stereographic };
/// Which coordinate of the basepoint is eliminated: c != 0, a != 0 or b != 0.
enum class ChartBranch { Auto, C, A, B };

template <class S>
struct ChartSpec {
  ChartKind kind = ChartKind::Central;
  Vec3<S> base = Vec3<S>(S(0), S(0), S(-1));
  ChartBranch branch = ChartBranch::Auto;

  ChartSpec<double> to_double() const {
    return {kind, Vec3<double>(sphereflow::to_double(base(0)), sphereflow::to_double(base(1)),
                               sphereflow::to_double(base(2))),
            branch};
  }
};

template <class S>
struct PlanarSystem {
  Poly2<S> P, Q;
  ChartSpec<S> chart;
  ChartBranch branch = ChartBranch::C;  // resolved branch
  std::string time_factor;              // reparameterization ds/dt, informational
  std::string provenance;

  int degree() const { return std::max(P.degree(), Q.degree()); }

  Eigen::Vector2d eval(const Eigen::Vector2d& w) const {
    std::array<double, 2> a{w(0), w(1)};
    return {P.template eval<double>(a), Q.template eval<double>(a)};
  }

  PlanarSystem<double> to_double() const {
    PlanarSystem<double> out;
    out.P = P.to_double_poly();
    out.Q = Q.to_double_poly();
    out.chart = chart.to_double();
    out.branch = branch;
    out.time_factor = time_factor;
    out.provenance = provenance;
    return out;
  }
};

template <class S>
ChartBranch resolve_branch(const ChartSpec<S>& chart);

template <class S>
PlanarSystem<S> central_project(const HomVectorField<S>& X, const ChartSpec<S>& chart);

template <class S>
PlanarSystem<S> stereo_project(const HomVectorField<S>& X, const ChartSpec<S>& chart);

template <class S>
PlanarSystem<S> project(const HomVectorField<S>& X, const ChartSpec<S>& chart) {
  return chart.kind == ChartKind::Central ? central_project(X, chart) : stereo_project(X, chart);
}

/// Chart coordinates of a sphere point; throws OutOfDomain.
Eigen::Vector2d to_chart(const ChartSpec<double>& chart, const Eigen::Vector3d& x);
/// Sphere point of chart coordinates.
Eigen::Vector3d from_chart(const ChartSpec<double>& chart, const Eigen::Vector2d& w);
/// |pi(pi^{-1}(x)) - x|
double chart_roundtrip_check(const ChartSpec<double>& chart, const Eigen::Vector3d& x);

}  // namespace sphereflow
