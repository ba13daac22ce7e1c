#pragma once
// Fine local analysis at the south pole: centers, Lyapunov constants, nilpotent and
// semi-hyperbolic points by power series.

#include "sphereflow/charts.hpp"
#include "sphereflow/field.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sphereflow {

/// The central chart at (0,0,-1) for a3 = a6 = 0, written directly from the coefficients.
template <class S>
PlanarSystem<S> south_pole_system(const QuadCoeffs<S>& q);

enum class CenterKind { Center, WeakFocus, NotApplicable };

template <class S>
struct CenterVerdict {
  CenterKind kind = CenterKind::NotApplicable;
  bool stable = false;       // weak focus only
  std::string reason;        // NotApplicable only
  std::optional<S> V1;       // when representable
  int w_sign = 0;            // sign of a4(a1^2-a2^2)+a1a2(a5+a7)
};

/// Center versus weak focus at (0,0,-1).
template <class S>
CenterVerdict<S> center_test(const QuadCoeffs<S>& q);

/// (a5-a7) W / (8 a7 (-a4^2-a5a7)^{3/2}); throws PreconditionViolated.
template <class S>
S lyapunov_v1_closed_form(const QuadCoeffs<S>& q);

/// Linear change and time rescaling taking the south pole chart to rdot = -s + ..., sdot = r + ...
template <class S>
PlanarSystem<S> rotation_form(const QuadCoeffs<S>& q);

enum class Gauge { ZeroKernel, UnitKernel };

template <class S>
struct LyapunovSolve {
  std::vector<Poly2<S>> H;  // H[j] homogeneous of degree j, j = 0 .. 2k+2 (H[0], H[1] zero)
  std::vector<S> V;         // V[0] = V1, ...
};

/// Solve P H_r + Q H_s = sum V_i (r^2+s^2)^{i+1} degree by degree.
template <class S>
LyapunovSolve<S> lyapunov_homological(const PlanarSystem<S>& sys, int k, Gauge gauge = Gauge::ZeroKernel);

/// P H_r + Q H_s - sum V_i (r^2+s^2)^{i+1}, kept up to degree 2k+2.
template <class S>
Poly2<S> lyapunov_residual(const PlanarSystem<S>& sys, const LyapunovSolve<S>& sol);

enum class SeriesVerdict {
  SaddleNode,
  Cusp,
  TopologicalNode,
  Saddle,
  FocusOrCenter,
  EllipticHyperbolic,
  NonIsolated,
  TruncationInconclusive
};

const char* series_verdict_name(SeriesVerdict v);

struct SeriesOptions {
  int order = 10;
  double tol = 1e-12;
};

template <class S>
struct SeriesClassification {
  std::vector<S> phi;  // coefficients of the branch s = phi(r), index = power
  std::vector<S> psi;  // the other component along the branch
  std::vector<S> div;  // divergence along the branch (nilpotent case)
  int leading_index = -1;
  S leading_coeff{0};
  int div_index = -1;
  S div_coeff{0};
  SeriesVerdict verdict = SeriesVerdict::TruncationInconclusive;
  bool certified = false;  // branch and psi identically zero in exact arithmetic
  Poly2<S> P, Q;          // system in the reduced coordinates
  std::optional<S> alpha2, beta2;
};

/// Nilpotent point at (0,0,-1): a8 = -a4, a4^2 + a5 a7 = 0, linear part nonzero.
template <class S>
SeriesClassification<S> nilpotent_classify(const QuadCoeffs<S>& q, const SeriesOptions& opt = {});

/// rdot = s + A(r,s), sdot = B(r,s) with A, B of order >= 2.
template <class S>
SeriesClassification<S> nilpotent_series(const Poly2<S>& P, const Poly2<S>& Q, const SeriesOptions& opt = {});

/// Any planar system with a nilpotent linear part at the origin.
template <class S>
SeriesClassification<S> nilpotent_classify_system(const PlanarSystem<S>& sys, const SeriesOptions& opt = {});

/// Origin with trace != 0 and det = 0.
template <class S>
SeriesClassification<S> semi_hyperbolic_classify(const PlanarSystem<S>& sys, const SeriesOptions& opt = {});

/// s + B(r, s) = 0 solved for s = phi(r) through order N; exposed for residual checks.
template <class S>
std::vector<S> solve_branch(const Poly2<S>& B, int order);

/// Truncated composition F(r, phi(r)) up to order N.
template <class S>
std::vector<S> compose_branch(const Poly2<S>& F, const std::vector<S>& phi, int order);

}  // namespace sphereflow
