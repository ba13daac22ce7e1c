#pragma once
// Global analysis: sign decisions, nonexistence of periodic orbits, tangencies with great
// circles, reduction of saddle configurations to canonical families, portrait labels.

#include "sphereflow/charts.hpp"
#include "sphereflow/singular.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sphereflow {

enum class Sign { PSD, NSD, Zero, Indefinite, Unknown };
const char* sign_name(Sign s);

struct SignStatus {
  Sign kind = Sign::Unknown;
  std::string certificate;  // what decided it
  // a point with p > 0 and a point with p < 0 (Indefinite only)
  std::optional<std::pair<Eigen::Vector2d, Eigen::Vector2d>> witnesses;
  bool semidefinite() const { return kind == Sign::PSD || kind == Sign::NSD; }
};

/// Structural certificates only; never samples. Works for any number of variables.
template <class S, int N>
SignStatus sign_structural(const Poly<S, N>& p);

/// Structural certificates first, then grid and leading-form sampling (which can only
/// report Indefinite or Unknown).
template <class S>
SignStatus sign_definiteness(const Poly2<S>& p);

/// Sign of g on the real curve {k = 0}, sampled by solving k along grid lines.
template <class S>
SignStatus sign_on_curve(const Poly2<S>& g, const Poly2<S>& k);

enum class Criterion { StereoSign, StereoTransversal, CentralSign, CentralTransversal };
enum class Conclusion { NoPeriodicOrbits, Inconclusive };
const char* criterion_name(Criterion c);

template <class S>
struct NoCyclesVerdict {
  Criterion criterion = Criterion::StereoSign;
  char letter = 'a';     // statement letter of the criterion that decided (or was tried last)
  Poly2<S> witness;       // the deciding polynomial
  SignStatus status;
  Conclusion conclusion = Conclusion::Inconclusive;
  Poly2<S> sign_poly, transversal_poly;
  SignStatus sign_status, transversal_status;
  std::vector<std::string> assumptions;  // hypotheses not discharged
  std::vector<std::string> discharged;
  // invariant curve f = 0 of the planar field with cofactor identity Xbar f = K f
  Poly2<S> f;
  bool f_positive = false;
  bool cofactor_identity = false;
  int branch = 0;  // central: 1 (c != 0), 2 (a != 0), 3 (b != 0)
};

/// Stereographic criterion with Rt(u,v) = R(2u, 2v, u^2+v^2-1).
template <class S>
NoCyclesVerdict<S> nocycles_stereo(const HomVectorField<S>& X);

/// Great-circle criterion for the plane a x + b y + c z = 0; throws BranchCoordinateZero.
template <class S>
NoCyclesVerdict<S> nocycles_central(const HomVectorField<S>& X, const Vec3<S>& normal,
                                    ChartBranch branch = ChartBranch::Auto);

struct TangencyCount {
  bool invariant = false;  // K vanishes on the whole circle
  int count = 0;           // distinct contact points
  int bound = 0;           // 2n
};

/// Contacts of X with the great circle orthogonal to the normal.
template <class S>
TangencyCount tangency_count(const HomVectorField<S>& X, const Vec3<S>& normal);

enum class ReductionTarget { Family142, Family143, Family144, CircleOfSingularities, DegenerateCase };
const char* reduction_target_name(ReductionTarget t);

struct ReductionResult {
  ReductionTarget target = ReductionTarget::DegenerateCase;
  std::vector<int> path;  // dispatched cases, in order
  bool exact = false;
  Mat3<double> rotation = Mat3<double>::Identity();  // x = rotation * x_new
  QuadCoeffs<double> reduced;
  std::optional<Mat3<QuadSurd>> rotation_exact;
  std::optional<QuadCoeffs<QuadSurd>> reduced_exact;
  std::map<std::string, double> constants;  // delta, sigma, beta, gamma when used
  bool constraints_hold = false;
  std::string note;
};

/// Normal-form coefficients with a3 = a6 = 0 and a4 a8 - a5 a7 < 0; throws NotInScope.
ReductionResult case_reduce(const QuadCoeffs<QuadSurd>& q);
ReductionResult case_reduce(const QuadCoeffs<double>& q);

/// Which dispatch case the coefficients fall in (1..8).
template <class S>
int reduction_case(const QuadCoeffs<S>& q, double tol = 1e-12);

/// Constraints of the target family on reduced coefficients.
template <class S>
bool family_constraints_hold(ReductionTarget t, const QuadCoeffs<S>& q, double tol = 1e-9);

enum class PortraitLabel {
  Fig3_LinearlyZero,
  Fig2a_SingularCircle,
  Fig2b_SingularCircle,
  Fig31_NilpotentCusp,
  Fig32_NilpotentCuspA2Zero,
  Fig33a,
  Fig33b,
  Fig33c_CenterFoci,
  Fig35_TripleCenterPair,
  Fig36_SaddleNodes,
  Fig37_TwoSingularities,
  Fig38_SaddleNodesFoci,
  Fig41_Nondegenerate,
  ModuloLimitCycles
};
const char* portrait_label_name(PortraitLabel l);

struct PortraitClass {
  PortraitLabel label = PortraitLabel::ModuloLimitCycles;
  std::string subtype;  // Fig41: "saddle+4" or "2-singularities"
  bool modulo_limit_cycles = false;
  int singular_points = 0;  // -1 for a circle of singularities
  std::map<std::string, int> type_counts;
  bool exact = false;
  std::vector<std::string> notes;
};

template <class S>
PortraitClass portrait_classify(const HomVectorField<S>& X);

enum class RotatedKind { Rotated, NotRotated, Inconclusive };

template <class S>
struct RotatedFamilyReport {
  RotatedKind kind = RotatedKind::Inconclusive;
  int sign = 0;              // +1 / -1 for Rotated
  Poly<S, 4> determinant;    // variables u, v, p1, p2
  Poly<S, 4> residual;       // determinant / (p2 - p1)
  std::optional<Poly2<S>> factor;  // residual when free of the parameter
  SignStatus status;
  std::string note;
};

/// P, Q in the variables (u, v, parameter); determinant |P(p1) Q(p1); P(p2) Q(p2)|.
template <class S>
RotatedFamilyReport<S> rotated_family_check(const Poly3<S>& P, const Poly3<S>& Q);

/// Central chart at (0,0,-1) of a3 = a4 = a6 = 0, a8 = a2 (a5+a7)/a1, with a2 as the third variable.
template <class S>
std::pair<Poly3<S>, Poly3<S>> free_coefficient_family(const S& a1, const S& a5, const S& a7);

template <class S>
struct FreeCoefficientVerdict {
  RotatedFamilyReport<S> rotated;
  bool reversible_at_zero = false;  // a2 = 0: invariant under (u, v, t) -> (u, -v, -t)
  bool center_at_zero = false;      // a2 = 0: (-a7/a1, 0) is a linear centre
  bool no_limit_cycles = false;
  std::string conclusion;
};

/// Rotated in a2 and a centre at a2 = 0: cycles cannot appear or vanish anywhere, so there are none.
template <class S>
FreeCoefficientVerdict<S> free_coefficient_verdict(const S& a1, const S& a5, const S& a7);

/// P V_u + Q V_v == (P_u + Q_v) V
template <class S>
bool inverse_integrating_factor_check(const PlanarSystem<S>& sys, const Poly2<S>& V, double tol = 1e-9);

}  // namespace sphereflow
