#pragma once
// Trajectories on the sphere and in charts, return maps, limit cycles, Hopf scans.

#include "sphereflow/charts.hpp"
#include "sphereflow/local.hpp"

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sphereflow {

/// Polynomial map R^N -> R^M flattened for fast double evaluation.
template <int N, int M>
class CompiledMap {
 public:
  using In = Eigen::Matrix<double, N, 1>;
  using Out = Eigen::Matrix<double, M, 1>;

  CompiledMap() = default;
  explicit CompiledMap(const std::array<Poly<double, N>, M>& comps);

  Out operator()(const In& x) const;
  /// Jacobian of the map at x.
  Eigen::Matrix<double, M, N> jacobian(const In& x) const;

 private:
  struct Term {
    int comp;
    double coef;
    std::array<int, N> e;
  };
  std::vector<Term> terms_;
  std::vector<Term> dterms_[N];
  int maxdeg_ = 0;
};

using SphereRhs = CompiledMap<3, 3>;
using PlanarRhs = CompiledMap<2, 2>;

SphereRhs compile(const HomVectorField<double>& X);
PlanarRhs compile(const PlanarSystem<double>& sys);

struct IntegratorOptions {
  double tol = 1e-10;   // absolute and relative local tolerance
  double h0 = 1e-2;
  double hmin = 1e-13;
  double hmax = 0.25;
  long max_steps = 5'000'000;
};

struct IntegratorStats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

enum class TrajectoryChart { Sphere, Plane };

struct Trajectory {
  TrajectoryChart chart = TrajectoryChart::Sphere;
  std::vector<double> t;
  std::vector<Eigen::Vector3d> x;   // sphere samples
  std::vector<Eigen::Vector2d> w;   // plane samples
  std::vector<Eigen::Vector3d> dx;  // derivatives at the samples (sphere)
  std::vector<Eigen::Vector2d> dw;  // derivatives at the samples (plane)
  IntegratorStats stats;
  bool left_disc = false;  // plane only: stopped at the bounding disc

  std::size_t size() const { return t.size(); }
  double max_norm_drift() const;
  /// Cubic Hermite interpolation between accepted steps.
  Eigen::Vector3d sphere_at(double s) const;
  Eigen::Vector2d plane_at(double s) const;
  /// "t,x,y,z" or "t,u,v" rows with a header line.
  std::string to_csv() const;
};

/// Dormand-Prince 5(4) with renormalization onto the sphere after each accepted step. t_end may be
/// negative. Throws StepFailure, PreconditionViolated (|x0| != 1).
Trajectory integrate_sphere(const HomVectorField<double>& X, const Eigen::Vector3d& x0, double t_end,
                            const IntegratorOptions& opt = {});

/// Same pair in a chart; stops early (left_disc) when |w| exceeds bound.
Trajectory integrate_plane(const PlanarSystem<double>& sys, const Eigen::Vector2d& w0, double t_end,
                           const IntegratorOptions& opt = {}, double bound = 1e3);

struct SphereReturn {
  Eigen::Vector3d point;
  double period = 0;
  double closure = 0;  // |point - x0|
};

/// First return to the plane through x0 orthogonal to X(x0), crossing in the starting direction.
/// Throws NoReturn.
SphereReturn sphere_return(const HomVectorField<double>& X, const Eigen::Vector3d& x0, double t_max = 1e3,
                           const IntegratorOptions& opt = {});

/// Ray anchor + r * direction, r > 0.
struct Section {
  Eigen::Vector2d anchor = Eigen::Vector2d::Zero();
  Eigen::Vector2d direction = Eigen::Vector2d(1, 0);

  Eigen::Vector2d point(double r) const { return anchor + r * direction.normalized(); }
};

struct ReturnOptions {
  IntegratorOptions integ;
  double bound = 1e3;
  double t_max = 1e3;
  int max_bisection = 80;
  double event_tol = 1e-10;
};

struct ReturnResult {
  Eigen::Vector2d point;
  double r = 0;     // distance from the anchor along the ray
  double time = 0;
  long steps = 0;
};

/// First return to the ray on the same side; throws NoReturn, PreconditionViolated (p0 off the ray
/// or flow tangent to it).
ReturnResult poincare_return(const PlanarSystem<double>& sys, const Section& sec, const Eigen::Vector2d& p0,
                             const ReturnOptions& opt = {});
ReturnResult poincare_return(const PlanarRhs& f, const Section& sec, double r0, const ReturnOptions& opt = {});

enum class CycleStability { Stable, Unstable, Undetermined };
const char* cycle_stability_name(CycleStability s);

struct CycleEstimate {
  Section section;
  double r = 0;
  Eigen::Vector2d point;
  double period = 0;
  double slope = 0;     // derivative of the return map at the fixed point
  double residual = 0;  // |return(p) - p|
  CycleStability stability = CycleStability::Undetermined;
};

struct CycleSearch {
  std::optional<CycleEstimate> cycle;
  bool period_annulus = false;  // displacement vanishes across the bracket
  std::string note;
};

/// Root of d(r) = return(r) - r inside [r_lo, r_hi]; throws BracketInvalid. A sign change that
/// does not close up (residual above 1e-6) is reported in the note without a cycle.
CycleSearch find_limit_cycle(const PlanarSystem<double>& sys, const Section& sec, double r_lo, double r_hi,
                             const ReturnOptions& opt = {});

/// Samples d on n radii in (0, r_max] and refines every sign change; keeps those that close up.
/// Stops at the first NoReturn.
std::vector<CycleEstimate> scan_limit_cycles(const PlanarSystem<double>& sys, const Section& sec, double r_max,
                                             int n = 40, const ReturnOptions& opt = {});
/// Same on increasing radii.
std::vector<CycleEstimate> scan_limit_cycles(const PlanarSystem<double>& sys, const Section& sec,
                                             const std::vector<double>& radii, const ReturnOptions& opt = {});

struct SweepHit {
  Eigen::Vector3d singular_point;   // centre of the chart the orbit was found in
  ChartSpec<double> chart;          // stereographic, centred on singular_point
  CycleEstimate cycle;
  Eigen::Vector3d sphere_point;     // cycle point on the sphere
};

struct SweepOptions {
  int rays = 3;
  double max_angle = 2.9;  // radians from the singular point
  int radii = 48;          // equally spaced in angle
  double eig_tol = 1e-9;
  ReturnOptions ret;
};

/// Limit cycle search around every non-saddle singular pair (one representative per antipodal
/// pair) along several rays of a stereographic chart centred at the point.
std::vector<SweepHit> cycle_sweep(const HomVectorField<double>& X, const SweepOptions& opt = {},
                                  int* points_swept = nullptr);

/// Which separatrices of a saddle cross the open segment from the saddle to target.
struct SeparatrixCrossing {
  bool stable_hits = false, unstable_hits = false;
  double stable_at = -1, unstable_at = -1;  // distance from target along the segment
  std::string side() const;                 // "stable", "unstable", "both" or "none"
};

SeparatrixCrossing separatrix_crossing(const PlanarSystem<double>& sys, const Eigen::Vector2d& saddle,
                                       const Eigen::Vector2d& target, double offset = 1e-6, double t_max = 200);

/// Central chart at (0,0,-1) of the coefficient family with a1 = -1, a2 = -2, a5 = a7 = 1.
PlanarSystem<double> homoclinic_family_chart(double a8);
QuadCoeffs<double> homoclinic_family_coeffs(double a8);

// Hopf scans on the family with a3 = a4 = a6 = 0, a1 != 0, a5 a7 > 0 and
// a2 (a5 + a7) - a1 a8 != 0, in the central chart at (0,0,-1).

struct FocusSample {
  Eigen::Vector2d position;
  std::array<std::complex<double>, 2> eig{};
  double re = 0;                    // real part of the eigenvalues (trace / 2)
  bool focus = false;               // complex pair
  double mu = 0;                    // weakness parameter of this focus
  std::optional<std::array<std::complex<double>, 2>> closed_form;
};

struct HopfSample {
  double param = 0;
  QuadCoeffs<double> coeffs;
  std::array<FocusSample, 2> foci;  // (-a7/a1, 0) and the second one
  std::vector<CycleEstimate> cycles;  // around the first focus
  std::string separatrix_side;  // saddle at the origin versus the first focus
};

struct HopfEvent {
  int focus = 0;  // 0 or 1
  double param = 0;
  double mu = 0;  // weakness parameter at the event (close to 0)
  std::array<std::complex<double>, 2> eig{};
  double derivative = 0;         // d Re(lambda) / d mu, numerical
  double derivative_closed = 0;  // -1 / (2 a1), first focus only
  double derivative_normalized = 0;  // numerical value times -2 a1, first focus only
  std::optional<bool> weak_focus_stable;
  std::optional<double> V1;
  bool other_focus_weak = false;
};

struct SeparatrixEvent {
  double param_lo = 0, param_hi = 0;
  std::string side_lo, side_hi;
};

struct HopfReport {
  std::string parameter;
  std::vector<HopfSample> samples;
  std::vector<HopfEvent> events;
  std::vector<SeparatrixEvent> separatrix_events;
  bool hopf_possible = true;
  std::string note;
};

struct HopfOptions {
  bool search_cycles = true;
  int cycle_radii = 30;
  bool separatrices = true;
  int threads = 0;  // 0: SPHEREFLOW_THREADS or hardware concurrency
  ReturnOptions ret;
};

/// Eigenvalues at both foci over param in [lo, hi] (n samples). Throws PreconditionViolated when a1 = 0,
/// a5 a7 <= 0 or a3, a4, a6 are nonzero. A sample where the bracket vanishes is the centre family and
/// reports hopf_possible = false.
HopfReport hopf_scan(const std::function<QuadCoeffs<double>(double)>& family, const std::string& parameter,
                     double lo, double hi, int n, const HopfOptions& opt = {});

/// (-mu +- sqrt(mu^2 - 4 (a7^2 + a5 a7)(a1^2 + a7^2))) / (2 a1), mu = a1 a8 - a2 a7.
std::array<std::complex<double>, 2> first_focus_closed_form(const QuadCoeffs<double>& q);

/// Number of workers: SPHEREFLOW_THREADS if set and positive, else hardware concurrency.
int worker_count(int requested = 0);

/// Runs body(i) for i in [0, n) on worker_count threads.
void parallel_for(int n, const std::function<void(int)>& body, int threads = 0);

}  // namespace sphereflow
