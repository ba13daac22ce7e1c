#include "sphereflow/numerics.hpp"

#include "sphereflow/singular.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

namespace sphereflow {

template <int N, int M>
CompiledMap<N, M>::CompiledMap(const std::array<Poly<double, N>, M>& comps) {
  for (int m = 0; m < M; ++m) {
    for (const auto& [e, c] : comps[m].terms()) {
      terms_.push_back({m, c, e});
      maxdeg_ = std::max(maxdeg_, Poly<double, N>::total(e));
    }
    for (int j = 0; j < N; ++j) {
      const Poly<double, N> d = comps[m].derivative(j);
      for (const auto& [e, c] : d.terms()) dterms_[j].push_back({m, c, e});
    }
  }
}

namespace {

template <int N>
void power_table(const Eigen::Matrix<double, N, 1>& x, int maxdeg, double (*pw)[8], std::vector<double>& big,
                 int& stride) {
  // small degrees use the stack table, larger ones the vector
  stride = maxdeg + 1;
  if (stride <= 8) {
    for (int i = 0; i < N; ++i) {
      pw[i][0] = 1.0;
      for (int k = 1; k <= maxdeg; ++k) pw[i][k] = pw[i][k - 1] * x(i);
    }
  } else {
    big.assign(static_cast<std::size_t>(N * stride), 1.0);
    for (int i = 0; i < N; ++i)
      for (int k = 1; k <= maxdeg; ++k) big[i * stride + k] = big[i * stride + k - 1] * x(i);
  }
}

}  // namespace

template <int N, int M>
typename CompiledMap<N, M>::Out CompiledMap<N, M>::operator()(const In& x) const {
  double pw[N][8];
  std::vector<double> big;
  int stride = 0;
  power_table<N>(x, maxdeg_, pw, big, stride);
  Out out = Out::Zero();
  for (const Term& t : terms_) {
    double m = t.coef;
    for (int i = 0; i < N; ++i) m *= big.empty() ? pw[i][t.e[i]] : big[i * stride + t.e[i]];
    out(t.comp) += m;
  }
  return out;
}

template <int N, int M>
Eigen::Matrix<double, M, N> CompiledMap<N, M>::jacobian(const In& x) const {
  double pw[N][8];
  std::vector<double> big;
  int stride = 0;
  power_table<N>(x, maxdeg_, pw, big, stride);
  Eigen::Matrix<double, M, N> J = Eigen::Matrix<double, M, N>::Zero();
  for (int j = 0; j < N; ++j)
    for (const Term& t : dterms_[j]) {
      double m = t.coef;
      for (int i = 0; i < N; ++i) m *= big.empty() ? pw[i][t.e[i]] : big[i * stride + t.e[i]];
      J(t.comp, j) += m;
    }
  return J;
}

template class CompiledMap<3, 3>;
template class CompiledMap<2, 2>;

SphereRhs compile(const HomVectorField<double>& X) { return SphereRhs(X.c); }
PlanarRhs compile(const PlanarSystem<double>& sys) { return PlanarRhs({sys.P, sys.Q}); }

namespace {

// Dormand-Prince 5(4) tableau
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

template <int D>
using Vd = Eigen::Matrix<double, D, 1>;

template <int D>
struct StepOut {
  Vd<D> y, k7;
  double err = 0;
};

template <int D, class F>
StepOut<D> dp_step(const F& f, const Vd<D>& y, const Vd<D>& k1, double h, double tol, IntegratorStats& st) {
  const Vd<D> k2 = f(Vd<D>(y + h * (a21 * k1)));
  const Vd<D> k3 = f(Vd<D>(y + h * (a31 * k1 + a32 * k2)));
  const Vd<D> k4 = f(Vd<D>(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
  const Vd<D> k5 = f(Vd<D>(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
  const Vd<D> k6 = f(Vd<D>(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
  StepOut<D> out;
  out.y = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  out.k7 = f(out.y);
  st.evaluations += 6;
  const Vd<D> e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * out.k7);
  double worst = 0;
  for (int i = 0; i < D; ++i) {
    const double sc = tol + tol * std::max(std::fabs(y(i)), std::fabs(out.y(i)));
    worst = std::max(worst, std::fabs(e(i)) / sc);
  }
  out.err = std::isfinite(worst) ? worst : std::numeric_limits<double>::infinity();
  return out;
}

// Adaptive driver. post(y) projects an accepted state. visit(t0, y0, k0, h, t1, y1, k1) returns false to stop.
template <int D, class F, class Post, class Visit>
void drive(const F& f, const Post& post, const Visit& visit, Vd<D> y, double t_end, const IntegratorOptions& opt,
           IntegratorStats& st) {
  if (!(opt.tol > 0)) throw PreconditionViolated("tolerance must be positive");
  const double dir = t_end < 0 ? -1.0 : 1.0;
  double t = 0.0;
  Vd<D> k = f(y);
  st.evaluations += 1;
  double h = std::min(opt.h0, opt.hmax);
  long steps = 0;
  while (dir * (t_end - t) > 0) {
    if (++steps > opt.max_steps) throw StepFailure("step budget exhausted");
    double hs = std::min(h, dir * (t_end - t));
    bool last = hs < h;
    StepOut<D> s = dp_step<D>(f, y, k, dir * hs, opt.tol, st);
    if (s.err <= 1.0) {
      ++st.accepted;
      const double t1 = last ? t_end : t + dir * hs;
      Vd<D> y1 = post(s.y);
      Vd<D> k1 = y1 == s.y ? s.k7 : f(y1);
      if (!(y1 == s.y)) st.evaluations += 1;
      if (!y1.allFinite()) throw StepFailure("non-finite state");
      const bool go = visit(t, y, k, dir * hs, t1, y1, k1);
      t = t1;
      y = y1;
      k = k1;
      if (!go) return;
      const double fac = s.err == 0 ? 5.0 : std::clamp(0.9 * std::pow(s.err, -0.2), 0.2, 5.0);
      if (!last) h = std::min(opt.hmax, hs * fac);
    } else {
      ++st.rejected;
      h = hs * std::clamp(0.9 * std::pow(s.err, -0.2), 0.1, 0.9);
      if (h < opt.hmin) throw StepFailure("step size underflow");
    }
  }
}

Eigen::Vector3d normalize(const Eigen::Vector3d& y) { return y / y.norm(); }

template <int D>
Vd<D> hermite(double t0, const Vd<D>& y0, const Vd<D>& d0, double t1, const Vd<D>& y1, const Vd<D>& d1, double s) {
  const double h = t1 - t0;
  if (h == 0) return y0;
  const double th = (s - t0) / h;
  const double h00 = (1 + 2 * th) * (1 - th) * (1 - th), h10 = th * (1 - th) * (1 - th);
  const double h01 = th * th * (3 - 2 * th), h11 = th * th * (th - 1);
  return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
}

template <int D>
Vd<D> interpolate(const std::vector<double>& t, const std::vector<Vd<D>>& y, const std::vector<Vd<D>>& d,
                  double s) {
  if (t.empty()) throw PreconditionViolated("empty trajectory");
  const bool fwd = t.back() >= t.front();
  auto key = [&](double v) { return fwd ? v : -v; };
  if (key(s) <= key(t.front())) return y.front();
  if (key(s) >= key(t.back())) return y.back();
  std::size_t lo = 0, hi = t.size() - 1;
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    if (key(t[mid]) <= key(s))
      lo = mid;
    else
      hi = mid;
  }
  return hermite<D>(t[lo], y[lo], d[lo], t[hi], y[hi], d[hi], s);
}

}  // namespace

double Trajectory::max_norm_drift() const {
  double m = 0;
  for (const auto& p : x) m = std::max(m, std::fabs(p.squaredNorm() - 1.0));
  return m;
}

Eigen::Vector3d Trajectory::sphere_at(double s) const { return interpolate<3>(t, x, dx, s); }
Eigen::Vector2d Trajectory::plane_at(double s) const { return interpolate<2>(t, w, dw, s); }

std::string Trajectory::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  if (chart == TrajectoryChart::Sphere) {
    os << "t,x,y,z\n";
    for (std::size_t i = 0; i < t.size(); ++i) os << t[i] << ',' << x[i](0) << ',' << x[i](1) << ',' << x[i](2) << '\n';
  } else {
    os << "t,u,v\n";
    for (std::size_t i = 0; i < t.size(); ++i) os << t[i] << ',' << w[i](0) << ',' << w[i](1) << '\n';
  }
  return os.str();
}

Trajectory integrate_sphere(const HomVectorField<double>& X, const Eigen::Vector3d& x0, double t_end,
                            const IntegratorOptions& opt) {
  if (std::fabs(x0.squaredNorm() - 1.0) > 1e-9) throw PreconditionViolated("start point is not on the sphere");
  const SphereRhs f = compile(X);
  Trajectory tr;
  tr.chart = TrajectoryChart::Sphere;
  const Eigen::Vector3d y0 = normalize(x0);
  tr.t.push_back(0.0);
  tr.x.push_back(y0);
  tr.dx.push_back(f(y0));
  drive<3>(f, normalize,
           [&](double, const Eigen::Vector3d&, const Eigen::Vector3d&, double, double t1, const Eigen::Vector3d& y1,
               const Eigen::Vector3d& k1) {
             tr.t.push_back(t1);
             tr.x.push_back(y1);
             tr.dx.push_back(k1);
             return true;
           },
           y0, t_end, opt, tr.stats);
  return tr;
}

Trajectory integrate_plane(const PlanarSystem<double>& sys, const Eigen::Vector2d& w0, double t_end,
                           const IntegratorOptions& opt, double bound) {
  const PlanarRhs f = compile(sys);
  Trajectory tr;
  tr.chart = TrajectoryChart::Plane;
  tr.t.push_back(0.0);
  tr.w.push_back(w0);
  tr.dw.push_back(f(w0));
  auto id = [](const Eigen::Vector2d& y) { return y; };
  drive<2>(f, id,
           [&](double, const Eigen::Vector2d&, const Eigen::Vector2d&, double, double t1, const Eigen::Vector2d& y1,
               const Eigen::Vector2d& k1) {
             tr.t.push_back(t1);
             tr.w.push_back(y1);
             tr.dw.push_back(k1);
             if (y1.norm() > bound) {
               tr.left_disc = true;
               return false;
             }
             return true;
           },
           w0, t_end, opt, tr.stats);
  return tr;
}

namespace {

// Bisection on theta in (0, 1] for a step of size theta*h from y0; g(lo) and g(hi) have opposite signs.
template <int D, class F, class Post, class G>
std::pair<double, Vd<D>> locate(const F& f, const Post& post, const G& g, const Vd<D>& y0, const Vd<D>& k0, double h,
                                const Vd<D>& y1, double tol, int max_iter, IntegratorStats& st) {
  double lo = 0, hi = 1;
  const double glo = g(y0);
  Vd<D> best = y1;
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    Vd<D> ym = post(dp_step<D>(f, y0, k0, mid * h, tol, st).y);
    const double gm = g(ym);
    if ((gm < 0) == (glo < 0) && gm != 0) {
      lo = mid;
    } else {
      hi = mid;
      best = ym;
    }
    if ((hi - lo) * std::fabs(h) < 1e-15) break;
  }
  return {hi * h, best};
}

}  // namespace

SphereReturn sphere_return(const HomVectorField<double>& X, const Eigen::Vector3d& x0, double t_max,
                           const IntegratorOptions& opt) {
  if (std::fabs(x0.squaredNorm() - 1.0) > 1e-9) throw PreconditionViolated("start point is not on the sphere");
  const SphereRhs f = compile(X);
  const Eigen::Vector3d y0 = normalize(x0);
  const Eigen::Vector3d v0 = f(y0);
  if (v0.norm() < 1e-12) throw PreconditionViolated("start point is singular");
  const Eigen::Vector3d n = v0.normalized();
  auto g = [&](const Eigen::Vector3d& y) { return n.dot(y - y0); };
  IntegratorStats st;
  std::optional<SphereReturn> found;
  drive<3>(f, normalize,
           [&](double t0, const Eigen::Vector3d& ya, const Eigen::Vector3d& ka, double h, double,
               const Eigen::Vector3d& yb, const Eigen::Vector3d&) {
             if (t0 > 0 && g(ya) < 0 && g(yb) >= 0) {
               auto [dt, ye] = locate<3>(f, normalize, g, ya, ka, h, yb, opt.tol, 80, st);
               found = SphereReturn{ye, t0 + dt, (ye - y0).norm()};
               return false;
             }
             return true;
           },
           y0, t_max, opt, st);
  if (!found) throw NoReturn("no return within the time budget");
  return *found;
}

ReturnResult poincare_return(const PlanarRhs& f, const Section& sec, double r0, const ReturnOptions& opt) {
  const Eigen::Vector2d dir = sec.direction.normalized();
  const Eigen::Vector2d nrm(-dir(1), dir(0));
  const Eigen::Vector2d p0 = sec.anchor + r0 * dir;
  if (!(r0 > 0)) throw PreconditionViolated("start point is not on the open ray");
  const double flux = nrm.dot(f(p0));
  if (std::fabs(flux) < 1e-14) throw PreconditionViolated("flow is tangent to the section");
  const double s0 = flux > 0 ? 1.0 : -1.0;
  auto g = [&](const Eigen::Vector2d& y) { return s0 * nrm.dot(y - sec.anchor); };
  auto id = [](const Eigen::Vector2d& y) { return y; };
  IntegratorStats st;
  std::optional<ReturnResult> found;
  bool escaped = false;
  drive<2>(f, id,
           [&](double t0, const Eigen::Vector2d& ya, const Eigen::Vector2d& ka, double h, double,
               const Eigen::Vector2d& yb, const Eigen::Vector2d&) {
             if (yb.norm() > opt.bound) {
               escaped = true;
               return false;
             }
             // the start lies on the section, so the first step never counts
             if (t0 > 0 && g(ya) < 0 && g(yb) >= 0) {
               auto [dt, ye] = locate<2>(f, id, g, ya, ka, h, yb, opt.integ.tol, opt.max_bisection, st);
               const double r = dir.dot(ye - sec.anchor);
               if (r > 0) {
                 found = ReturnResult{ye, r, t0 + dt, st.accepted};
                 return false;
               }
             }
             return true;
           },
           p0, opt.t_max, opt.integ, st);
  if (escaped) throw NoReturn("trajectory left the bounding disc");
  if (!found) throw NoReturn("no return within the time budget");
  return *found;
}

ReturnResult poincare_return(const PlanarSystem<double>& sys, const Section& sec, const Eigen::Vector2d& p0,
                             const ReturnOptions& opt) {
  const Eigen::Vector2d dir = sec.direction.normalized();
  const Eigen::Vector2d rel = p0 - sec.anchor;
  const double r0 = dir.dot(rel);
  if ((rel - r0 * dir).norm() > 1e-12 * std::max(1.0, r0)) throw PreconditionViolated("start point is off the ray");
  return poincare_return(compile(sys), sec, r0, opt);
}

const char* cycle_stability_name(CycleStability s) {
  switch (s) {
    case CycleStability::Stable: return "stable";
    case CycleStability::Unstable: return "unstable";
    case CycleStability::Undetermined: return "undetermined";
  }
  return "?";
}

namespace {

double displacement(const PlanarRhs& f, const Section& sec, double r, const ReturnOptions& opt, double* period) {
  ReturnResult rr = poincare_return(f, sec, r, opt);
  if (period) *period = rr.time;
  return rr.r - r;
}

// A sign change of d that does not close up is a jump of the return map (an orbit through a saddle).
bool converged(const CycleEstimate& c) { return c.residual <= 1e-6 * std::max(1.0, c.r); }

CycleEstimate refine(const PlanarRhs& f, const Section& sec, double lo, double dlo, double hi, double dhi,
                     const ReturnOptions& opt) {
  // Illinois variant of regula falsi, with bisection when it stalls
  int side = 0;
  double r = 0.5 * (lo + hi), d = 0;
  for (int it = 0; it < 200; ++it) {
    r = (lo * dhi - hi * dlo) / (dhi - dlo);
    if (!(r > lo && r < hi)) r = 0.5 * (lo + hi);
    d = displacement(f, sec, r, opt, nullptr);
    if (std::fabs(d) < 1e-13 || hi - lo < 1e-14) break;
    if ((d < 0) == (dlo < 0)) {
      lo = r;
      dlo = d;
      if (side == -1) dhi *= 0.5;
      side = -1;
    } else {
      hi = r;
      dhi = d;
      if (side == 1) dlo *= 0.5;
      side = 1;
    }
  }
  CycleEstimate c;
  c.section = sec;
  c.r = r;
  ReturnResult rr = poincare_return(f, sec, r, opt);
  c.point = sec.point(r);
  c.period = rr.time;
  c.residual = (rr.point - c.point).norm();
  const double dh = 1e-6 * std::max(1.0, r);
  const double dp = displacement(f, sec, r + dh, opt, nullptr);
  const double dm = displacement(f, sec, std::max(r - dh, 0.5 * r), opt, nullptr);
  const double hm = r - std::max(r - dh, 0.5 * r);
  c.slope = 1.0 + (dp - dm) / (dh + hm);
  const double m = std::fabs(c.slope);
  c.stability = std::fabs(m - 1.0) <= 1e-4 ? CycleStability::Undetermined
                : m < 1.0                  ? CycleStability::Stable
                                           : CycleStability::Unstable;
  return c;
}

}  // namespace

CycleSearch find_limit_cycle(const PlanarSystem<double>& sys, const Section& sec, double r_lo, double r_hi,
                             const ReturnOptions& opt) {
  if (!(r_lo > 0 && r_hi > r_lo)) throw BracketInvalid("bracket must satisfy 0 < r_lo < r_hi");
  const PlanarRhs f = compile(sys);
  double dlo = 0, dhi = 0;
  try {
    dlo = displacement(f, sec, r_lo, opt, nullptr);
    dhi = displacement(f, sec, r_hi, opt, nullptr);
  } catch (const NoReturn& e) {
    throw BracketInvalid(std::string("bracket end has no return: ") + e.what());
  }
  CycleSearch out;
  const double zero = 1e-8;
  if (std::fabs(dlo) < zero && std::fabs(dhi) < zero) {
    const double dmid = displacement(f, sec, 0.5 * (r_lo + r_hi), opt, nullptr);
    if (std::fabs(dmid) < zero) {
      out.period_annulus = true;
      out.note = "displacement vanishes across the bracket: annulus of periodic orbits";
      return out;
    }
  }
  if (dlo == 0) dlo = -dhi * 1e-300;
  if ((dlo < 0) == (dhi < 0)) throw BracketInvalid("displacement has the same sign at both ends");
  const CycleEstimate est = refine(f, sec, r_lo, dlo, r_hi, dhi, opt);
  if (converged(est))
    out.cycle = est;
  else
    out.note = "displacement changes sign across a jump of the return map, not at a closed orbit";
  return out;
}

std::vector<CycleEstimate> scan_limit_cycles(const PlanarSystem<double>& sys, const Section& sec, double r_max,
                                             int n, const ReturnOptions& opt) {
  std::vector<double> radii;
  for (int i = 1; i <= n; ++i) radii.push_back(r_max * i / n);
  return scan_limit_cycles(sys, sec, radii, opt);
}

std::vector<CycleEstimate> scan_limit_cycles(const PlanarSystem<double>& sys, const Section& sec,
                                             const std::vector<double>& radii, const ReturnOptions& opt) {
  const PlanarRhs f = compile(sys);
  std::vector<CycleEstimate> out;
  double prev_r = 0, prev_d = 0;
  bool have = false;
  auto try_root = [&](double lo, double dlo, double hi, double dhi) {
    // both values at rounding level: a band of closed orbits, not an isolated one
    if (std::fabs(dlo) < 1e-9 * std::max(1.0, lo) && std::fabs(dhi) < 1e-9 * std::max(1.0, hi)) return;
    try {
      const CycleEstimate est = refine(f, sec, lo, dlo, hi, dhi, opt);
      if (converged(est)) out.push_back(est);
    } catch (const Error&) {
    }
  };
  for (const double r : radii) {
    double d = 0;
    try {
      d = displacement(f, sec, r, opt, nullptr);
    } catch (const PreconditionViolated&) {
      have = false;
      continue;
    } catch (const Error&) {
      // NoReturn or StepFailure: probe the gap to the last returning radius, then stop
      if (!have) break;
      double lo = prev_r, hi = r;
      for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        try {
          const double dm = displacement(f, sec, mid, opt, nullptr);
          if ((dm < 0) != (prev_d < 0)) {
            try_root(prev_r, prev_d, mid, dm);
            break;
          }
          lo = mid;
        } catch (const Error&) {
          hi = mid;
        }
      }
      break;
    }
    if (have && (d < 0) != (prev_d < 0) && std::fabs(d - prev_d) > 1e-12) try_root(prev_r, prev_d, r, d);
    prev_r = r;
    prev_d = d;
    have = true;
  }
  return out;
}

std::vector<SweepHit> cycle_sweep(const HomVectorField<double>& X, const SweepOptions& opt, int* points_swept) {
  SingularOptions so;
  so.eig_tol = opt.eig_tol;
  const SingularSet set = enumerate_singularities(X, so);
  std::vector<Eigen::Vector3d> centres;
  if (set.kind == SingularSet::Kind::Finite)
    for (const auto& r : set.points) {
      if (r.type == LocalType::Saddle) continue;
      bool seen = false;
      for (const auto& c : centres) seen = seen || (c + r.point).norm() < 1e-7;
      if (!seen) centres.push_back(r.point);
    }
  if (points_swept) *points_swept = static_cast<int>(centres.size());
  std::vector<SweepHit> hits;
  for (const auto& p : centres) {
    ChartSpec<double> chart;
    chart.kind = ChartKind::Stereographic;
    chart.base = -p;
    const PlanarSystem<double> sys = stereo_project(X, chart);
    const Eigen::Vector3d e = p.unitOrthogonal();
    std::vector<double> radii;
    for (int i = 1; i <= opt.radii; ++i) {
      const double th = opt.max_angle * i / opt.radii;
      radii.push_back((to_chart(chart, std::cos(th) * p + std::sin(th) * e) - to_chart(chart, p)).norm());
    }
    for (int d = 0; d < opt.rays; ++d) {
      const double ang = 0.3 + d * 2 * M_PI / opt.rays;
      Section sec;
      sec.anchor = to_chart(chart, p);
      sec.direction = Eigen::Vector2d(std::cos(ang), std::sin(ang));
      std::vector<CycleEstimate> found;
      try {
        found = scan_limit_cycles(sys, sec, radii, opt.ret);
      } catch (const Error&) {
      }
      for (const auto& c : found) hits.push_back({p, chart, c, from_chart(chart, c.point)});
    }
  }
  return hits;
}

std::string SeparatrixCrossing::side() const {
  if (stable_hits && unstable_hits) return "both";
  if (stable_hits) return "stable";
  if (unstable_hits) return "unstable";
  return "none";
}

SeparatrixCrossing separatrix_crossing(const PlanarSystem<double>& sys, const Eigen::Vector2d& saddle,
                                       const Eigen::Vector2d& target, double offset, double t_max) {
  const PlanarRhs f = compile(sys);
  const Eigen::Matrix2d J = f.jacobian(saddle);
  Eigen::EigenSolver<Eigen::Matrix2d> es(J);
  const auto ev = es.eigenvalues();
  if (std::fabs(ev(0).imag()) > 1e-12 || ev(0).real() * ev(1).real() >= 0)
    throw PreconditionViolated("point is not a hyperbolic saddle");
  const Eigen::Vector2d seg = target - saddle;
  const double len = seg.norm();
  const Eigen::Vector2d dir = seg / len, nrm(-dir(1), dir(0));
  SeparatrixCrossing out;
  auto id = [](const Eigen::Vector2d& y) { return y; };
  IntegratorOptions io;
  io.tol = 1e-11;
  io.hmax = 0.05;
  for (int k = 0; k < 2; ++k) {
    const bool unstable = ev(k).real() > 0;
    const Eigen::Vector2d e = es.eigenvectors().col(k).real().normalized();
    for (double sg : {1.0, -1.0}) {
      const Eigen::Vector2d w0 = saddle + sg * offset * e;
      IntegratorStats st;
      double hit = -1;
      try {
        drive<2>(f, id,
                 [&](double, const Eigen::Vector2d& ya, const Eigen::Vector2d&, double, double,
                     const Eigen::Vector2d& yb, const Eigen::Vector2d&) {
                   if (yb.norm() > 1e3) return false;
                   const double ga = nrm.dot(ya - saddle), gb = nrm.dot(yb - saddle);
                   if ((ga < 0) != (gb < 0)) {
                     const double th = ga / (ga - gb);
                     const Eigen::Vector2d p = ya + th * (yb - ya);
                     const double s = dir.dot(p - saddle);
                     if (s > 1e-5 * len && s < len * (1 - 1e-9)) {
                       hit = len - s;
                       return false;
                     }
                   }
                   return true;
                 },
                 w0, unstable ? t_max : -t_max, io, st);
      } catch (const StepFailure&) {
      }
      if (hit < 0) continue;
      if (unstable && (!out.unstable_hits || hit < out.unstable_at)) {
        out.unstable_hits = true;
        out.unstable_at = hit;
      }
      if (!unstable && (!out.stable_hits || hit < out.stable_at)) {
        out.stable_hits = true;
        out.stable_at = hit;
      }
    }
  }
  return out;
}

QuadCoeffs<double> homoclinic_family_coeffs(double a8) {
  QuadCoeffs<double> q;
  q(1) = -1;
  q(2) = -2;
  q(5) = 1;
  q(7) = 1;
  q(8) = a8;
  return q;
}

PlanarSystem<double> homoclinic_family_chart(double a8) { return south_pole_system(homoclinic_family_coeffs(a8)); }

std::array<std::complex<double>, 2> first_focus_closed_form(const QuadCoeffs<double>& q) {
  const double a1 = q(1), a2 = q(2), a5 = q(5), a7 = q(7), a8 = q(8);
  const double mu = a1 * a8 - a2 * a7;
  const std::complex<double> disc(mu * mu - 4 * (a7 * a7 + a5 * a7) * (a1 * a1 + a7 * a7), 0.0);
  const std::complex<double> s = std::sqrt(disc);
  return {(-mu + s) / (2 * a1), (-mu - s) / (2 * a1)};
}

int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SPHEREFLOW_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int n, const std::function<void(int)>& body, int threads) {
  const int k = std::min(worker_count(threads), std::max(n, 1));
  if (k <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::vector<std::thread> pool;
  for (int w = 0; w < k; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

double scale_of(const QuadCoeffs<double>& q) {
  double s = 1;
  for (double v : q.a) s = std::max(s, std::fabs(v));
  return s;
}

void check_family(const QuadCoeffs<double>& q) {
  const double tol = 1e-12 * scale_of(q);
  if (std::fabs(q(3)) > tol || std::fabs(q(4)) > tol || std::fabs(q(6)) > tol)
    throw PreconditionViolated("family needs a3 = a4 = a6 = 0");
  if (std::fabs(q(1)) <= tol) throw PreconditionViolated("family needs a1 != 0");
  if (q(5) * q(7) <= tol * tol) throw PreconditionViolated("family needs -a5 a7 < 0");
}

double bracket_of(const QuadCoeffs<double>& q) { return q(2) * (q(5) + q(7)) - q(1) * q(8); }

FocusSample focus_at(const PlanarRhs& f, const Eigen::Vector2d& p, double mu) {
  FocusSample s;
  s.position = p;
  s.mu = mu;
  const Eigen::Matrix2d J = f.jacobian(p);
  const double tr = J.trace(), det = J.determinant();
  const std::complex<double> root = std::sqrt(std::complex<double>(tr * tr - 4 * det, 0));
  s.eig = {0.5 * (tr + root), 0.5 * (tr - root)};
  s.re = 0.5 * tr;
  s.focus = tr * tr - 4 * det < 0;
  return s;
}

std::array<FocusSample, 2> foci_of(const QuadCoeffs<double>& q) {
  const PlanarRhs f = compile(south_pole_system(q));
  const double a1 = q(1), a2 = q(2), a5 = q(5), a7 = q(7), a8 = q(8);
  std::array<FocusSample, 2> out;
  out[0] = focus_at(f, Eigen::Vector2d(-a7 / a1, 0), a1 * a8 - a2 * a7);
  out[0].closed_form = first_focus_closed_form(q);
  const double D = bracket_of(q);
  const double mu2 = -(a8 * (a2 * a7 - a8 * a1) - a1 * (a5 * a5 + a5 * a7));
  if (std::fabs(D) > 1e-12 * scale_of(q) * scale_of(q)) {
    out[1] = focus_at(f, Eigen::Vector2d(-a5 * a8 / D, a5 * (a5 + a7) / D), mu2);
  } else {
    out[1].position = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
    out[1].mu = mu2;
  }
  return out;
}

HomVectorField<double> chop_field(HomVectorField<double> X, double tol) {
  for (auto& c : X.c) {
    Poly3<double> out;
    for (const auto& [e, v] : c.terms())
      if (std::fabs(v) > tol) out.add_term(e, v);
    c = out;
  }
  return X;
}

// Sign of V1 at a weak focus given by a chart point of the south chart.
void weak_focus_stability(const QuadCoeffs<double>& q, const Eigen::Vector2d& w, HopfEvent& ev) {
  try {
    const Eigen::Vector3d p = Eigen::Vector3d(w(0), w(1), -1.0).normalized();
    auto mv = move_singularity_to_south_pole(expand_quad(q), Vec3<double>(p), 1e-7);
    QuadCoeffs<double> r = to_quad_normal_form(chop_field(mv.field, 1e-11 * scale_of(q)));
    r(3) = 0;
    r(6) = 0;
    r(8) = -r(4);
    const double om = -(r(4) * r(4) + r(5) * r(7));
    if (om <= 0) return;
    ev.V1 = lyapunov_v1_closed_form(r);
    const double W = r(4) * (r(1) * r(1) - r(2) * r(2)) + r(1) * r(2) * (r(5) + r(7));
    if (W != 0) ev.weak_focus_stable = W > 0;
  } catch (const Error&) {
  }
}

}  // namespace

HopfReport hopf_scan(const std::function<QuadCoeffs<double>(double)>& family, const std::string& parameter,
                     double lo, double hi, int n, const HopfOptions& opt) {
  if (n < 2 || !(hi > lo)) throw PreconditionViolated("scan needs lo < hi and at least two samples");
  HopfReport rep;
  rep.parameter = parameter;
  rep.samples.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double p = lo + (hi - lo) * i / (n - 1);
    rep.samples[i].param = p;
    rep.samples[i].coeffs = family(p);
    check_family(rep.samples[i].coeffs);
  }
  int centre_samples = 0;
  for (const auto& s : rep.samples)
    if (std::fabs(bracket_of(s.coeffs)) <= 1e-12 * scale_of(s.coeffs) * scale_of(s.coeffs)) ++centre_samples;
  if (centre_samples == n) {
    rep.hopf_possible = false;
    rep.note = "a2 (a5 + a7) = a1 a8 throughout: the singularities off the equator are saddles and centres, "
               "no weak focus, no Hopf bifurcation";
    return rep;
  }
  if (centre_samples > 0) rep.note = "some samples lie in the centre family (bracket zero)";

  parallel_for(
      n,
      [&](int i) {
        HopfSample& s = rep.samples[i];
        s.foci = foci_of(s.coeffs);
        const PlanarSystem<double> sys = south_pole_system(s.coeffs);
        const Eigen::Vector2d fp = s.foci[0].position;
        if (opt.search_cycles && s.foci[0].focus && fp.norm() > 0) {
          Section sec{fp, -fp.normalized()};
          s.cycles = scan_limit_cycles(sys, sec, 0.999 * fp.norm(), opt.cycle_radii, opt.ret);
        }
        if (opt.separatrices && fp.norm() > 0) {
          try {
            s.separatrix_side = separatrix_crossing(sys, Eigen::Vector2d::Zero(), fp).side();
          } catch (const Error&) {
            s.separatrix_side = "n/a";
          }
        }
      },
      opt.threads);

  for (int i = 0; i + 1 < n; ++i) {
    const HopfSample &a = rep.samples[i], &b = rep.samples[i + 1];
    if (!a.separatrix_side.empty() && a.separatrix_side != b.separatrix_side)
      rep.separatrix_events.push_back({a.param, b.param, a.separatrix_side, b.separatrix_side});
    for (int k = 0; k < 2; ++k) {
      const FocusSample &fa = a.foci[k], &fb = b.foci[k];
      if (!fa.position.allFinite() || !fb.position.allFinite()) continue;
      if (!(fa.focus || fb.focus) || (fa.re < 0) == (fb.re < 0)) continue;
      // bisection on the real part
      double pl = a.param, ph = b.param, rl = fa.re;
      bool jump = false;
      for (int it = 0; it < 60; ++it) {
        const double pm = 0.5 * (pl + ph);
        const FocusSample fm = foci_of(family(pm))[k];
        if (!fm.position.allFinite()) {
          jump = true;
          break;
        }
        const double rm = fm.re;
        if ((rm < 0) == (rl < 0)) {
          pl = pm;
          rl = rm;
        } else {
          ph = pm;
        }
      }
      HopfEvent ev;
      ev.focus = k;
      ev.param = 0.5 * (pl + ph);
      const QuadCoeffs<double> q = family(ev.param);
      const auto fo = foci_of(q);
      // a sign change through a pole of the focus position is not a crossing
      if (jump || std::fabs(fo[k].re) > 1e-7 * (1 + std::abs(fo[k].eig[0]))) continue;
      ev.mu = fo[k].mu;
      ev.eig = fo[k].eig;
      const double dp = 1e-6 * std::max(1.0, std::fabs(ev.param));
      const auto fp = foci_of(family(ev.param + dp)), fm = foci_of(family(ev.param - dp));
      const double dmu = fp[k].mu - fm[k].mu;
      ev.derivative = dmu != 0 ? (fp[k].re - fm[k].re) / dmu : std::numeric_limits<double>::quiet_NaN();
      if (k == 0) {
        ev.derivative_closed = -1.0 / (2 * q(1));
        ev.derivative_normalized = ev.derivative * (-2 * q(1));
      }
      ev.other_focus_weak = fo[1 - k].position.allFinite() && std::fabs(fo[1 - k].re) < 1e-9;
      weak_focus_stability(q, fo[k].position, ev);
      rep.events.push_back(ev);
    }
  }
  return rep;
}

}  // namespace sphereflow
