#include "sphereflow/local.hpp"

#include "sphereflow/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace sphereflow {

const char* series_verdict_name(SeriesVerdict v) {
  switch (v) {
    case SeriesVerdict::SaddleNode: return "saddle-node";
    case SeriesVerdict::Cusp: return "cusp";
    case SeriesVerdict::TopologicalNode: return "topological-node";
    case SeriesVerdict::Saddle: return "saddle";
    case SeriesVerdict::FocusOrCenter: return "focus-or-center";
    case SeriesVerdict::EllipticHyperbolic: return "elliptic-hyperbolic";
    case SeriesVerdict::NonIsolated: return "non-isolated";
    case SeriesVerdict::TruncationInconclusive: return "truncation-inconclusive";
  }
  return "?";
}

namespace {

template <class S>
using Mat2 = Eigen::Matrix<S, 2, 2>;

template <class S>
Poly2<S> pr() { return Poly2<S>::var(0); }
template <class S>
Poly2<S> ps() { return Poly2<S>::var(1); }

template <class S>
bool small(const S& x, double tol) {
  if constexpr (is_exact_v<S>) {
    (void)tol;
    return is_zero(x);
  } else {
    return std::fabs(x) <= tol;
  }
}

template <class S>
double coeff_scale(const Poly2<S>& P, const Poly2<S>& Q) {
  double s = 0;
  for (const auto* p : {&P, &Q})
    for (const auto& [e, c] : p->terms()) s = std::max(s, std::fabs(to_double(c)));
  return s > 0 ? s : 1.0;
}

template <class S>
Mat2<S> linear_part(const Poly2<S>& P, const Poly2<S>& Q) {
  Mat2<S> J;
  J << P.coeff({1, 0}), P.coeff({0, 1}), Q.coeff({1, 0}), Q.coeff({0, 1});
  return J;
}

// (P', Q') = scale * E^{-1} (P, Q)(E w)
template <class S>
std::pair<Poly2<S>, Poly2<S>> linear_change(const Poly2<S>& P, const Poly2<S>& Q, const Mat2<S>& E, const S& scale) {
  std::array<Poly2<S>, 2> img{pr<S>() * E(0, 0) + ps<S>() * E(0, 1), pr<S>() * E(1, 0) + ps<S>() * E(1, 1)};
  Poly2<S> Pt = P.template substitute<2>(img), Qt = Q.template substitute<2>(img);
  const S det = E(0, 0) * E(1, 1) - E(0, 1) * E(1, 0);
  const S f = scale / det;
  return {(Pt * E(1, 1) - Qt * E(0, 1)) * f, (Qt * E(0, 0) - Pt * E(1, 0)) * f};
}

template <class S>
std::vector<S> series_mul(const std::vector<S>& a, const std::vector<S>& b, int order) {
  std::vector<S> out(static_cast<std::size_t>(order) + 1, S(0));
  for (std::size_t i = 0; i < a.size() && i <= static_cast<std::size_t>(order); ++i) {
    if (is_zero(a[i])) continue;
    for (std::size_t j = 0; j < b.size() && i + j <= static_cast<std::size_t>(order); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

template <class S>
int leading(const std::vector<S>& c, double tol, S& value) {
  for (std::size_t i = 0; i < c.size(); ++i)
    if (!small(c[i], tol)) {
      value = c[i];
      return static_cast<int>(i);
    }
  return -1;
}

template <class S>
bool exact_branch_certified(const Poly2<S>& branch_eq, const std::vector<S>& phi, const Poly2<S>& other) {
  if constexpr (!is_exact_v<S>) {
    (void)branch_eq;
    (void)phi;
    (void)other;
    return false;
  } else {
    int dphi = 0;
    for (std::size_t i = 0; i < phi.size(); ++i)
      if (!is_zero(phi[i])) dphi = static_cast<int>(i);
    const int full = std::max(1, std::max(branch_eq.degree(), other.degree())) * std::max(1, dphi) + 1;
    auto res = compose_branch(branch_eq, phi, full);
    for (std::size_t i = 0; i < phi.size() && i < res.size(); ++i) res[i] += phi[i];
    for (const auto& v : res)
      if (!is_zero(v)) return false;
    for (const auto& v : compose_branch(other, phi, full))
      if (!is_zero(v)) return false;
    return true;
  }
}

}  // namespace

template <class S>
std::vector<S> compose_branch(const Poly2<S>& F, const std::vector<S>& phi, int order) {
  const int maxs = std::max(0, F.degree_in(1));
  std::vector<std::vector<S>> pw{std::vector<S>{S(1)}};
  for (int k = 1; k <= maxs; ++k) pw.push_back(series_mul(pw.back(), phi, order));
  std::vector<S> out(static_cast<std::size_t>(order) + 1, S(0));
  for (const auto& [e, c] : F.terms()) {
    const auto& p = pw[e[1]];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const std::size_t idx = j + static_cast<std::size_t>(e[0]);
      if (idx > static_cast<std::size_t>(order)) break;
      out[idx] += c * p[j];
    }
  }
  return out;
}

template <class S>
std::vector<S> solve_branch(const Poly2<S>& B, int order) {
  std::vector<S> phi(static_cast<std::size_t>(order) + 1, S(0));
  for (int it = 0; it <= order + 1; ++it) {
    auto next = compose_branch(B, phi, order);
    for (auto& v : next) v = -v;
    if (next == phi) break;
    phi = std::move(next);
  }
  return phi;
}

template <class S>
PlanarSystem<S> south_pole_system(const QuadCoeffs<S>& q) {
  if (!is_zero(q(3)) || !is_zero(q(6))) throw PreconditionViolated("(0,0,-1) is not a singularity");
  const Poly2<S> u = pr<S>(), v = ps<S>();
  PlanarSystem<S> sys;
  sys.P = u * (-q(4)) - v * q(5) + u * v * q(1) + v * v * q(2) - u * u * u * q(4) - u * u * v * (q(5) + q(7)) -
          u * v * v * q(8);
  sys.Q = u * (-q(7)) - v * q(8) - u * u * q(1) - u * v * q(2) - u * u * v * q(4) - u * v * v * (q(5) + q(7)) -
          v * v * v * q(8);
  sys.provenance = "central chart at (0,0,-1)";
  sys.time_factor = "-z";
  return sys;
}

template <class S>
CenterVerdict<S> center_test(const QuadCoeffs<S>& q) {
  if (!is_zero(q(3)) || !is_zero(q(6))) throw PreconditionViolated("(0,0,-1) is not a singularity");
  CenterVerdict<S> out;
  double scale = 1.0;
  if constexpr (!is_exact_v<S>) {
    for (double v : q.a) scale = std::max(scale, std::fabs(v));
  }
  const double tol = 1e-12;
  const S tr = -q(4) - q(8);
  const S det = q(4) * q(8) - q(5) * q(7);
  if (!small(tr, tol * scale)) {
    out.reason = "trace != 0";
    return out;
  }
  if (small(det, tol * scale * scale) || sgn(det) < 0) {
    out.reason = "det <= 0";
    return out;
  }
  const S w = q(4) * (q(1) * q(1) - q(2) * q(2)) + q(1) * q(2) * (q(5) + q(7));
  out.w_sign = small(w, tol * scale * scale * scale) ? 0 : sgn(w);
  if (out.w_sign == 0) {
    out.kind = CenterKind::Center;
  } else {
    out.kind = CenterKind::WeakFocus;
    out.stable = out.w_sign > 0;
  }
  try {
    QuadCoeffs<S> qq = q;
    qq(8) = -q(4);
    out.V1 = lyapunov_v1_closed_form(qq);
  } catch (const NotRepresentable&) {
  } catch (const MixedRadicand&) {
  }
  return out;
}

template <class S>
S lyapunov_v1_closed_form(const QuadCoeffs<S>& q) {
  if (!small(q(8) + q(4), 1e-12)) throw PreconditionViolated("needs a8 = -a4");
  const S om = -(q(4) * q(4) + q(5) * q(7));
  if (sgn(om) <= 0) throw PreconditionViolated("needs a4^2 + a5 a7 < 0");
  const S w = q(4) * (q(1) * q(1) - q(2) * q(2)) + q(1) * q(2) * (q(5) + q(7));
  if (is_zero(w)) return S(0);
  return (q(5) - q(7)) * w / (S(8) * q(7) * om * sqrt_scalar(om));
}

template <class S>
PlanarSystem<S> rotation_form(const QuadCoeffs<S>& q) {
  if (!small(q(8) + q(4), 1e-12)) throw PreconditionViolated("needs a8 = -a4");
  const S om = -(q(4) * q(4) + q(5) * q(7));
  if (sgn(om) <= 0) throw PreconditionViolated("needs a4^2 + a5 a7 < 0");
  const S w = sqrt_scalar(om);
  PlanarSystem<S> base = south_pole_system(q);
  Mat2<S> T;
  T << -w / q(7), q(4) / q(7), S(0), S(1);
  auto [P, Q] = linear_change(base.P, base.Q, T, S(1) / w);
  PlanarSystem<S> out;
  out.P = P;
  out.Q = Q;
  out.chart = base.chart;
  out.provenance = "rotation form of the south pole chart";
  out.time_factor = "sqrt(-(a4^2+a5a7))";
  return out;
}

template <class S>
LyapunovSolve<S> lyapunov_homological(const PlanarSystem<S>& sys, int k, Gauge gauge) {
  const double scale = coeff_scale(sys.P, sys.Q);
  const double tol = 1e-10 * scale;
  Mat2<S> J = linear_part(sys.P, sys.Q);
  if (!small(J(0, 0), tol) || !small(J(1, 1), tol) || !small(J(0, 1) + S(1), tol) || !small(J(1, 0) - S(1), tol))
    throw NonRotationLinearPart("linear part is not (-s, r)");
  if (!small(sys.P.coeff({0, 0}), tol) || !small(sys.Q.coeff({0, 0}), tol))
    throw NonRotationLinearPart("origin is not singular");
  const int top = 2 * k + 2;
  const int maxdeg = std::max(sys.P.degree(), sys.Q.degree());
  std::vector<Poly2<S>> Pi(maxdeg + 1), Qi(maxdeg + 1);
  for (int i = 2; i <= maxdeg; ++i) {
    Pi[i] = sys.P.homogeneous_part(i);
    Qi[i] = sys.Q.homogeneous_part(i);
  }
  const Poly2<S> rho = pr<S>() * pr<S>() + ps<S>() * ps<S>();
  LyapunovSolve<S> out;
  out.H.assign(top + 1, Poly2<S>());
  out.H[2] = rho * S(Rational(1, 2));
  auto mono = [](int m, int i) { return Poly2<S>::monomial({m - i, i}, S(1)); };
  for (int m = 3; m <= top; ++m) {
    Poly2<S> rhs;
    for (int i = 2; i <= maxdeg; ++i) {
      const int j = m + 1 - i;
      if (j < 2 || j >= m) continue;
      rhs += Pi[i] * out.H[j].derivative(0) + Qi[i] * out.H[j].derivative(1);
    }
    const bool even = m % 2 == 0;
    const int ncols = m + 1 + (even ? 1 : 0);
    std::vector<std::vector<S>> A(m + 1, std::vector<S>(ncols, S(0)));
    std::vector<S> b(m + 1, S(0));
    for (int i = 0; i <= m; ++i) {
      Poly2<S> h = mono(m, i);
      Poly2<S> Lh = ps<S>() * h.derivative(0) * S(-1) + pr<S>() * h.derivative(1);
      for (const auto& [e, c] : Lh.terms()) A[e[1]][i] += c;
    }
    Poly2<S> rho_pow = rho.pow(m / 2);
    if (even)
      for (const auto& [e, c] : rho_pow.terms()) A[e[1]][m + 1] -= c;
    for (const auto& [e, c] : rhs.terms()) b[e[1]] -= c;
    auto sol = solve_linear<S>(A, b, 1e-12);
    if (!sol.consistent) throw Error("homological equation is inconsistent");
    Poly2<S> Hm;
    for (int i = 0; i <= m; ++i) Hm += mono(m, i) * sol.x[i];
    if (even) {
      if (gauge == Gauge::UnitKernel) Hm += rho_pow;
      out.V.push_back(sol.x[m + 1]);
    }
    out.H[m] = Hm;
  }
  return out;
}

template <class S>
Poly2<S> lyapunov_residual(const PlanarSystem<S>& sys, const LyapunovSolve<S>& sol) {
  Poly2<S> H;
  for (const auto& h : sol.H) H += h;
  Poly2<S> lhs = sys.P * H.derivative(0) + sys.Q * H.derivative(1);
  const Poly2<S> rho = pr<S>() * pr<S>() + ps<S>() * ps<S>();
  for (std::size_t i = 0; i < sol.V.size(); ++i) lhs -= rho.pow(static_cast<int>(i) + 2) * sol.V[i];
  const int top = static_cast<int>(sol.H.size()) - 1;
  Poly2<S> out;
  for (int d = 0; d <= top; ++d) out += lhs.homogeneous_part(d);
  return out;
}

template <class S>
SeriesClassification<S> nilpotent_series(const Poly2<S>& P, const Poly2<S>& Q, const SeriesOptions& opt) {
  const double tol = opt.tol * coeff_scale(P, Q);
  SeriesClassification<S> out;
  out.P = P;
  out.Q = Q;
  const Poly2<S> A = P - ps<S>();
  out.phi = solve_branch(A, opt.order);
  out.psi = compose_branch(Q, out.phi, opt.order);
  out.div = compose_branch(Poly2<S>(P.derivative(0) + Q.derivative(1)), out.phi, opt.order);
  S a{0}, b{0};
  const int alpha = leading(out.psi, tol, a);
  const int beta = leading(out.div, tol, b);
  out.leading_index = alpha;
  out.leading_coeff = a;
  out.div_index = beta;
  out.div_coeff = b;
  if (alpha < 0) {
    out.certified = exact_branch_certified(A, out.phi, Q);
    out.verdict = out.certified ? SeriesVerdict::NonIsolated : SeriesVerdict::TruncationInconclusive;
    return out;
  }
  const bool no_div = beta < 0;
  if (alpha % 2 == 0) {
    const int m = alpha / 2;
    out.verdict = (no_div || beta >= m) ? SeriesVerdict::Cusp : SeriesVerdict::SaddleNode;
    return out;
  }
  const int m = (alpha - 1) / 2;
  if (sgn(a) > 0) {
    out.verdict = SeriesVerdict::Saddle;
    return out;
  }
  if (no_div || beta > m) {
    out.verdict = SeriesVerdict::FocusOrCenter;
    return out;
  }
  if (beta == m) {
    const S d = b * b + S(4) * a * S(m + 1);
    if (!small(d, tol) && sgn(d) < 0) {
      out.verdict = SeriesVerdict::FocusOrCenter;
      return out;
    }
  }
  out.verdict = beta % 2 == 0 ? SeriesVerdict::TopologicalNode : SeriesVerdict::EllipticHyperbolic;
  return out;
}

template <class S>
SeriesClassification<S> nilpotent_classify(const QuadCoeffs<S>& q, const SeriesOptions& opt) {
  const double tol = 1e-12;
  const bool zero_lin = small(q(4), tol) && small(q(5), tol) && small(q(7), tol) && small(q(8), tol);
  if (!small(q(8) + q(4), tol) || !small(q(4) * q(4) + q(5) * q(7), tol) || zero_lin)
    throw NotNilpotent("linear part at (0,0,-1) is not nilpotent");
  PlanarSystem<S> base = south_pole_system(q);
  Mat2<S> E;
  S scale(1);
  const bool a4z = small(q(4), tol), a7z = small(q(7), tol);
  if (!a4z && !a7z) {
    const S k = S(-1) / q(4);
    const S qq = S(-2) * q(7) / (q(4) * q(4) + q(7) * q(7));
    E << k * q(4), q(4) * qq / q(7) - k, k * q(7), qq;
  } else if (a7z) {
    E << S(1), S(0), S(0), S(1);
    scale = S(-1) / q(5);
  } else {
    E << S(0), S(1), S(1), S(0);
    scale = S(-1) / q(7);
  }
  auto [P, Q] = linear_change(base.P, base.Q, E, scale);
  auto out = nilpotent_series(P, Q, opt);
  if (!a4z && !a7z) {
    out.alpha2 = out.phi.size() > 2 ? out.phi[2] : S(0);
    out.beta2 = out.psi.size() > 2 ? out.psi[2] : S(0);
  }
  return out;
}

template <class S>
SeriesClassification<S> nilpotent_classify_system(const PlanarSystem<S>& sys, const SeriesOptions& opt) {
  const double tol = opt.tol * coeff_scale(sys.P, sys.Q);
  Mat2<S> J = linear_part(sys.P, sys.Q);
  const S tr = J.trace(), det = J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0);
  bool zero = true;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) zero = zero && small(J(i, j), tol);
  if (zero || !small(tr, tol) || !small(det, tol * coeff_scale(sys.P, sys.Q)))
    throw NotNilpotent("linear part is not nilpotent");
  Eigen::Matrix<S, 2, 1> e2(S(1), S(0));
  if (small(J(0, 0), tol) && small(J(1, 0), tol)) e2 = Eigen::Matrix<S, 2, 1>(S(0), S(1));
  Eigen::Matrix<S, 2, 1> e1 = J * e2;
  Mat2<S> E;
  E.col(0) = e1;
  E.col(1) = e2;
  auto [P, Q] = linear_change(sys.P, sys.Q, E, S(1));
  // drop rounding residue in the linear part
  if constexpr (!is_exact_v<S>) {
    P = P - Poly2<S>::var(0, P.coeff({1, 0})) - Poly2<S>::var(1, P.coeff({0, 1}) - 1.0);
    Q = Q - Poly2<S>::var(0, Q.coeff({1, 0})) - Poly2<S>::var(1, Q.coeff({0, 1}));
  }
  return nilpotent_series(P, Q, opt);
}

template <class S>
SeriesClassification<S> semi_hyperbolic_classify(const PlanarSystem<S>& sys, const SeriesOptions& opt) {
  const double tol = opt.tol * coeff_scale(sys.P, sys.Q);
  Mat2<S> J = linear_part(sys.P, sys.Q);
  const S tr = J.trace(), det = J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0);
  if (small(tr, tol) || !small(det, tol * coeff_scale(sys.P, sys.Q))) throw NotSemiHyperbolic("needs trace != 0 and det = 0");
  using V2 = Eigen::Matrix<S, 2, 1>;
  auto normalize = [&](V2 v) {
    if (!small(v(1), tol)) return V2(v(0) / v(1), S(1));
    return V2(S(1), S(0));
  };
  // kernel vector from the first nonzero row
  V2 e0;
  if (!small(J(1, 0), tol) || !small(J(1, 1), tol))
    e0 = normalize(V2(-J(1, 1), J(1, 0)));
  else
    e0 = normalize(V2(-J(0, 1), J(0, 0)));
  V2 el = (!small(J(0, 1), tol) || !small(J(1, 1), tol)) ? normalize(V2(J(0, 1), J(1, 1)))
                                                         : normalize(V2(J(0, 0), J(1, 0)));
  Mat2<S> E;
  E.col(0) = e0;
  E.col(1) = el;
  auto [P, Q] = linear_change(sys.P, sys.Q, E, S(1) / tr);
  if constexpr (!is_exact_v<S>) {
    P = P - Poly2<S>::var(0, P.coeff({1, 0})) - Poly2<S>::var(1, P.coeff({0, 1}));
    Q = Q - Poly2<S>::var(0, Q.coeff({1, 0})) - Poly2<S>::var(1, Q.coeff({0, 1}) - 1.0);
  }
  SeriesClassification<S> out;
  out.P = P;
  out.Q = Q;
  const Poly2<S> B = Q - ps<S>();
  out.phi = solve_branch(B, opt.order);
  out.psi = compose_branch(P, out.phi, opt.order);
  S a{0};
  const int m = leading(out.psi, tol, a);
  out.leading_index = m;
  out.leading_coeff = a;
  if (m < 0) {
    out.certified = exact_branch_certified(B, out.phi, P);
    out.verdict = out.certified ? SeriesVerdict::NonIsolated : SeriesVerdict::TruncationInconclusive;
  } else if (m % 2 == 0) {
    out.verdict = SeriesVerdict::SaddleNode;
  } else {
    out.verdict = sgn(a) > 0 ? SeriesVerdict::TopologicalNode : SeriesVerdict::Saddle;
  }
  return out;
}

#define SPHEREFLOW_INSTANTIATE(S)                                                                        \
  template PlanarSystem<S> south_pole_system(const QuadCoeffs<S>&);                                      \
  template CenterVerdict<S> center_test(const QuadCoeffs<S>&);                                           \
  template S lyapunov_v1_closed_form(const QuadCoeffs<S>&);                                              \
  template PlanarSystem<S> rotation_form(const QuadCoeffs<S>&);                                          \
  template LyapunovSolve<S> lyapunov_homological(const PlanarSystem<S>&, int, Gauge);                    \
  template Poly2<S> lyapunov_residual(const PlanarSystem<S>&, const LyapunovSolve<S>&);                  \
  template SeriesClassification<S> nilpotent_series(const Poly2<S>&, const Poly2<S>&, const SeriesOptions&); \
  template SeriesClassification<S> nilpotent_classify(const QuadCoeffs<S>&, const SeriesOptions&);       \
  template SeriesClassification<S> nilpotent_classify_system(const PlanarSystem<S>&, const SeriesOptions&); \
  template SeriesClassification<S> semi_hyperbolic_classify(const PlanarSystem<S>&, const SeriesOptions&); \
  template std::vector<S> solve_branch(const Poly2<S>&, int);                                            \
  template std::vector<S> compose_branch(const Poly2<S>&, const std::vector<S>&, int);

SPHEREFLOW_INSTANTIATE(QuadSurd)
SPHEREFLOW_INSTANTIATE(double)

}  // namespace sphereflow
