#include "sphereflow/global.hpp"

#include "sphereflow/linalg.hpp"

#include <unsupported/Eigen/Polynomials>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sphereflow {

const char* sign_name(Sign s) {
  switch (s) {
    case Sign::PSD: return "psd";
    case Sign::NSD: return "nsd";
    case Sign::Zero: return "zero";
    case Sign::Indefinite: return "indefinite";
    case Sign::Unknown: return "unknown";
  }
  return "?";
}

const char* criterion_name(Criterion c) {
  switch (c) {
    case Criterion::StereoSign: return "stereo-sign";
    case Criterion::StereoTransversal: return "stereo-transversal";
    case Criterion::CentralSign: return "central-sign";
    case Criterion::CentralTransversal: return "central-transversal";
  }
  return "?";
}

const char* reduction_target_name(ReductionTarget t) {
  switch (t) {
    case ReductionTarget::Family142: return "Family142";
    case ReductionTarget::Family143: return "Family143";
    case ReductionTarget::Family144: return "Family144";
    case ReductionTarget::CircleOfSingularities: return "CircleOfSingularities";
    case ReductionTarget::DegenerateCase: return "DegenerateCase";
  }
  return "?";
}

const char* portrait_label_name(PortraitLabel l) {
  switch (l) {
    case PortraitLabel::Fig3_LinearlyZero: return "Fig3_LinearlyZero";
    case PortraitLabel::Fig2a_SingularCircle: return "Fig2a_SingularCircle";
    case PortraitLabel::Fig2b_SingularCircle: return "Fig2b_SingularCircle";
    case PortraitLabel::Fig31_NilpotentCusp: return "Fig31_NilpotentCusp";
    case PortraitLabel::Fig32_NilpotentCuspA2Zero: return "Fig32_NilpotentCuspA2Zero";
    case PortraitLabel::Fig33a: return "Fig33a";
    case PortraitLabel::Fig33b: return "Fig33b";
    case PortraitLabel::Fig33c_CenterFoci: return "Fig33c_CenterFoci";
    case PortraitLabel::Fig35_TripleCenterPair: return "Fig35_TripleCenterPair";
    case PortraitLabel::Fig36_SaddleNodes: return "Fig36_SaddleNodes";
    case PortraitLabel::Fig37_TwoSingularities: return "Fig37_TwoSingularities";
    case PortraitLabel::Fig38_SaddleNodesFoci: return "Fig38_SaddleNodesFoci";
    case PortraitLabel::Fig41_Nondegenerate: return "Fig41_Nondegenerate";
    case PortraitLabel::ModuloLimitCycles: return "ModuloLimitCycles";
  }
  return "?";
}

namespace {

template <class S>
bool small(const S& x, double tol) {
  if constexpr (is_exact_v<S>) {
    (void)tol;
    return is_zero(x);
  } else {
    return std::fabs(x) <= tol;
  }
}

template <class S, int N>
double coeff_scale(const Poly<S, N>& p) {
  double s = 0;
  for (const auto& [e, c] : p.terms()) s = std::max(s, std::fabs(to_double(c)));
  return s > 0 ? s : 1.0;
}

template <class S, int N>
Poly<S, N> chop(const Poly<S, N>& p, double rel) {
  if constexpr (is_exact_v<S>) {
    (void)rel;
    return p;
  } else {
    const double tol = rel * coeff_scale(p);
    Poly<S, N> out;
    for (const auto& [e, c] : p.terms())
      if (std::fabs(c) > tol) out.add_term(e, c);
    return out;
  }
}

template <class S, int N>
bool poly_negligible(const Poly<S, N>& p, double tol) {
  for (const auto& [e, c] : p.terms())
    if (!small(c, tol)) return false;
  return true;
}

/// Exact image of a double polynomial (doubles are dyadic rationals).
template <int N>
Poly<QuadSurd, N> exactify(const Poly<double, N>& p) {
  Poly<QuadSurd, N> out;
  for (const auto& [e, c] : p.terms()) out.add_term(e, QuadSurd(Rational(c)));
  return out;
}

template <class S>
UPoly<S> exact_quotient(const UPoly<S>& a, const UPoly<S>& b) {
  UPoly<S> q;
  poly_rem(a, b, &q);
  q.trim();
  return q;
}

// Yun's square-free decomposition: f = prod g_i^i, returned g_1, g_2, ...
template <class S>
std::vector<UPoly<S>> squarefree_factors(const UPoly<S>& f) {
  std::vector<UPoly<S>> out;
  UPoly<S> fp = f.derivative();
  if (fp.is_zero()) return out;
  UPoly<S> a = poly_gcd(f, fp);
  UPoly<S> b = exact_quotient(f, a);
  UPoly<S> c = exact_quotient(fp, a);
  UPoly<S> d = c;
  {
    UPoly<S> bp = b.derivative();
    std::vector<S> v(std::max(d.c.size(), bp.c.size()), S(0));
    for (std::size_t i = 0; i < d.c.size(); ++i) v[i] += d.c[i];
    for (std::size_t i = 0; i < bp.c.size(); ++i) v[i] -= bp.c[i];
    d = UPoly<S>(v);
  }
  while (b.degree() > 0) {
    a = d.is_zero() ? b : poly_gcd(b, d);
    out.push_back(a);
    b = exact_quotient(b, a);
    c = d.is_zero() ? UPoly<S>() : exact_quotient(d, a);
    UPoly<S> bp = b.derivative();
    std::vector<S> v(std::max(c.c.size(), bp.c.size()), S(0));
    for (std::size_t i = 0; i < c.c.size(); ++i) v[i] += c.c[i];
    for (std::size_t i = 0; i < bp.c.size(); ++i) v[i] -= bp.c[i];
    d = UPoly<S>(v);
  }
  return out;
}

// +1 / -1 when the even binary form keeps a sign, 0 when it changes sign.
int binary_form_sign(const Poly2<QuadSurd>& form, int d) {
  std::vector<QuadSurd> c(static_cast<std::size_t>(d) + 1, QuadSurd(0));
  for (int i = 0; i <= d; ++i) c[i] = form.coeff({i, d - i});
  UPoly<QuadSurd> f(c);
  if (f.is_zero()) return 0;
  if ((d - f.degree()) % 2 != 0) return 0;
  if (f.degree() == 0) return sgn(f.lead());
  UPoly<QuadSurd> odd(std::vector<QuadSurd>{QuadSurd(1)});
  auto factors = squarefree_factors(f);
  for (std::size_t i = 0; i < factors.size(); i += 2) odd = odd * factors[i];
  if (count_real_roots(odd) > 0) return 0;
  return sgn(f.lead());
}

template <class S, int N>
bool all_exponents_even(const typename Poly<S, N>::Exp& e) {
  for (int k : e)
    if (k % 2 != 0) return false;
  return true;
}

SignStatus from_sign(int s, const std::string& cert) {
  SignStatus st;
  st.kind = s > 0 ? Sign::PSD : Sign::NSD;
  st.certificate = cert;
  return st;
}

template <class S, int N>
SignStatus structural_exact(const Poly<S, N>& p) {
  SignStatus st;
  if (p.is_zero()) {
    st.kind = Sign::Zero;
    st.certificate = "zero polynomial";
    return st;
  }
  int common = 0;
  bool even_terms = true;
  for (const auto& [e, c] : p.terms()) {
    if (!all_exponents_even<S, N>(e)) {
      even_terms = false;
      break;
    }
    int s = sgn(c);
    if (common == 0) common = s;
    if (s != common) {
      even_terms = false;
      break;
    }
  }
  if (even_terms) return from_sign(common, p.size() == 1 ? "even monomial" : "even monomials of one sign");
  if constexpr (N == 2) {
    int common_part = 0;
    bool ok = true;
    std::string cert;
    for (int d = 0; d <= p.degree() && ok; ++d) {
      Poly2<S> part = p.homogeneous_part(d);
      if (part.is_zero()) continue;
      int s = 0;
      if (d % 2 == 1) {
        ok = false;
        break;
      }
      if (d == 0) {
        s = sgn(part.coeff({0, 0}));
      } else if (d == 2) {
        S a = part.coeff({2, 0}), b = part.coeff({1, 1}), c = part.coeff({0, 2});
        S disc = S(4) * a * c - b * b;
        if (sgn(disc) < 0) {
          ok = false;
          break;
        }
        s = sgn(a) != 0 ? sgn(a) : sgn(c);
      } else {
        if constexpr (is_exact_v<S>) s = binary_form_sign(part, d);
        else s = binary_form_sign(exactify(part), d);
      }
      if (s == 0 || (common_part != 0 && s != common_part)) {
        ok = false;
        break;
      }
      common_part = s;
    }
    if (ok && common_part != 0)
      return from_sign(common_part, p.is_homogeneous() ? "semidefinite form" : "sum of semidefinite forms");
  }
  st.kind = Sign::Unknown;
  return st;
}

template <class S>
bool confirm_sign(const Poly2<S>& p, const Eigen::Vector2d& w, int want) {
  if constexpr (is_exact_v<S>) {
    std::array<QuadSurd, 2> x{QuadSurd(Rational(w(0))), QuadSurd(Rational(w(1)))};
    return sgn(p.template eval<QuadSurd>(x)) == want;
  } else {
    std::array<double, 2> x{w(0), w(1)};
    return sgn(p.template eval<double>(x)) == want;
  }
}

template <class S>
SignStatus sample_sign(const Poly2<S>& p) {
  SignStatus st;
  const Poly2<double> pd = p.to_double_poly();
  const double scale = coeff_scale(pd);
  const double thresh = 1e-12 * scale;
  std::optional<Eigen::Vector2d> pos, neg;
  double best_pos = thresh, best_neg = -thresh;
  auto consider = [&](const Eigen::Vector2d& w) {
    double v = pd.eval<double>({w(0), w(1)});
    if (v > best_pos) {
      best_pos = v;
      pos = w;
    }
    if (v < best_neg) {
      best_neg = v;
      neg = w;
    }
  };
  const int n = 201;
  const double G = 10.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) consider({-G + 2 * G * i / (n - 1), -G + 2 * G * j / (n - 1)});
  // leading form at infinity
  if (!(pos && neg) && pd.degree() > 0) {
    Poly2<double> lead = pd.homogeneous_part(pd.degree());
    for (int k = 0; k < 720 && !(pos && neg); ++k) {
      double t = 2 * std::numbers::pi * k / 720;
      Eigen::Vector2d dir(std::cos(t), std::sin(t));
      double l = lead.eval<double>({dir(0), dir(1)});
      if (std::fabs(l) <= thresh) continue;
      for (double r = 1e1; r <= 1e6; r *= 10) {
        Eigen::Vector2d w = r * dir;
        double v = pd.eval<double>({w(0), w(1)});
        if (sgn(v) == sgn(l)) {
          if (l > 0 && !pos) pos = w;
          if (l < 0 && !neg) neg = w;
          break;
        }
      }
    }
  }
  if (pos && neg && confirm_sign(p, *pos, 1) && confirm_sign(p, *neg, -1)) {
    st.kind = Sign::Indefinite;
    st.witnesses = std::make_pair(*pos, *neg);
    st.certificate = "opposite-sign samples";
  } else {
    st.kind = Sign::Unknown;
    st.certificate = "no sign change found by sampling";
  }
  return st;
}

std::vector<double> real_roots(std::vector<double> c) {
  while (!c.empty() && std::fabs(c.back()) <= 1e-14 * (1 + std::fabs(c.front()))) c.pop_back();
  std::vector<double> out;
  if (c.size() < 2) return out;
  Eigen::VectorXd coeffs(static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) coeffs(static_cast<Eigen::Index>(i)) = c[i];
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(coeffs);
  solver.realRoots(out, 1e-8);
  return out;
}

}  // namespace

template <class S, int N>
SignStatus sign_structural(const Poly<S, N>& p) {
  if constexpr (is_exact_v<S>) {
    return structural_exact(p);
  } else {
    return structural_exact(chop(p, 1e-12));
  }
}

template <class S>
SignStatus sign_definiteness(const Poly2<S>& p) {
  SignStatus st = sign_structural(p);
  if (st.kind != Sign::Unknown) return st;
  return sample_sign(p);
}

template <class S>
SignStatus sign_on_curve(const Poly2<S>& g, const Poly2<S>& k) {
  SignStatus st;
  const Poly2<double> gd = g.to_double_poly(), kd = k.to_double_poly();
  const double thresh = 1e-9 * coeff_scale(gd);
  std::optional<Eigen::Vector2d> pos, neg;
  int samples = 0;
  const int n = 401;
  const double G = 10.0;
  for (int axis = 0; axis < 2; ++axis) {
    const int free = 1 - axis;
    const int deg = std::max(0, kd.degree_in(free));
    for (int i = 0; i < n; ++i) {
      const double fixed = -G + 2 * G * i / (n - 1);
      std::vector<double> c(static_cast<std::size_t>(deg) + 1, 0.0);
      for (const auto& [e, v] : kd.terms()) c[e[free]] += v * std::pow(fixed, e[axis]);
      for (double r : real_roots(c)) {
        Eigen::Vector2d w;
        w(axis) = fixed;
        w(free) = r;
        double val = gd.eval<double>({w(0), w(1)});
        ++samples;
        if (val > thresh && !pos) pos = w;
        if (val < -thresh && !neg) neg = w;
      }
    }
  }
  if (pos && neg) {
    st.kind = Sign::Indefinite;
    st.witnesses = std::make_pair(*pos, *neg);
    st.certificate = "opposite signs at sampled curve points";
  } else {
    st.kind = Sign::Unknown;
    st.certificate = samples ? "one sign on " + std::to_string(samples) + " curve samples"
                             : "no real curve points sampled";
  }
  return st;
}

namespace {

template <class S>
Poly2<S> pu() { return Poly2<S>::var(0); }
template <class S>
Poly2<S> pv() { return Poly2<S>::var(1); }

// quadratic part semidefinite, linear part zero, positive constant
template <class S>
bool positive_quadratic(const Poly2<S>& f, double tol) {
  if (f.degree() > 2) return false;
  if (!poly_negligible(f.homogeneous_part(1), tol)) return false;
  if (sgn(f.coeff({0, 0})) <= 0) return false;
  Poly2<S> q = f.homogeneous_part(2);
  if (q.is_zero()) return true;
  return sign_structural(q).kind == Sign::PSD;
}

template <class S>
void transversal_test(NoCyclesVerdict<S>& v, const Poly2<S>& Fu, const Poly2<S>& Fv, const Poly2<S>& K,
                      Criterion crit, char letter) {
  v.transversal_poly = chop(Fu * K.derivative(0) + Fv * K.derivative(1), 1e-13);
  SignStatus st = sign_structural(v.transversal_poly);
  if (st.kind == Sign::Unknown) st = sign_on_curve(v.transversal_poly, K);
  v.transversal_status = st;
  v.criterion = crit;
  v.letter = letter;
  v.witness = v.transversal_poly;
  v.status = st;
  if (st.semidefinite()) v.conclusion = Conclusion::NoPeriodicOrbits;
}

template <class S>
double field_scale(const HomVectorField<S>& X) {
  double s = 0;
  for (const auto& c : X.c) s = std::max(s, coeff_scale(c));
  return s;
}

}  // namespace

template <class S>
NoCyclesVerdict<S> nocycles_stereo(const HomVectorField<S>& X) {
  if (!is_tangent(X)) throw NotTangent("field is not tangent");
  const int n = X.degree();
  const double tol = 1e-10 * field_scale(X);
  const Poly2<S> u = pu<S>(), v = pv<S>();
  const std::array<Poly2<S>, 3> img{u * S(2), v * S(2), u * u + v * v - Poly2<S>(S(1))};
  const Poly2<S> Pt = X.P().template substitute<2>(img);
  const Poly2<S> Qt = X.Q().template substitute<2>(img);
  const Poly2<S> Rt = chop(X.R().template substitute<2>(img), 1e-13);

  NoCyclesVerdict<S> out;
  out.f = u * u + v * v + Poly2<S>(S(1));
  out.f_positive = positive_quadratic(out.f, tol);
  const Poly2<S> Pb = Pt + u * Rt, Qb = Qt + v * Rt;
  out.cofactor_identity =
      poly_negligible(Pb * out.f.derivative(0) + Qb * out.f.derivative(1) - Rt * out.f, tol);

  Vec3<S> north(S(0), S(0), S(1));
  Vec3<S> at_north = X.eval(north);
  bool north_singular = true;
  for (int i = 0; i < 3; ++i) north_singular = north_singular && small(at_north(i), tol);
  const std::string side = "no periodic orbit through (0,0,1)";
  if (north_singular) out.discharged.push_back(side + ": (0,0,1) is singular");
  else if (n % 2 == 0) out.discharged.push_back(side + ": even degree");
  else out.assumptions.push_back(side);

  out.sign_poly = Rt;
  out.sign_status = sign_definiteness(Rt);
  out.criterion = Criterion::StereoSign;
  out.letter = 'a';
  out.witness = Rt;
  out.status = out.sign_status;
  if (out.sign_status.semidefinite()) {
    out.conclusion = Conclusion::NoPeriodicOrbits;
    return out;
  }
  if (out.sign_status.kind == Sign::Zero) return out;
  transversal_test(out, Pt, Qt, Rt, Criterion::StereoTransversal, 'b');
  return out;
}

template <class S>
NoCyclesVerdict<S> nocycles_central(const HomVectorField<S>& X, const Vec3<S>& n, ChartBranch branch) {
  if (!is_tangent(X)) throw NotTangent("field is not tangent");
  const double tol = 1e-10 * field_scale(X);
  const S a = n(0), b = n(1), c = n(2);
  if (!small(S(a * a + b * b + c * c - S(1)), 1e-12))
    throw PreconditionViolated("plane normal must be a unit vector");
  if (branch == ChartBranch::Auto) {
    if (!is_zero(c)) branch = ChartBranch::C;
    else if (!is_zero(a)) branch = ChartBranch::A;
    else branch = ChartBranch::B;
  }
  const S pivot = branch == ChartBranch::C ? c : branch == ChartBranch::A ? a : b;
  if (small(pivot, 1e-14)) throw BranchCoordinateZero("branch coordinate of the plane normal is zero");

  const Poly2<S> u = pu<S>(), v = pv<S>(), one(S(1));
  std::array<Poly2<S>, 3> img;
  int i = 0, j = 1, idx = 1;
  char sign_letter = 'a';
  switch (branch) {
    case ChartBranch::C:
      img = {u + one * a, v + one * b, one * c - (u * a + v * b) * (S(1) / c)};
      i = 0, j = 1, idx = 1, sign_letter = 'a';
      break;
    case ChartBranch::A:
      img = {one * a - (u * b + v * c) * (S(1) / a), u + one * b, v + one * c};
      i = 1, j = 2, idx = 2, sign_letter = 'c';
      break;
    default:
      img = {u + one * a, one * b - (u * a + v * c) * (S(1) / b), v + one * c};
      i = 0, j = 2, idx = 3, sign_letter = 'e';
      break;
  }
  std::array<Poly2<S>, 3> Ft;
  for (int k = 0; k < 3; ++k) Ft[k] = X.c[k].template substitute<2>(img);
  const Poly2<S> Kt = chop(Ft[0] * a + Ft[1] * b + Ft[2] * c, 1e-13);

  NoCyclesVerdict<S> out;
  out.branch = idx;
  out.f = img[0] * img[0] + img[1] * img[1] + img[2] * img[2];
  out.f_positive = positive_quadratic(out.f, tol);
  const Poly2<S> Xb1 = Ft[i] - img[i] * Kt, Xb2 = Ft[j] - img[j] * Kt;
  out.cofactor_identity = poly_negligible(
      Xb1 * out.f.derivative(0) + Xb2 * out.f.derivative(1) + Kt * out.f * S(2), tol);
  out.assumptions.push_back("no periodic orbit meets the great circle of the plane");

  out.sign_poly = Kt;
  out.sign_status = sign_definiteness(Kt);
  out.criterion = Criterion::CentralSign;
  out.letter = sign_letter;
  out.witness = Kt;
  out.status = out.sign_status;
  if (out.sign_status.semidefinite()) {
    out.conclusion = Conclusion::NoPeriodicOrbits;
    return out;
  }
  if (out.sign_status.kind == Sign::Zero) return out;
  transversal_test(out, Ft[i], Ft[j], Kt, Criterion::CentralTransversal, static_cast<char>(sign_letter + 1));
  return out;
}

template <class S>
TangencyCount tangency_count(const HomVectorField<S>& X, const Vec3<S>& n) {
  const int deg = X.degree();
  TangencyCount out;
  out.bound = 2 * deg;
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::fabs(to_double(n(i))) < std::fabs(to_double(n(k)))) k = i;
  Vec3<S> axis(S(0), S(0), S(0));
  axis(k) = S(1);
  const Vec3<S> e1 = n.cross(axis);
  const Vec3<S> e2 = n.cross(e1);
  if (small(S(e1.dot(e1)), 1e-28)) throw PreconditionViolated("zero plane normal");
  const Poly3<S> K = X.P() * n(0) + X.Q() * n(1) + X.R() * n(2);
  // (1+tau^2)^n K(cos t e1 + sin t e2) with tau = tan(t/2)
  using P1 = Poly<S, 1>;
  const P1 tau = P1::var(0), one(S(1));
  std::array<P1, 3> img;
  for (int i = 0; i < 3; ++i) img[i] = (one - tau * tau) * e1(i) + tau * e2(i) * S(2);
  P1 h = K.template substitute<1>(img);
  const double tol = 1e-10 * field_scale(X) * std::max(1.0, to_double(S(e1.dot(e1))));
  std::vector<S> coeffs(static_cast<std::size_t>(std::max(0, h.degree())) + 1, S(0));
  for (const auto& [e, c] : h.terms()) coeffs[e[0]] = c;
  UPoly<S> hp(coeffs);
  hp.trim(tol);
  if (hp.is_zero()) {
    out.invariant = true;
    return out;
  }
  if constexpr (is_exact_v<S>) {
    out.count = count_real_roots(hp);
  } else {
    // normalized Sturm sequence in floating point is unreliable; count isolated real roots
    std::vector<double> c(hp.c.begin(), hp.c.end());
    std::vector<double> r = real_roots(c);
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end(), [](double x, double y) { return std::fabs(x - y) < 1e-7; }), r.end());
    out.count = static_cast<int>(r.size());
  }
  const S at_pi = K.template eval<S>({e1(0), e1(1), e1(2)});
  if (small(at_pi, tol)) out.count += 1;
  return out;
}

// ---------------------------------------------------------------------------------------
// reduction of saddle configurations

template <class S>
int reduction_case(const QuadCoeffs<S>& q, double tol) {
  auto z = [&](const S& x) { return small(x, tol); };
  const S a1 = q(1), a2 = q(2), a4 = q(4), a5 = q(5), a7 = q(7), a8 = q(8);
  const S br = a2 * a2 * a4 - a1 * a2 * (a5 + a7) + a1 * a1 * a8;
  if (z(a4)) {
    if (!z(a1)) return z(S(a2 * (a5 + a7) - a1 * a8)) ? 5 : 2;
    return z(a2) ? 4 : 3;
  }
  if (z(a8)) return 8;
  if (!z(br)) return 1;
  return z(a1) ? 6 : 7;
}

template <class S>
bool family_constraints_hold(ReductionTarget t, const QuadCoeffs<S>& q, double tol) {
  auto z = [&](const S& x) { return small(x, tol); };
  if (!z(q(3)) || !z(q(6)) || !z(q(4))) return false;
  const S sad = q(5) * q(7);  // -a5 a7 < 0
  if (z(sad) || sgn(sad) < 0) return false;
  switch (t) {
    case ReductionTarget::Family142:
      return !z(q(1)) && !z(S(q(2) * (q(5) + q(7)) - q(1) * q(8)));
    case ReductionTarget::Family143:
      return z(q(1)) && z(q(2));
    case ReductionTarget::Family144:
      return !z(q(1)) && z(S(q(8) * q(1) - q(2) * (q(5) + q(7))));
    default:
      return false;
  }
}

namespace {

template <class S>
Mat3<S> planar(const S& a, const S& b, const S& d, const S& e) {
  Mat3<S> M;
  M << a, b, S(0), d, e, S(0), S(0), S(0), S(1);
  return M;
}

template <class S>
Mat3<S> case_matrix(int cs, const QuadCoeffs<S>& q, std::map<std::string, double>& consts, double tol) {
  const S a1 = q(1), a2 = q(2), a4 = q(4), a5 = q(5), a7 = q(7), a8 = q(8);
  const S s57 = a5 + a7;
  switch (cs) {
    case 1: {
      const S al = s57 * s57 - S(4) * a4 * a8;
      const S s = s57 + sqrt_scalar(al);
      const S N = sqrt_scalar(S(s * s + S(4) * a8 * a8));
      return planar<S>(-S(2) * a8 / N, s / N, s / N, S(2) * a8 / N);
    }
    case 3: {
      const S D = sqrt_scalar(S(s57 * s57 + a8 * a8));
      return planar<S>(-a8 / D, s57 / D, s57 / D, a8 / D);
    }
    case 6: {
      if (!small(s57, tol)) {
        const S al = s57 * s57 - S(4) * a4 * a8;
        const S sigma = s57 * s57 * al;
        const S ss = sqrt_scalar(sigma);
        const S delta = s57 * s57 + (a4 - a8) * (a4 - a8);
        const S beta = s57 * s57 + S(2) * a4 * (a4 - a8) - ss;
        const S gamma = s57 * s57 * (a5 * a5 + a7 * a7 - S(2) * a4 * a8) + (a7 * a7 - a5 * a5) * ss;
        consts["delta"] = to_double(delta);
        consts["sigma"] = to_double(sigma);
        consts["beta"] = to_double(beta);
        consts["gamma"] = to_double(gamma);
        const S rdb = sqrt_scalar(S(delta * beta * gamma));
        const S A = (s57 * s57 * (a4 + a8) + (a4 - a8) * ss) / (s57 * sqrt_scalar(S(S(2) * delta * beta)));
        const S B = (s57 * (a5 * s57 * s57 - a4 * (a8 * (S(3) * a5 + a7) + a4 * (a7 - a5))) -
                     (a4 * (a4 - a8) + a5 * s57) * ss) / rdb;
        const S D = -sqrt_scalar(beta) / sqrt_scalar(S(S(2) * delta));
        const S E = (s57 * (a4 * (S(2) * a8 * (a4 - a8) - a7 * s57) + a5 * a8 * s57) - (a7 * a4 + a5 * a8) * ss) / rdb;
        return planar<S>(A, B, D, E);
      }
      const S r1 = sqrt_scalar(S(a8 * a8 - a4 * a8));
      const S r2 = sqrt_scalar(S(a4 * a4 - a4 * a8));
      const S inner = sqrt_scalar(S(-(a4 - a8) * (a4 - a8) * a4 * a8));
      const S W = abs_scalar(S(a5 * (a4 - a8) + inner));
      return planar<S>(r1 / (a4 - a8), (a4 * r1 + a5 * r2) / W, r2 / (a4 - a8), (a8 * r2 - a5 * r1) / W);
    }
    case 7: {
      const S m = a2 * a4 - a1 * s57;
      const S D = sqrt_scalar(S(m * m + a1 * a1 * a4 * a4));
      return planar<S>(m / D, a4 * a1 / D, a4 * a1 / D, -m / D);
    }
    case 8:
      return planar<S>(S(0), S(1), S(1), S(0));
    default:
      return Mat3<S>::Identity();
  }
}

template <class S>
QuadCoeffs<S> read_coeffs(const HomVectorField<S>& X) {
  if constexpr (is_exact_v<S>) {
    return to_quad_normal_form(X);
  } else {
    QuadCoeffs<S> q;
    q(1) = X.c[0].coeff({1, 1, 0});
    q(2) = X.c[0].coeff({0, 2, 0});
    q(3) = X.c[0].coeff({0, 0, 2});
    q(4) = X.c[0].coeff({1, 0, 1});
    q(5) = X.c[0].coeff({0, 1, 1});
    q(6) = X.c[1].coeff({0, 0, 2});
    q(7) = X.c[1].coeff({1, 0, 1});
    q(8) = X.c[1].coeff({0, 1, 1});
    double scale = 0;
    for (double v : q.a) scale = std::max(scale, std::fabs(v));
    for (double& v : q.a)
      if (std::fabs(v) < 1e-12 * scale) v = 0;
    return q;
  }
}

template <class S>
struct Attempt {
  ReductionTarget target = ReductionTarget::DegenerateCase;
  std::vector<int> path;
  Mat3<S> rotation = Mat3<S>::Identity();
  QuadCoeffs<S> reduced;
  std::map<std::string, double> consts;
};

template <class S>
Attempt<S> reduce_in(const QuadCoeffs<S>& q0, double tol) {
  Attempt<S> at;
  QuadCoeffs<S> q = q0;
  for (int step = 0; step < 5; ++step) {
    const int cs = reduction_case(q, tol);
    at.path.push_back(cs);
    if (cs == 2 || cs == 4 || cs == 5) {
      at.target = cs == 2 ? ReductionTarget::Family142
                 : cs == 4 ? ReductionTarget::Family143
                           : ReductionTarget::Family144;
      break;
    }
    const Mat3<S> M = case_matrix(cs, q, at.consts, tol);
    at.rotation = (at.rotation * M).eval();
    q = read_coeffs(rotate(expand_quad(q), M));
  }
  at.reduced = q;
  return at;
}

void check_scope(const QuadCoeffs<double>& q) {
  double scale = 0;
  for (double v : q.a) scale = std::max(scale, std::fabs(v));
  const double tol = 1e-12 * std::max(1.0, scale);
  if (std::fabs(q(3)) > tol || std::fabs(q(6)) > tol) throw NotInScope("(0,0,-1) is not a singularity");
  if (!(q(4) * q(8) - q(5) * q(7) < -tol * std::max(1.0, scale)))
    throw NotInScope("(0,0,-1) is not a saddle");
}

}  // namespace

ReductionResult case_reduce(const QuadCoeffs<double>& q) {
  check_scope(q);
  double scale = 0;
  for (double v : q.a) scale = std::max(scale, std::fabs(v));
  const double tol = 1e-10 * std::max(1.0, scale);
  Attempt<double> at = reduce_in(q, tol);
  ReductionResult out;
  out.target = at.target;
  out.path = at.path;
  out.rotation = at.rotation;
  out.reduced = at.reduced;
  out.constants = at.consts;
  out.exact = false;
  out.constraints_hold = is_orthogonal(at.rotation, 1e-9) &&
                         family_constraints_hold(at.target, at.reduced, 1e-8 * std::max(1.0, scale));
  return out;
}

ReductionResult case_reduce(const QuadCoeffs<QuadSurd>& q) {
  if (!is_zero(q(3)) || !is_zero(q(6))) throw NotInScope("(0,0,-1) is not a singularity");
  if (sgn(q(4) * q(8) - q(5) * q(7)) >= 0) throw NotInScope("(0,0,-1) is not a saddle");
  try {
    Attempt<QuadSurd> at = reduce_in(q, 0.0);
    ReductionResult out;
    out.target = at.target;
    out.path = at.path;
    out.exact = true;
    out.rotation_exact = at.rotation;
    out.reduced_exact = at.reduced;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out.rotation(i, j) = at.rotation(i, j).to_double();
    out.reduced = at.reduced.to_double();
    out.constants = at.consts;
    out.constraints_hold = is_orthogonal(at.rotation) && family_constraints_hold(at.target, at.reduced, 0.0);
    return out;
  } catch (const NotRepresentable&) {
  } catch (const MixedRadicand&) {
  }
  ReductionResult out = case_reduce(q.to_double());
  out.note = "matrix entries leave a single quadratic extension; reduced in floating point";
  return out;
}

// ---------------------------------------------------------------------------------------
// portraits

namespace {

struct PointInfo {
  const SingularityReport* r;
  std::string kind;  // local type, with centers and weak foci split out
};

bool orthogonal_dirs(const SingularityReport& p, const SingularityReport& q) {
  if (p.direction && q.direction) return is_zero(p.direction->dot(*q.direction));
  return std::fabs(p.point.dot(q.point)) < 1e-9;
}

}  // namespace

template <class S>
PortraitClass portrait_classify(const HomVectorField<S>& X) {
  if (!is_tangent(X)) throw NotTangent("field is not tangent");
  if (X.degree() != 2) throw NotDegreeTwo("portraits are classified for degree two");
  const SingularSet set = enumerate_singularities(X);
  PortraitClass out;
  out.exact = set.exact;
  if (set.kind == SingularSet::Kind::Everywhere) throw PreconditionViolated("zero field");
  if (set.kind == SingularSet::Kind::Circle) {
    out.singular_points = -1;
    switch (set.axis) {
      case SingularSet::Axis::Parallel: out.label = PortraitLabel::Fig2b_SingularCircle; break;
      case SingularSet::Axis::InPlane: out.label = PortraitLabel::Fig3_LinearlyZero; break;
      case SingularSet::Axis::Oblique: out.label = PortraitLabel::Fig2a_SingularCircle; break;
    }
    out.notes.push_back("circle of singular points; X = l(x) (w x x)");
    return out;
  }
  std::vector<PointInfo> pts;
  for (const auto& r : set.points) {
    std::string kind = local_type_name(r.type);
    if (r.type == LocalType::NonDegenerateNonHyperbolic) kind = r.w_sign == 0 ? "center" : "weak-focus";
    pts.push_back({&r, kind});
    out.type_counts[kind] += 1;
  }
  out.singular_points = static_cast<int>(pts.size());
  auto count = [&](const std::string& k) {
    auto it = out.type_counts.find(k);
    return it == out.type_counts.end() ? 0 : it->second;
  };
  auto first_of = [&](const std::string& k) -> const SingularityReport* {
    for (const auto& p : pts)
      if (p.kind == k) return p.r;
    return nullptr;
  };
  auto others_orthogonal_to = [&](const SingularityReport* p) {
    for (const auto& o : pts) {
      if (o.r->point.isApprox(p->point, 1e-9) || o.r->point.isApprox(-p->point, 1e-9)) continue;
      if (!orthogonal_dirs(*p, *o.r)) return false;
    }
    return true;
  };
  const std::string lz = local_type_name(LocalType::LinearlyZero);
  const std::string nil = local_type_name(LocalType::Nilpotent);
  const std::string semi = local_type_name(LocalType::SemiHyperbolic);
  const std::string saddle = local_type_name(LocalType::Saddle);
  const std::string node = local_type_name(LocalType::Node);
  const std::string focus = local_type_name(LocalType::Focus);

  if (count(lz) > 0) {
    out.label = PortraitLabel::Fig3_LinearlyZero;
    return out;
  }
  if (const auto* p = first_of(nil)) {
    out.label = others_orthogonal_to(p) ? PortraitLabel::Fig32_NilpotentCuspA2Zero : PortraitLabel::Fig31_NilpotentCusp;
    out.notes.push_back("no limit cycles");
    return out;
  }
  if (count("center") > 0) {
    const int c = count("center"), s = count(saddle);
    if (c == 4 && s == 2) {
      bool mutual = true;
      for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
          if (!pts[i].r->point.isApprox(-pts[j].r->point, 1e-9) && !orthogonal_dirs(*pts[i].r, *pts[j].r))
            mutual = false;
      out.label = mutual ? PortraitLabel::Fig35_TripleCenterPair : PortraitLabel::Fig33a;
    } else if (c == 2 && s == 2 && count(node) == 2) {
      out.label = PortraitLabel::Fig33b;
    } else if (c == 2 && s == 2 && count(focus) == 2) {
      out.label = PortraitLabel::Fig33c_CenterFoci;
    } else {
      out.label = PortraitLabel::ModuloLimitCycles;
      out.modulo_limit_cycles = true;
      out.notes.push_back("center present in an unlisted configuration");
    }
    return out;
  }
  if (const auto* p = first_of(semi)) {
    if (pts.size() == 2) out.label = PortraitLabel::Fig37_TwoSingularities;
    else out.label = others_orthogonal_to(p) ? PortraitLabel::Fig38_SaddleNodesFoci : PortraitLabel::Fig36_SaddleNodes;
    out.notes.push_back("separatrix connection variant not resolved");
    return out;
  }
  out.modulo_limit_cycles = true;
  if (pts.size() == 6 && count(saddle) == 2) {
    out.label = PortraitLabel::Fig41_Nondegenerate;
    out.subtype = "saddle+4";
  } else if (pts.size() == 2) {
    out.label = PortraitLabel::Fig41_Nondegenerate;
    out.subtype = "2-singularities";
  } else {
    out.label = PortraitLabel::ModuloLimitCycles;
  }
  return out;
}

// ---------------------------------------------------------------------------------------
// rotated families and integrating factors

template <class S>
RotatedFamilyReport<S> rotated_family_check(const Poly3<S>& P, const Poly3<S>& Q) {
  using P4 = Poly<S, 4>;
  const P4 u = P4::var(0), v = P4::var(1), p1 = P4::var(2), p2 = P4::var(3);
  const std::array<P4, 3> at1{u, v, p1}, at2{u, v, p2};
  RotatedFamilyReport<S> out;
  out.determinant = chop(P.template substitute<4>(at1) * Q.template substitute<4>(at2) -
                             Q.template substitute<4>(at1) * P.template substitute<4>(at2),
                         1e-13);
  if (out.determinant.is_zero()) {
    out.kind = RotatedKind::NotRotated;
    out.status.kind = Sign::Zero;
    out.note = "determinant vanishes identically";
    return out;
  }
  // divide by (p2 - p1) as a polynomial in p2: q_{k-1} = d_k + p1 q_k
  const int top = out.determinant.degree_in(3);
  std::vector<P4> d(static_cast<std::size_t>(top) + 1);
  for (const auto& [e, c] : out.determinant.terms()) {
    auto f = e;
    f[3] = 0;
    d[e[3]].add_term(f, c);
  }
  std::vector<P4> qk(static_cast<std::size_t>(std::max(top, 1)));
  P4 carry;
  for (int k = top; k >= 1; --k) {
    carry = d[k] + p1 * carry;
    qk[k - 1] = carry;
  }
  const P4 rem = chop(d[0] + p1 * carry, 1e-13);
  P4 res;
  for (int k = 0; k < top; ++k) res += qk[k] * p2.pow(k);
  out.residual = chop(res, 1e-13);
  if (!rem.is_zero()) {
    out.kind = RotatedKind::Inconclusive;
    out.note = "determinant is not divisible by p2 - p1";
    return out;
  }
  if (out.residual.degree_in(2) <= 0 && out.residual.degree_in(3) <= 0) {
    Poly2<S> f;
    for (const auto& [e, c] : out.residual.terms()) f.add_term({e[0], e[1]}, c);
    out.factor = f;
    out.status = sign_definiteness(f);
  } else {
    out.status = sign_structural(out.residual);
  }
  if (out.status.semidefinite()) {
    out.kind = RotatedKind::Rotated;
    out.sign = out.status.kind == Sign::PSD ? 1 : -1;
  } else if (out.status.kind == Sign::Indefinite) {
    out.kind = RotatedKind::NotRotated;
    out.note = "residual factor changes sign";
  } else {
    out.kind = RotatedKind::Inconclusive;
    out.note = "residual sign not certified";
  }
  return out;
}

template <class S>
bool inverse_integrating_factor_check(const PlanarSystem<S>& sys, const Poly2<S>& V, double tol) {
  const Poly2<S> lhs = sys.P * V.derivative(0) + sys.Q * V.derivative(1);
  const Poly2<S> rhs = (sys.P.derivative(0) + sys.Q.derivative(1)) * V;
  double scale = std::max(coeff_scale(lhs), coeff_scale(rhs));
  return poly_negligible(lhs - rhs, tol * scale);
}

template <class S>
std::pair<Poly3<S>, Poly3<S>> free_coefficient_family(const S& a1, const S& a5, const S& a7) {
  if (sgn(a1) == 0) throw PreconditionViolated("free_coefficient_family: a1 = 0");
  using P3 = Poly3<S>;
  const P3 u = P3::var(0), v = P3::var(1), a2 = P3::var(2);
  const S k = (a5 + a7) / a1;
  P3 P = v * (-a5) + u * v * a1 + a2 * v * v - u * u * v * (a5 + a7) - a2 * u * v * v * k;
  P3 Q = u * (-a7) - a2 * v * k - u * u * a1 - a2 * u * v - u * v * v * (a5 + a7) - a2 * v * v * v * k;
  return {P, Q};
}

template <class S>
FreeCoefficientVerdict<S> free_coefficient_verdict(const S& a1, const S& a5, const S& a7) {
  FreeCoefficientVerdict<S> out;
  const auto [P, Q] = free_coefficient_family(a1, a5, a7);
  out.rotated = rotated_family_check(P, Q);
  Poly2<S> P0, Q0, P0r, Q0r;
  for (const auto& [e, c] : P.terms()) {
    if (e[2] != 0) continue;
    P0.add_term({e[0], e[1]}, c);
    P0r.add_term({e[0], e[1]}, e[1] % 2 ? -c : c);
  }
  for (const auto& [e, c] : Q.terms()) {
    if (e[2] != 0) continue;
    Q0.add_term({e[0], e[1]}, c);
    Q0r.add_term({e[0], e[1]}, e[1] % 2 ? -c : c);
  }
  out.reversible_at_zero = P0r == -P0 && Q0r == Q0;
  const std::array<S, 2> w{-a7 / a1, S(0)};
  const bool singular = sgn(P0.template eval<S>(w)) == 0 && sgn(Q0.template eval<S>(w)) == 0;
  const S pu = P0.derivative(0).template eval<S>(w), pv = P0.derivative(1).template eval<S>(w);
  const S qu = Q0.derivative(0).template eval<S>(w), qv = Q0.derivative(1).template eval<S>(w);
  out.center_at_zero = out.reversible_at_zero && singular && sgn(pu + qv) == 0 && sgn(pu * qv - pv * qu) > 0;
  out.no_limit_cycles = out.rotated.kind == RotatedKind::Rotated && out.center_at_zero;
  if (out.no_limit_cycles)
    out.conclusion = "no limit cycles";
  else if (out.rotated.kind != RotatedKind::Rotated)
    out.conclusion = "not a rotated family";
  else
    out.conclusion = "no centre at a2 = 0";
  return out;
}

#define SPHEREFLOW_INSTANTIATE(S)                                                                   \
  template SignStatus sign_structural(const Poly<S, 2>&);                                           \
  template SignStatus sign_structural(const Poly<S, 4>&);                                           \
  template SignStatus sign_definiteness(const Poly2<S>&);                                           \
  template SignStatus sign_on_curve(const Poly2<S>&, const Poly2<S>&);                              \
  template NoCyclesVerdict<S> nocycles_stereo(const HomVectorField<S>&);                            \
  template NoCyclesVerdict<S> nocycles_central(const HomVectorField<S>&, const Vec3<S>&, ChartBranch); \
  template TangencyCount tangency_count(const HomVectorField<S>&, const Vec3<S>&);                 \
  template int reduction_case(const QuadCoeffs<S>&, double);                                        \
  template bool family_constraints_hold(ReductionTarget, const QuadCoeffs<S>&, double);             \
  template PortraitClass portrait_classify(const HomVectorField<S>&);                               \
  template RotatedFamilyReport<S> rotated_family_check(const Poly3<S>&, const Poly3<S>&);           \
  template bool inverse_integrating_factor_check(const PlanarSystem<S>&, const Poly2<S>&, double);   \
  template std::pair<Poly3<S>, Poly3<S>> free_coefficient_family(const S&, const S&, const S&);      \
  template FreeCoefficientVerdict<S> free_coefficient_verdict(const S&, const S&, const S&);

SPHEREFLOW_INSTANTIATE(QuadSurd)
SPHEREFLOW_INSTANTIATE(double)

}  // namespace sphereflow
