#include "sphereflow/cli.hpp"

#include "sphereflow/local.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace sphereflow {

using nlohmann::json;

namespace {

QuadSurd read_coefficient(const json& c) {
  try {
    if (c.is_string()) return QuadSurd(parse_rational(c.get<std::string>()));
    if (c.is_number()) return QuadSurd(parse_rational(c.dump()));
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad coefficient ") + c.dump() + ": " + e.what());
  }
  throw ParseError("coefficient must be a number or a string: " + c.dump());
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

std::vector<QuadSurd> coefficient_list(const json& j) {
  if (!j.contains("coefficients")) throw ParseError("no \"coefficients\" key");
  const json& a = j.at("coefficients");
  if (!a.is_array() || a.size() != 8) throw ParseError("\"coefficients\" must list a1..a8");
  std::vector<QuadSurd> out;
  for (const auto& c : a) out.push_back(read_coefficient(c));
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << text;
}

json jvec(const Eigen::Vector3d& v) { return json::array({v(0), v(1), v(2)}); }
json jvec(const Eigen::Vector2d& v) { return json::array({v(0), v(1)}); }
json jcomplex(const std::complex<double>& z) { return json::array({z.real(), z.imag()}); }

json jexact(const Vec3<QuadSurd>& v) { return json::array({v(0).str(), v(1).str(), v(2).str()}); }

template <class S>
json jcoeffs(const QuadCoeffs<S>& q) {
  json a = json::array();
  for (int i = 0; i < 8; ++i) {
    if constexpr (std::is_same_v<S, double>)
      a.push_back(q.a[i]);
    else
      a.push_back(q.a[i].str());
  }
  return a;
}

Eigen::Vector3d parse_triple(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(to_double(parse_rational(item)));
  if (v.size() != 3) throw ParseError("expected three comma separated numbers: " + s);
  return {v[0], v[1], v[2]};
}

Vec3<QuadSurd> parse_triple_exact(const std::string& s) {
  std::vector<QuadSurd> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) v.emplace_back(parse_rational(item));
  if (v.size() != 3) throw ParseError("expected three comma separated numbers: " + s);
  return {v[0], v[1], v[2]};
}

void require_quadratic(const HomVectorField<QuadSurd>& X) {
  if (!is_tangent(X)) throw NotTangent("field is not tangent to the sphere");
  if (X.degree() != 2) throw NotDegreeTwo("field has degree " + std::to_string(X.degree()));
}

// Normal-form coefficients with the singular point p moved to (0,0,-1).
std::optional<std::pair<QuadCoeffs<QuadSurd>, bool>> local_coefficients(const HomVectorField<QuadSurd>& X,
                                                                        const SingularityReport& r) {
  if (r.direction) {
    try {
      const Vec3<QuadSurd>& d = *r.direction;
      const QuadSurd len = (d(0) * d(0) + d(1) * d(1) + d(2) * d(2)).sqrt();
      const Vec3<QuadSurd> p(d(0) / len, d(1) / len, d(2) / len);
      return std::make_pair(to_quad_normal_form(move_singularity_to_south_pole(X, p).field), true);
    } catch (const std::exception&) {
    }
  }
  try {
    const HomVectorField<double> Y = move_singularity_to_south_pole(X.to_double(), r.point).field;
    double scale = 0;
    for (const auto& comp : Y.c)
      for (const auto& [e, v] : comp.terms()) scale = std::max(scale, std::fabs(v));
    HomVectorField<QuadSurd> Z;
    for (int i = 0; i < 3; ++i)
      for (const auto& [e, v] : Y.c[i].terms())
        if (std::fabs(v) > 1e-10 * scale) Z.c[i] += Poly3<QuadSurd>::monomial(e, QuadSurd(Rational(v)));
    return std::make_pair(to_quad_normal_form(Z), false);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

json point_verdict(const HomVectorField<QuadSurd>& X, const SingularityReport& r) {
  json v;
  switch (r.type) {
    case LocalType::Saddle:
      v["verdict"] = "saddle";
      break;
    case LocalType::Node:
    case LocalType::Focus:
      v["verdict"] = std::string(r.trace < 0 ? "stable " : "unstable ") + local_type_name(r.type);
      break;
    case LocalType::NonDegenerateNonHyperbolic:
      v["verdict"] = r.w_sign == 0 ? "center" : r.w_sign > 0 ? "stable weak focus" : "unstable weak focus";
      break;
    case LocalType::LinearlyZero:
      v["verdict"] = "linearly zero";
      break;
    case LocalType::SemiHyperbolic:
    case LocalType::Nilpotent: {
      auto lc = local_coefficients(X, r);
      if (!lc) {
        v["verdict"] = "unresolved";
        break;
      }
      try {
        if (lc->second) {
          auto s = r.type == LocalType::Nilpotent ? nilpotent_classify(lc->first)
                                                  : semi_hyperbolic_classify(south_pole_system(lc->first));
          v["verdict"] = series_verdict_name(s.verdict);
          v["certified"] = s.certified;
        } else {
          const QuadCoeffs<double> qd = lc->first.to_double();
          SeriesOptions so;
          so.tol = 1e-8;
          auto s = r.type == LocalType::Nilpotent ? nilpotent_classify(qd, so)
                                                  : semi_hyperbolic_classify(south_pole_system(qd), so);
          v["verdict"] = series_verdict_name(s.verdict);
          v["certified"] = false;
        }
        v["local_exact"] = lc->second;
      } catch (const std::exception& e) {
        v["verdict"] = "unresolved";
        v["reason"] = e.what();
      }
      break;
    }
  }
  return v;
}

const char* kind_name(SingularSet::Kind k) {
  switch (k) {
    case SingularSet::Kind::Finite: return "finite";
    case SingularSet::Kind::Circle: return "circle";
    case SingularSet::Kind::Everywhere: return "everywhere";
  }
  return "?";
}

json singular_json(const HomVectorField<QuadSurd>& X, const SingularSet& set, bool verdicts) {
  json j;
  j["kind"] = kind_name(set.kind);
  j["exact"] = set.exact;
  if (set.kind == SingularSet::Kind::Circle) {
    j["circle_normal"] = jvec(set.circle_normal);
    if (set.circle_normal_exact) j["circle_normal_exact"] = jexact(*set.circle_normal_exact);
  }
  json pts = json::array();
  for (const auto& r : set.points) {
    json p;
    p["point"] = jvec(r.point);
    if (r.direction) p["direction"] = jexact(*r.direction);
    p["type"] = local_type_name(r.type);
    p["trace"] = r.trace;
    p["det"] = r.det;
    p["eigenvalues"] = json::array({jcomplex(r.eig[0]), jcomplex(r.eig[1])});
    p["exact"] = r.exact;
    if (r.type == LocalType::NonDegenerateNonHyperbolic) p["w_sign"] = r.w_sign;
    if (verdicts) p.update(point_verdict(X, r));
    pts.push_back(p);
  }
  j["points"] = pts;
  j["count"] = set.kind == SingularSet::Kind::Finite ? static_cast<int>(set.points.size()) : -1;
  return j;
}

// Cross-check against Newton refinement from a grid; returns false on disagreement.
bool oracle_agrees(const HomVectorField<double>& Xd, const SingularSet& set, const RunConfig& cfg, json& out) {
  const auto brute = brute_force_singularities(Xd, cfg.oracle_grid, cfg.dedupe_tol);
  out["grid"] = cfg.oracle_grid;
  out["found"] = static_cast<int>(brute.size());
  bool ok = true;
  if (set.kind == SingularSet::Kind::Finite) {
    // every enumerated point must be found; the grid may miss nothing the enumeration lacks
    for (const auto& b : brute) {
      bool hit = false;
      for (const auto& r : set.points) hit = hit || (b - r.point).norm() < 1e-5;
      ok = ok && hit;
    }
    int matched = 0;
    for (const auto& r : set.points) {
      bool hit = false;
      for (const auto& b : brute) hit = hit || (b - r.point).norm() < 1e-5;
      matched += hit;
    }
    out["matched"] = matched;
    // a degenerate point attracts Newton slowly; only missing hyperbolic points count as a mismatch
    for (const auto& r : set.points) {
      if (!is_hyperbolic(r.type)) continue;
      bool hit = false;
      for (const auto& b : brute) hit = hit || (b - r.point).norm() < 1e-5;
      ok = ok && hit;
    }
  } else if (set.kind == SingularSet::Kind::Circle) {
    const Eigen::Vector3d n = set.circle_normal.normalized();
    for (const auto& b : brute) {
      const bool on = std::fabs(n.dot(b)) < 1e-5;
      bool isolated = false;
      for (const auto& r : set.points) isolated = isolated || (b - r.point).norm() < 1e-5;
      ok = ok && (on || isolated);
    }
  }
  out["agrees"] = ok;
  return ok;
}

json verdict_json(const NoCyclesVerdict<QuadSurd>& v) {
  json j;
  j["criterion"] = criterion_name(v.criterion);
  j["statement"] = std::string(1, v.letter);
  if (v.conclusion == Conclusion::Inconclusive)
    j["conclusion"] = "inconclusive";
  else
    j["conclusion"] = v.assumptions.empty() ? "no periodic orbits" : "no periodic orbits, given the assumptions";
  j["witness"] = poly_to_string(v.witness, {"u", "v"});
  j["sign"] = sign_name(v.status.kind);
  j["certificate"] = v.status.certificate;
  j["assumptions"] = v.assumptions;
  j["discharged"] = v.discharged;
  if (v.criterion == Criterion::CentralSign || v.criterion == Criterion::CentralTransversal) j["branch"] = v.branch;
  return j;
}

json nocycles_all(const HomVectorField<QuadSurd>& X) {
  json out = json::array();
  try {
    out.push_back(verdict_json(nocycles_stereo(X)));
  } catch (const Error& e) {
    out.push_back({{"criterion", "stereo"}, {"error", e.what()}});
  }
  const char* names[3] = {"x = 0", "y = 0", "z = 0"};
  for (int k = 0; k < 3; ++k) {
    Vec3<QuadSurd> n(QuadSurd(0), QuadSurd(0), QuadSurd(0));
    n(k) = QuadSurd(1);
    try {
      json v = verdict_json(nocycles_central(X, n));
      v["circle"] = names[k];
      out.push_back(v);
    } catch (const Error& e) {
      out.push_back({{"criterion", "central"}, {"circle", names[k]}, {"error", e.what()}});
    }
  }
  return out;
}

json cycle_json(const CycleEstimate& c) {
  return {{"r", c.r},
          {"point", jvec(c.point)},
          {"period", c.period},
          {"slope", c.slope},
          {"residual", c.residual},
          {"stability", cycle_stability_name(c.stability)},
          {"anchor", jvec(c.section.anchor)},
          {"direction", jvec(c.section.direction)}};
}

json hopf_json(const HopfReport& rep) {
  json j;
  j["parameter"] = rep.parameter;
  j["hopf_possible"] = rep.hopf_possible;
  if (!rep.note.empty()) j["note"] = rep.note;
  json samples = json::array();
  for (const auto& s : rep.samples) {
    json js;
    js["param"] = s.param;
    js["coefficients"] = jcoeffs(s.coeffs);
    json foci = json::array();
    for (const auto& f : s.foci) {
      json jf{{"position", jvec(f.position)},
              {"eigenvalues", json::array({jcomplex(f.eig[0]), jcomplex(f.eig[1])})},
              {"re", f.re},
              {"focus", f.focus},
              {"mu", f.mu}};
      if (f.closed_form) jf["closed_form"] = json::array({jcomplex((*f.closed_form)[0]), jcomplex((*f.closed_form)[1])});
      foci.push_back(jf);
    }
    js["foci"] = foci;
    json cyc = json::array();
    for (const auto& c : s.cycles) cyc.push_back(cycle_json(c));
    js["cycles"] = cyc;
    js["separatrix_side"] = s.separatrix_side;
    samples.push_back(js);
  }
  j["samples"] = samples;
  json events = json::array();
  for (const auto& e : rep.events) {
    json je{{"focus", e.focus},
            {"param", e.param},
            {"mu", e.mu},
            {"eigenvalues", json::array({jcomplex(e.eig[0]), jcomplex(e.eig[1])})},
            {"derivative", e.derivative},
            {"other_focus_weak", e.other_focus_weak}};
    if (e.focus == 0) {
      je["derivative_closed"] = e.derivative_closed;
      je["derivative_normalized"] = e.derivative_normalized;
    }
    if (e.weak_focus_stable) je["weak_focus"] = *e.weak_focus_stable ? "stable" : "unstable";
    if (e.V1) je["V1"] = *e.V1;
    events.push_back(je);
  }
  j["hopf_events"] = events;
  json sep = json::array();
  for (const auto& e : rep.separatrix_events)
    sep.push_back({{"param_lo", e.param_lo}, {"param_hi", e.param_hi}, {"side_lo", e.side_lo}, {"side_hi", e.side_hi}});
  j["separatrix_events"] = sep;
  int with_cycles = 0;
  for (const auto& s : rep.samples) with_cycles += !s.cycles.empty();
  j["samples_with_cycles"] = with_cycles;
  return j;
}

void emit(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

// ---- commands ----

int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto X = parse_field_json(read_file(cfg.input));
  json j;
  j["command"] = "check";
  const bool tangent = is_tangent(X);
  j["tangent"] = tangent;
  int degree = -1;
  try {
    degree = X.degree();
  } catch (const DegreeMismatch&) {
  }
  j["degree"] = degree;
  if (tangent && degree == 2) {
    const auto q = to_quad_normal_form(X);
    j["normal_form"] = jcoeffs(q);
    j["normal_form_double"] = jcoeffs(q.to_double());
  }
  emit(out, j);
  if (!tangent) {
    err << "error: field is not tangent to the sphere\n";
    return ExitPrecondition;
  }
  if (degree < 0) {
    err << "error: components have different degrees\n";
    return ExitPrecondition;
  }
  return ExitOk;
}

int cmd_singularities(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto X = parse_field_json(read_file(cfg.input));
  require_quadratic(X);
  SingularOptions so;
  so.eig_tol = cfg.eig_tol;
  const SingularSet set = enumerate_singularities(X, so);
  json j;
  j["command"] = "singularities";
  j["singularities"] = singular_json(X, set, false);
  j["bound"] = singularity_bound(2);
  json oracle;
  const bool ok = set.kind == SingularSet::Kind::Everywhere || oracle_agrees(X.to_double(), set, cfg, oracle);
  j["oracle"] = oracle;
  emit(out, j);
  if (!ok) {
    err << "error: oracle disagrees with the enumeration\n";
    return ExitInternal;
  }
  return ExitOk;
}

int cmd_classify(const RunConfig& cfg, const std::string& svg_path, std::ostream& out, std::ostream& err) {
  const auto X = parse_field_json(read_file(cfg.input));
  require_quadratic(X);
  SingularOptions so;
  so.eig_tol = cfg.eig_tol;
  const SingularSet set = enumerate_singularities(X, so);
  const PortraitClass pc = portrait_classify(X);
  json j;
  j["command"] = "classify";
  j["normal_form"] = jcoeffs(to_quad_normal_form(X));
  j["singularities"] = singular_json(X, set, true);
  json jp;
  jp["label"] = portrait_label_name(pc.label);
  if (!pc.subtype.empty()) jp["subtype"] = pc.subtype;
  jp["modulo_limit_cycles"] = pc.modulo_limit_cycles;
  jp["singular_points"] = pc.singular_points;
  jp["type_counts"] = pc.type_counts;
  jp["exact"] = pc.exact;
  jp["notes"] = pc.notes;
  j["portrait"] = jp;
  j["nocycles"] = nocycles_all(X);
  json oracle;
  const bool ok = set.kind == SingularSet::Kind::Everywhere || oracle_agrees(X.to_double(), set, cfg, oracle);
  j["oracle"] = oracle;
  if (!svg_path.empty()) {
    write_file(svg_path, portrait_svg(X.to_double(), set, portrait_label_name(pc.label)));
    j["svg"] = svg_path;
  }
  emit(out, j);
  if (!ok) {
    err << "error: oracle disagrees with the enumeration\n";
    return ExitInternal;
  }
  return ExitOk;
}

int cmd_nocycles(const RunConfig& cfg, const std::string& plane, std::ostream& out) {
  const auto X = parse_field_json(read_file(cfg.input));
  if (!is_tangent(X)) throw NotTangent("field is not tangent to the sphere");
  json j;
  j["command"] = "nocycles";
  if (plane.empty()) {
    j["verdict"] = verdict_json(nocycles_stereo(X));
  } else {
    const Vec3<QuadSurd> n = parse_triple_exact(plane);
    j["plane"] = jexact(n);
    j["verdict"] = verdict_json(nocycles_central(X, n));
    const TangencyCount tc = tangency_count(X, n);
    j["tangency"] = {{"invariant", tc.invariant}, {"count", tc.count}, {"bound", tc.bound}};
  }
  emit(out, j);
  return ExitOk;
}

int cmd_hopf(const RunConfig& cfg, const std::string& param, const std::string& range, const std::string& svg_path,
             std::ostream& out) {
  const QuadCoeffs<double> base = parse_coefficients_json(read_file(cfg.input)).to_double();
  if (param.size() != 2 || param[0] != 'a' || param[1] < '1' || param[1] > '8')
    throw ParseError("--param must be one of a1..a8");
  const int k = param[1] - '0';
  std::vector<std::string> parts;
  std::stringstream ss(range);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw ParseError("--range must be lo:hi:n");
  const double lo = to_double(parse_rational(parts[0])), hi = to_double(parse_rational(parts[1]));
  int n = 0;
  try {
    n = std::stoi(parts[2]);
  } catch (const std::exception&) {
    throw ParseError("--range sample count is not an integer");
  }
  if (n < 2 || !(hi > lo)) throw ParseError("--range needs lo < hi and n >= 2");
  HopfOptions opt;
  opt.ret.integ.tol = cfg.integrate_tol;
  // a base field on a8 = a2 (a5 + a7) / a1 keeps that relation along the scan
  const bool centre = base(1) != 0 && base(3) == 0 && base(4) == 0 && base(6) == 0 &&
                      std::fabs(base(2) * (base(5) + base(7)) - base(1) * base(8)) <= 1e-12 * (1 + std::fabs(base(8)));
  auto family = [base, k, centre](double p) {
    QuadCoeffs<double> q = base;
    q(k) = p;
    if (centre && k != 8) q(8) = q(2) * (q(5) + q(7)) / q(1);
    if (centre && k == 8 && q(5) + q(7) != 0) q(2) = q(1) * q(8) / (q(5) + q(7));
    return q;
  };
  const HopfReport rep = hopf_scan(family, param, lo, hi, n, opt);
  json j = hopf_json(rep);
  j["command"] = "hopf";
  j["range"] = {lo, hi, n};
  if (centre) j["constraint"] = "a8 = a2 (a5 + a7) / a1 held along the scan";
  if (!rep.hopf_possible) j["conclusion"] = "no Hopf bifurcation";
  if (!svg_path.empty()) {
    write_file(svg_path, hopf_svg(rep));
    j["svg"] = svg_path;
  }
  emit(out, j);
  return ExitOk;
}

// Random rational with numerator in [-4, 4] and denominator in [1, 4].
Rational draw(std::mt19937& g) {
  std::uniform_int_distribution<int> num(-4, 4), den(1, 4);
  const int p = num(g);
  return Rational(p) / Rational(den(g));
}

int cmd_conjecture(const RunConfig& cfg, int samples, std::ostream& out) {
  if (samples < 0) throw PreconditionViolated("--samples must be nonnegative");
  std::mt19937 g(cfg.seed);
  std::vector<QuadCoeffs<QuadSurd>> qs;
  while (static_cast<int>(qs.size()) < samples) {
    QuadCoeffs<QuadSurd> q;
    for (int i : {1, 2, 5, 7, 8}) q(i) = QuadSurd(draw(g));
    if (q(1).is_zero() || (q(5) * q(7)).sign() <= 0) continue;
    if ((q(2) * (q(5) + q(7)) - q(1) * q(8)).is_zero()) continue;
    qs.push_back(q);
  }

  struct Outcome {
    json record;
    json detections = json::array();
    bool rotated = false;
    int points = 0, rays = 0;
  };
  std::vector<Outcome> res(qs.size());
  parallel_for(static_cast<int>(qs.size()), [&](int i) {
    const auto& q = qs[i];
    Outcome& o = res[i];
    o.record["index"] = i;
    o.record["coefficients"] = jcoeffs(q);
    // the a8 = a2 (a5 + a7) / a1 analog, with a2 free
    const auto verdict = free_coefficient_verdict(q(1), q(5), q(7));
    o.rotated = verdict.rotated.kind == RotatedKind::Rotated;
    o.record["analog_rotated"] = o.rotated;
    o.record["analog_sign"] = verdict.rotated.sign;
    o.record["analog_conclusion"] = verdict.conclusion;

    SweepOptions so;
    so.eig_tol = cfg.eig_tol;
    so.ret.integ.tol = cfg.integrate_tol;
    so.ret.t_max = 200;
    for (const auto& h : cycle_sweep(expand_quad(q.to_double()), so, &o.points)) {
      json det = cycle_json(h.cycle);
      det["sample"] = i;
      det["coefficients"] = jcoeffs(q);
      det["seed"] = cfg.seed;
      det["singular_point"] = jvec(h.singular_point);
      det["chart_base"] = jvec(h.chart.base);
      det["chart"] = "stereographic";
      det["sphere_point"] = jvec(h.sphere_point);
      o.detections.push_back(det);
    }
    o.rays = o.points * so.rays;
    o.record["swept_points"] = o.points;
  });

  json j;
  j["command"] = "conjecture";
  j["family"] = "a3 = a4 = a6 = 0, a1 != 0, a5 a7 > 0, a2 (a5 + a7) - a1 a8 != 0";
  j["samples"] = samples;
  j["seed"] = cfg.seed;
  json detections = json::array(), instances = json::array();
  int rotated = 0, points = 0, rays = 0;
  for (auto& o : res) {
    rotated += o.rotated;
    points += o.points;
    rays += o.rays;
    instances.push_back(o.record);
    for (auto& d : o.detections) detections.push_back(d);
  }
  j["analogs_rotated"] = rotated;
  j["swept_points"] = points;
  j["swept_rays"] = rays;
  j["detections"] = detections;
  j["detection_count"] = static_cast<int>(detections.size());
  j["instances"] = instances;
  emit(out, j);
  return ExitOk;
}

int cmd_integrate(const RunConfig& cfg, const std::string& from, double T, std::ostream& out) {
  const auto X = parse_field_json(read_file(cfg.input));
  if (!is_tangent(X)) throw NotTangent("field is not tangent to the sphere");
  const Eigen::Vector3d x0 = parse_triple(from);
  if (std::fabs(x0.norm() - 1) > 1e-9) throw PreconditionViolated("--from must be a unit vector");
  IntegratorOptions io;
  io.tol = cfg.integrate_tol;
  const Trajectory tr = integrate_sphere(X.to_double(), x0.normalized(), T, io);
  if (cfg.format == OutputFormat::Json) {
    json j;
    j["command"] = "integrate";
    j["t"] = tr.t;
    json xs = json::array();
    for (const auto& x : tr.x) xs.push_back(jvec(x));
    j["x"] = xs;
    j["max_norm_drift"] = tr.max_norm_drift();
    j["steps"] = tr.stats.accepted;
    emit(out, j);
  } else {
    out << tr.to_csv();
  }
  return ExitOk;
}

}  // namespace

HomVectorField<QuadSurd> parse_field_json(const std::string& text) {
  const json j = parse_json(text);
  if (!j.is_object()) throw ParseError("field file must be a JSON object");
  if (j.contains("coefficients")) {
    const auto c = coefficient_list(j);
    QuadCoeffs<QuadSurd> q;
    for (int i = 0; i < 8; ++i) q.a[i] = c[i];
    return expand_quad(q);
  }
  if (!j.contains("components")) throw ParseError("expected \"coefficients\" or \"components\"");
  const json& comps = j.at("components");
  if (!comps.is_array() || comps.size() != 3) throw ParseError("\"components\" must hold P, Q and R");
  HomVectorField<QuadSurd> X;
  for (int i = 0; i < 3; ++i) {
    if (!comps[i].is_array()) throw ParseError("each component is a list of [coefficient, i, j, k]");
    for (const auto& t : comps[i]) {
      if (!t.is_array() || t.size() != 4) throw ParseError("term must be [coefficient, i, j, k]: " + t.dump());
      std::array<int, 3> e{};
      for (int k = 0; k < 3; ++k) {
        if (!t[k + 1].is_number_integer() || t[k + 1].get<int>() < 0)
          throw ParseError("exponent must be a nonnegative integer: " + t.dump());
        e[k] = t[k + 1].get<int>();
      }
      X.c[i] += Poly3<QuadSurd>::monomial(e, read_coefficient(t[0]));
    }
  }
  return X;
}

QuadCoeffs<QuadSurd> parse_coefficients_json(const std::string& text) {
  const json j = parse_json(text);
  if (!j.is_object()) throw ParseError("field file must be a JSON object");
  if (j.contains("coefficients")) {
    const auto c = coefficient_list(j);
    QuadCoeffs<QuadSurd> q;
    for (int i = 0; i < 8; ++i) q.a[i] = c[i];
    return q;
  }
  const auto X = parse_field_json(text);
  require_quadratic(X);
  return to_quad_normal_form(X);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Homogeneous quadratic vector fields on the sphere", "sphereflow"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig cfg;
  std::string fmt = "json";
  app.add_option("--eig-tol", cfg.eig_tol, "eigenvalue tolerance")->check(CLI::PositiveNumber);
  app.add_option("--tol", cfg.integrate_tol, "integration tolerance")->check(CLI::PositiveNumber);
  app.add_option("--dedupe-tol", cfg.dedupe_tol, "oracle deduplication tolerance")->check(CLI::PositiveNumber);
  app.add_option("--grid", cfg.oracle_grid, "oracle grid size")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--format", fmt, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  std::string svg_path, plane, param = "a8", range, from;
  int samples = 100;
  double T = 10;

  auto* check = app.add_subcommand("check", "tangency, degree and normal form");
  check->add_option("file", cfg.input)->required();
  auto* classify = app.add_subcommand("classify", "singular points, portrait label, nonexistence verdicts");
  classify->add_option("file", cfg.input)->required();
  classify->add_option("--svg", svg_path, "write the Poincare disc portrait");
  auto* sing = app.add_subcommand("singularities", "singular points with the oracle cross-check");
  sing->add_option("file", cfg.input)->required();
  auto* noc = app.add_subcommand("nocycles", "nonexistence of periodic orbits");
  noc->add_option("file", cfg.input)->required();
  noc->add_option("--plane", plane, "great circle a x + b y + c z = 0 as a,b,c");
  auto* hopf = app.add_subcommand("hopf", "eigenvalue and limit cycle scan");
  hopf->add_option("file", cfg.input)->required();
  hopf->add_option("--param", param, "a1..a8")->required();
  hopf->add_option("--range", range, "lo:hi:n")->required();
  hopf->add_option("--svg", svg_path, "write the bifurcation diagram");
  auto* conj = app.add_subcommand("conjecture", "random search for limit cycles");
  conj->add_option("--samples", samples, "number of random fields");
  auto* integ = app.add_subcommand("integrate", "trajectory on the sphere");
  integ->add_option("file", cfg.input)->required();
  integ->add_option("--from", from, "x,y,z")->required();
  integ->add_option("--t", T, "final time (may be negative)")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return ExitParse;
  }
  cfg.format = fmt == "csv" ? OutputFormat::Csv : OutputFormat::Json;

  try {
    if (*check) return cmd_check(cfg, out, err);
    if (*classify) return cmd_classify(cfg, svg_path, out, err);
    if (*sing) return cmd_singularities(cfg, out, err);
    if (*noc) return cmd_nocycles(cfg, plane, out);
    if (*hopf) return cmd_hopf(cfg, param, range, svg_path, out);
    if (*conj) return cmd_conjecture(cfg, samples, out);
    if (*integ) {
      if (fmt == "json" && !app.get_option("--format")->count()) cfg.format = OutputFormat::Csv;
      return cmd_integrate(cfg, from, T, out);
    }
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return ExitParse;
  } catch (const NotTangent& e) {
    err << "precondition: " << e.what() << '\n';
    return ExitPrecondition;
  } catch (const PreconditionViolated& e) {
    err << "precondition: " << e.what() << '\n';
    return ExitPrecondition;
  } catch (const NotDegreeTwo& e) {
    err << "precondition: " << e.what() << '\n';
    return ExitPrecondition;
  } catch (const DegreeMismatch& e) {
    err << "precondition: " << e.what() << '\n';
    return ExitPrecondition;
  } catch (const BranchCoordinateZero& e) {
    err << "precondition: " << e.what() << '\n';
    return ExitPrecondition;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return ExitInternal;
  }
  return ExitInternal;
}

}  // namespace sphereflow
