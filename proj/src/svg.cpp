#include "sphereflow/cli.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace sphereflow {

namespace {

struct Canvas {
  double c, R;
  Eigen::Vector2d map(const Eigen::Vector3d& x) const {
    // southern hemisphere seen from below: (x, y) -> screen, y axis up
    const Eigen::Vector3d p = x(2) > 0 ? Eigen::Vector3d(-x) : x;
    return {c + R * p(0), c - R * p(1)};
  }
};

std::string num(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  std::string s = os.str();
  return s == "-0.00" ? "0.00" : s;
}

// One path; a new subpath starts where the antipodal switch makes the image jump.
std::string path_of(const Canvas& cv, const std::vector<Eigen::Vector3d>& pts) {
  std::ostringstream d;
  bool pen = false;
  Eigen::Vector2d last;
  for (const auto& x : pts) {
    const Eigen::Vector2d s = cv.map(x);
    if (!pen || (s - last).norm() > 0.25 * cv.R)
      d << (d.tellp() > 0 ? " M" : "M") << num(s(0)) << ',' << num(s(1));
    else
      d << " L" << num(s(0)) << ',' << num(s(1));
    pen = true;
    last = s;
  }
  return d.str();
}

bool equator_invariant(const HomVectorField<double>& X) {
  for (const auto& [e, v] : X.R().terms())
    if (e[2] == 0 && std::fabs(v) > 1e-12) return false;
  return true;
}

std::string glyph(const Canvas& cv, const SingularityReport& r) {
  const Eigen::Vector2d s = cv.map(r.point);
  const std::string x = num(s(0)), y = num(s(1));
  std::ostringstream g;
  const std::string kind = local_type_name(r.type);
  g << "<g class=\"singularity\" data-type=\"" << kind << "\">";
  switch (r.type) {
    case LocalType::Saddle:
      g << "<line x1=\"" << num(s(0) - 5) << "\" y1=\"" << num(s(1) - 5) << "\" x2=\"" << num(s(0) + 5) << "\" y2=\""
        << num(s(1) + 5) << "\" stroke=\"black\" stroke-width=\"2\"/><line x1=\"" << num(s(0) - 5) << "\" y1=\""
        << num(s(1) + 5) << "\" x2=\"" << num(s(0) + 5) << "\" y2=\"" << num(s(1) - 5)
        << "\" stroke=\"black\" stroke-width=\"2\"/>";
      break;
    case LocalType::Node:
      g << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"4.5\" fill=\"black\"/>";
      break;
    case LocalType::Focus:
      g << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"5\" fill=\"white\" stroke=\"black\" stroke-width=\"1.5\"/>"
        << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"2\" fill=\"black\"/>";
      break;
    case LocalType::NonDegenerateNonHyperbolic:
      g << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"5\" fill=\"white\" stroke=\"black\" stroke-width=\"1.5\"/>";
      break;
    case LocalType::SemiHyperbolic:
      g << "<path d=\"M" << num(s(0)) << ',' << num(s(1) - 6) << " L" << num(s(0) + 5.5) << ',' << num(s(1) + 4)
        << " L" << num(s(0) - 5.5) << ',' << num(s(1) + 4) << " Z\" fill=\"gray\" stroke=\"black\"/>";
      break;
    case LocalType::Nilpotent:
      g << "<rect x=\"" << num(s(0) - 4.5) << "\" y=\"" << num(s(1) - 4.5)
        << "\" width=\"9\" height=\"9\" fill=\"white\" stroke=\"black\" stroke-width=\"1.5\"/>";
      break;
    case LocalType::LinearlyZero:
      g << "<path d=\"M" << num(s(0)) << ',' << num(s(1) - 6) << " L" << num(s(0) + 6) << ',' << num(s(1)) << " L"
        << num(s(0)) << ',' << num(s(1) + 6) << " L" << num(s(0) - 6) << ',' << num(s(1))
        << " Z\" fill=\"white\" stroke=\"black\" stroke-width=\"1.5\"/>";
      break;
  }
  g << "</g>\n";
  return g.str();
}

std::vector<Eigen::Vector3d> orbit(const HomVectorField<double>& X, const Eigen::Vector3d& x0, double T) {
  IntegratorOptions io;
  io.tol = 1e-8;
  io.hmax = 0.05;
  io.max_steps = 200000;
  std::vector<Eigen::Vector3d> pts;
  try {
    Trajectory tr = integrate_sphere(X, x0, T, io);
    pts = tr.x;
  } catch (const Error&) {
  }
  return pts;
}

}  // namespace

std::string portrait_svg(const HomVectorField<double>& X, const SingularSet& set, const std::string& title,
                         const SvgOptions& opt) {
  const double size = opt.size;
  Canvas cv{size / 2, size / 2 - 20};
  const bool inv = equator_invariant(X);
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.size << "\" height=\"" << opt.size
    << "\" viewBox=\"0 0 " << opt.size << ' ' << opt.size << "\">\n";
  s << "<title>" << title << "</title>\n";
  s << "<metadata>Poincare disc: orthogonal projection of the hemisphere z &lt;= 0; points with z &gt; 0 are "
       "drawn through their antipode (time reversed for even degree). Equator "
    << (inv ? "invariant" : "not invariant") << ".</metadata>\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // background orbits from a fixed grid of starting points
  int drawn = 0;
  for (int k = 0; k < opt.background_orbits; ++k) {
    const double rad = 0.25 + 0.6 * (k / 4) / 2.0;
    const double ang = M_PI / 4 + (k % 4) * M_PI / 2 + 0.3 * (k / 4);
    const double px = rad * std::cos(ang), py = rad * std::sin(ang);
    const Eigen::Vector3d x0(px, py, -std::sqrt(std::max(0.0, 1 - px * px - py * py)));
    std::vector<Eigen::Vector3d> back = orbit(X, x0, -opt.orbit_time), fwd = orbit(X, x0, opt.orbit_time);
    std::vector<Eigen::Vector3d> pts(back.rbegin(), back.rend());
    if (!fwd.empty()) pts.insert(pts.end(), fwd.begin() + 1, fwd.end());
    if (pts.empty()) pts.push_back(x0);
    s << "<path class=\"orbit\" d=\"" << path_of(cv, pts) << "\" fill=\"none\" stroke=\"#b0b0b0\" stroke-width=\"0.8\"/>\n";
    ++drawn;
  }

  // separatrices of saddles, one representative per antipodal pair
  if (set.kind == SingularSet::Kind::Finite) {
    const SphereRhs f = compile(X);
    std::vector<Eigen::Vector3d> done;
    for (const auto& r : set.points) {
      if (r.type != LocalType::Saddle) continue;
      bool seen = false;
      for (const auto& d : done) seen = seen || (d + r.point).norm() < 1e-9 || (d - r.point).norm() < 1e-9;
      if (seen) continue;
      done.push_back(r.point);
      const Eigen::Vector3d p = r.point;
      Eigen::Vector3d e1 = p.unitOrthogonal(), e2 = p.cross(e1);
      Eigen::Matrix<double, 3, 2> B;
      B << e1, e2;
      const Eigen::Matrix2d M = B.transpose() * f.jacobian(p) * B;
      Eigen::EigenSolver<Eigen::Matrix2d> es(M);
      for (int k = 0; k < 2; ++k) {
        const double lam = es.eigenvalues()(k).real();
        const Eigen::Vector3d dir = B * es.eigenvectors().col(k).real().normalized();
        for (double sg : {1.0, -1.0}) {
          const Eigen::Vector3d x0 = (p + sg * opt.separatrix_offset * dir).normalized();
          std::vector<Eigen::Vector3d> pts = orbit(X, x0, lam > 0 ? 3 * opt.orbit_time : -3 * opt.orbit_time);
          pts.insert(pts.begin(), p);
          s << "<path class=\"separatrix\" data-kind=\"" << (lam > 0 ? "unstable" : "stable") << "\" d=\""
            << path_of(cv, pts) << "\" fill=\"none\" stroke=\"" << (lam > 0 ? "#c0392b" : "#2c6fbb")
            << "\" stroke-width=\"1.3\"/>\n";
        }
      }
    }
  } else if (set.kind == SingularSet::Kind::Circle) {
    const Eigen::Vector3d n = set.circle_normal.normalized();
    const Eigen::Vector3d e1 = n.unitOrthogonal(), e2 = n.cross(e1);
    std::vector<Eigen::Vector3d> pts;
    for (int k = 0; k <= 360; ++k) pts.push_back(std::cos(k * M_PI / 180) * e1 + std::sin(k * M_PI / 180) * e2);
    s << "<path class=\"singular-circle\" d=\"" << path_of(cv, pts)
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"2.5\"/>\n";
  }

  // disc boundary: solid when the equator is invariant, dotted otherwise
  s << "<circle class=\"boundary\" cx=\"" << num(cv.c) << "\" cy=\"" << num(cv.c) << "\" r=\"" << num(cv.R)
    << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"" << (inv ? "" : " stroke-dasharray=\"1.5,4\"")
    << "/>\n";
  for (const auto& r : set.points)
    if (r.point(2) <= 1e-12 || set.points.size() == 0) s << glyph(cv, r);
  s << "</svg>\n";
  (void)drawn;
  return s.str();
}

std::string hopf_svg(const HopfReport& rep) {
  const double W = 640, H = 400, L = 60, Rm = 20, T = 30, Bm = 50;
  double lo = 0, hi = 1, ymin = 0, ymax = 0;
  if (!rep.samples.empty()) {
    lo = rep.samples.front().param;
    hi = rep.samples.back().param;
  }
  for (const auto& s : rep.samples)
    for (const auto& f : s.foci)
      if (f.position.allFinite()) {
        ymin = std::min(ymin, f.re);
        ymax = std::max(ymax, f.re);
      }
  if (ymax - ymin < 1e-12) {
    ymin -= 1;
    ymax += 1;
  }
  const double pad = 0.08 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  if (hi <= lo) hi = lo + 1;
  auto X = [&](double p) { return L + (W - L - Rm) * (p - lo) / (hi - lo); };
  auto Y = [&](double v) { return T + (H - T - Bm) * (ymax - v) / (ymax - ymin); };
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\">\n";
  s << "<title>Hopf scan over " << rep.parameter << "</title>\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<line x1=\"" << num(L) << "\" y1=\"" << num(Y(0)) << "\" x2=\"" << num(W - Rm) << "\" y2=\"" << num(Y(0))
    << "\" stroke=\"black\" stroke-dasharray=\"3,3\"/>\n";
  s << "<rect x=\"" << num(L) << "\" y=\"" << num(T) << "\" width=\"" << num(W - L - Rm) << "\" height=\""
    << num(H - T - Bm) << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<text x=\"" << num(W / 2) << "\" y=\"" << num(H - 12) << "\" text-anchor=\"middle\" font-size=\"13\">"
    << rep.parameter << " [" << lo << ", " << hi << "]</text>\n";
  s << "<text x=\"14\" y=\"" << num(H / 2) << "\" font-size=\"13\" transform=\"rotate(-90 14 " << num(H / 2)
    << ")\" text-anchor=\"middle\">Re lambda</text>\n";
  const char* colour[2] = {"#c0392b", "#2c6fbb"};
  for (int k = 0; k < 2; ++k) {
    std::ostringstream d;
    bool pen = false;
    for (const auto& smp : rep.samples) {
      const auto& f = smp.foci[k];
      if (!f.position.allFinite()) {
        pen = false;
        continue;
      }
      d << (pen ? " L" : (d.tellp() > 0 ? " M" : "M")) << num(X(smp.param)) << ',' << num(Y(f.re));
      pen = true;
    }
    s << "<path class=\"focus\" data-focus=\"" << k << "\" d=\"" << d.str() << "\" fill=\"none\" stroke=\""
      << colour[k] << "\" stroke-width=\"1.5\"/>\n";
  }
  for (const auto& smp : rep.samples)
    if (!smp.cycles.empty())
      s << "<circle class=\"cycle\" cx=\"" << num(X(smp.param)) << "\" cy=\"" << num(Y(smp.foci[0].re))
        << "\" r=\"4\" fill=\"none\" stroke=\"black\"/>\n";
  for (const auto& ev : rep.events)
    s << "<line class=\"hopf-event\" x1=\"" << num(X(ev.param)) << "\" y1=\"" << num(T) << "\" x2=\"" << num(X(ev.param))
      << "\" y2=\"" << num(H - Bm) << "\" stroke=\"green\"/>\n";
  for (const auto& ev : rep.separatrix_events) {
    const double m = 0.5 * (ev.param_lo + ev.param_hi);
    s << "<line class=\"separatrix-event\" x1=\"" << num(X(m)) << "\" y1=\"" << num(T) << "\" x2=\"" << num(X(m))
      << "\" y2=\"" << num(H - Bm) << "\" stroke=\"purple\" stroke-dasharray=\"4,2\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace sphereflow
