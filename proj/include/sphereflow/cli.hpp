#pragma once
// Command-line front end: field files, JSON reports, SVG portraits.

#include "sphereflow/global.hpp"
#include "sphereflow/numerics.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace sphereflow {

enum class OutputFormat { Json, Svg, Csv };

struct RunConfig {
  std::string command;
  std::string input;
  double eig_tol = 1e-9;
  double integrate_tol = 1e-10;
  double dedupe_tol = 1e-7;
  int oracle_grid = 24;
  OutputFormat format = OutputFormat::Json;
  unsigned seed = 0;
};

/// Exit codes of the front end.
enum ExitCode { ExitOk = 0, ExitParse = 1, ExitPrecondition = 2, ExitInternal = 3 };

/// {"coefficients": [a1..a8]} or {"components": [P, Q, R]} with each component a list of
/// [coefficient, i, j, k]. Coefficients are integers, decimals or "p/q" strings and are read exactly.
/// Throws ParseError.
HomVectorField<QuadSurd> parse_field_json(const std::string& text);
QuadCoeffs<QuadSurd> parse_coefficients_json(const std::string& text);

struct SvgOptions {
  int size = 520;
  int background_orbits = 12;
  double separatrix_offset = 1e-4;
  double orbit_time = 12.0;
};

/// Poincare disc of the southern hemisphere; points with z > 0 are drawn through their antipode.
std::string portrait_svg(const HomVectorField<double>& X, const SingularSet& set, const std::string& title,
                         const SvgOptions& opt = {});

/// Re(lambda) at both foci against the scan parameter, with cycle markers.
std::string hopf_svg(const HopfReport& rep);

/// Runs one command (args without the program name); returns the exit code. Reports go to out, diagnostics to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sphereflow
