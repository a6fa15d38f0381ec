#pragma once

// Run configuration for the command-line front end. Values come from an INI
// file with one section per concern and may be overridden key by key; the
// override always wins. Every field is validated before any solve.
//
//   [geometry]      config, a, b
//   [solver]        m, truncation, extrapolate, e_lo, e_hi, scan_step,
//                   root_acceptance, check_convergence
//   [wavefunction]  n, grid_nr, grid_nz, grid_r_max
//   [sweep]         axis, grid, grid_lo, grid_hi, grid_count, grid_spacing,
//                   mean_radius, max_levels, plateau_threshold,
//                   radius_plateau_threshold, min_plateau_width,
//                   critical_levels, critical_epsilon, fit_grid
//   [output]        out, analytics, timings

#include <boost/property_tree/ptree.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "waveguide/geometry.hpp"

namespace waveguide::cli {

enum class Command { Spectrum, Wavefunction, Sweep, Validate };

std::string_view to_string(Command command);

enum class SweepAxis { OuterRadius, InnerRatio };

std::string_view to_string(SweepAxis axis);

struct RunConfig {
  Command command = Command::Spectrum;

  Config geometry = Config::OneWindow;
  double a = 1.0;
  double b = 0.0;

  std::vector<int> m_list{0};
  int truncation = 40;
  bool extrapolate = true;
  double e_lo = 0.0;
  double e_hi = 1.0;
  double scan_step = 5e-4;
  double root_acceptance = 1e-6;
  bool check_convergence = false;

  int n = 0;
  int grid_nr = 201;
  int grid_nz = 51;
  double grid_r_max = 0.0;

  SweepAxis axis = SweepAxis::OuterRadius;
  /// Outer radii a, or ratios b/a for the inner axis.
  std::vector<double> grid;
  bool mean_radius = false;
  int max_levels = -1;
  double plateau_threshold = 0.2;
  double radius_plateau_threshold = 0.5;
  double min_plateau_width = 0.015;
  int critical_levels = 0;
  double critical_epsilon = 1e-6;
  std::vector<double> fit_grid;

  std::string out = "-";
  std::string analytics;
  bool timings = false;

  Geometry geometry_value() const;
};

/// Keys are "section.key". Unknown sections or keys are rejected.
using Tree = boost::property_tree::ptree;

/// Parses an INI file; syntax errors report the file and line.
Tree read_ini(const std::string& path);

/// Builds and validates a configuration. `source` names the origin of the
/// values in diagnostics.
RunConfig from_tree(Command command, const Tree& tree, std::string_view source = "config");

/// Throws ConfigError naming the first field that violates an invariant.
void validate(const RunConfig& config);

}  // namespace waveguide::cli
