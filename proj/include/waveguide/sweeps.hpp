#pragma once

// Parameter sweeps over the window radii and the analytics built on them:
// emergence radii, plateaus and avoided-crossing gaps, the small-radius
// binding law E = 1 - exp(-c / a^3) and Dirichlet-cylinder energy brackets.

#include <string>
#include <vector>

#include "waveguide/geometry.hpp"
#include "waveguide/matcher.hpp"
#include "waveguide/states.hpp"

namespace waveguide::sweeps {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Samples of one (|m|, n) level along the sweep axis.
struct StateCurve {
  int m = 0;
  int n = 0;
  std::vector<double> axis;
  std::vector<double> energy;
  std::vector<double> mean_radius;  // empty unless requested
  std::vector<Interval> plateaus;          // flat E segments
  std::vector<Interval> radius_plateaus;   // flat <r> segments
};

/// Smallest distance between adjacent levels of equal |m| over the sweep.
struct Gap {
  int m = 0;
  int lower = 0;
  int upper = 0;
  double gap = 0.0;
  double at = 0.0;
};

/// Coarse emergence of a level between two consecutive grid points.
struct Emergence {
  int m = 0;
  int n = 0;
  Interval between;
};

enum class Axis { OuterRadius, InnerRatio };

struct SweepResult {
  Axis axis = Axis::OuterRadius;
  Config config = Config::OneWindow;
  double outer_radius = 0.0;  // fixed a of an inner sweep
  std::vector<double> grid;   // a, or b/a for inner sweeps
  std::vector<StateCurve> curves;
  std::vector<Emergence> emergences;
  std::vector<Gap> gaps;
  std::vector<std::string> warnings;

  const StateCurve* curve(int m, int n) const;
};

struct SweepOptions {
  int truncation = matcher::kDefaultTruncation;
  bool extrapolate = true;
  int richardson_levels = 2;
  matcher::EnergyInterval window{0.0, 1.0};
  /// Keep at most this many levels per |m|; negative keeps all.
  int max_levels = -1;
  bool mean_radius = false;
  /// |d ln E / d(b/a)| below this marks a plateau.
  double plateau_threshold = 0.2;
  /// |d ln <r> / d(b/a)| below this marks a mean-radius plateau.
  double radius_plateau_threshold = 0.5;
  /// Flat runs narrower than this (axis units) are not reported.
  double min_plateau_width = 0.015;
};

SweepResult sweep_outer(Config config, const std::vector<double>& a_grid, const std::vector<int>& m_list,
                        const SweepOptions& options = {});

/// b_grid holds inner radii b (0 < b <= a); the result axis is b/a.
SweepResult sweep_inner(double a, const std::vector<double>& b_grid, int m, const SweepOptions& options = {});

/// Maximal runs where |dy/dx| (|d ln y/dx| when `logarithmic`) stays below
/// `threshold`, at least `min_width` wide.
std::vector<Interval> detect_plateaus(const std::vector<double>& x, const std::vector<double>& y, double threshold,
                                      double min_width, bool logarithmic = false);

struct CriticalOptions {
  /// Level reached is E = 1 - epsilon; 0 uses the exact threshold E = 1.
  double epsilon = 1e-6;
  double a_lo = 0.05;
  double a_hi = 40.0;
  double scan_step = 0.02;
  bool extrapolate = true;
  int richardson_levels = 2;
};

struct CriticalRadius {
  Config config = Config::OneWindow;
  int m = 0;
  int n = 0;
  double radius = 0.0;      // extrapolated when enabled
  double raw_radius = 0.0;  // at the requested truncation
  double epsilon = 0.0;
  int truncation = 0;
};

/// Radius at which level (|m|, n) reaches E = 1 - epsilon: the (n+1)-th sign
/// change of det Q(1 - epsilon, a) in a, refined by bisection.
CriticalRadius critical_radius(Config config, int m, int n, int truncation = matcher::kDefaultTruncation,
                               const CriticalOptions& options = {});

struct SmallRadiusFit {
  double c = 0.0;
  double spread = 0.0;  // (max - min) / mean of the per-point constants
  double min = 0.0;
  double max = 0.0;
  double standard_error = 0.0;
  std::vector<double> a;
  std::vector<double> energy;
  std::vector<double> constants;
};

/// Least-squares constant through -a^3 ln(1 - E).
SmallRadiusFit fit_small_radius_constant(const std::vector<double>& a, const std::vector<double>& energy);

/// Ground-state energies of the one-window problem on a_grid, then the fit.
/// Throws RegimeError where 1 - E < 1e-12.
SmallRadiusFit fit_small_radius_constant(const std::vector<double>& a_grid,
                                         int truncation = matcher::kDefaultTruncation, bool extrapolate = true);

struct BracketCertificate {
  int m = 0;
  int n = 0;
  double energy = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool binding = false;  // upper < 1
  bool pass = false;
};

/// lower = 0 for n = 0, else (x_{|m|,n}/(pi a))^2; upper = (x_{|m|,n+1}/(pi b))^2
/// with b the smaller Neumann radius (infinite for one window).
BracketCertificate certify_bracket(const Geometry& geom, int m, int n, double energy);
BracketCertificate certify_bracket(const states::BoundState& state);

}  // namespace waveguide::sweeps
