#pragma once

// Normalized bound states: field evaluation, norm, mean radius, interface
// residuals and the large-r decay of threshold solutions.
//
// The wavefunction is f(r, theta, z) = e^{i m theta} f'(r, z). A normalized
// state satisfies 2 pi int int f'^2 r dr dz = 1. Within each radial region
// f' = sum_j c_j R_j(r) chi_j(z) with the same radial factors the matcher
// uses, so cross terms between channels integrate to zero over z.

#include <Eigen/Dense>
#include <vector>

#include "waveguide/geometry.hpp"
#include "waveguide/matcher.hpp"

namespace waveguide::states {

struct BoundState {
  Geometry geom;
  int m = 0;  // signed; the radial problem depends on |m|
  int n = 0;
  double energy = 0.0;      // reported energy
  double raw_energy = 0.0;  // energy the coefficients belong to
  int truncation = 0;
  Eigen::VectorXd A, B, C, D;
  /// Factor applied to the raw null-space coefficients.
  double norm_constant = 1.0;
  /// False for threshold solutions that are not square integrable; those
  /// are scaled to unit norm over r <= a instead.
  bool normalizable = true;
};

BoundState normalize(const matcher::NullSpaceSolution& sol);

/// 2 pi int int f'^2 r dr dz from the Lommel closed forms; 1 for a
/// normalized state.
double analytic_norm(const BoundState& state);

enum class FieldTag { Ok, Underflow };

struct FieldValue {
  double value = 0.0;
  FieldTag tag = FieldTag::Ok;
};

/// f'(r, z); exactly 0 with FieldTag::Underflow where the leading outer
/// channel has fallen below 1e-16 of its value at r = a.
FieldValue eval_field_tagged(const BoundState& state, double r, double z);
double eval_field(const BoundState& state, double r, double z);

/// d f'/dr; at an interface radius `side` < 0 selects the inner region.
double eval_radial_derivative(const BoundState& state, double r, double z, int side = -1);

/// Leading-channel amplitude int_0^1 chi_0^DD(z) f'(r, z) dz by quadrature.
double leading_channel(const BoundState& state, double r);

double mean_radius(const BoundState& state);

struct InterfaceResidual {
  double radius = 0.0;
  double value_residual = 0.0;
  double derivative_residual = 0.0;
};

struct MatchingResidual {
  std::vector<InterfaceResidual> interfaces;
  double max_value() const;
  double max_derivative() const;
};

MatchingResidual matching_residual(const BoundState& state);

struct GridSpec {
  int nr = 201;
  int nz = 51;
  /// Outer edge of the r grid; 0 picks max(2a, a + 3).
  double r_max = 0.0;
};

struct FieldGrid {
  std::vector<double> r;
  std::vector<double> z;
  /// values(i, k) = f'(r[i], z[k])
  Eigen::MatrixXd values;
  /// underflow[i] is set when row i lies beyond the outer cutoff.
  std::vector<bool> underflow;
  Geometry geom;
  double energy = 0.0;
  int m = 0;
  int n = 0;
};

FieldGrid field_grid(const BoundState& state, const GridSpec& spec = {});

/// Local maxima of |f'(r, z)| over 0 <= r <= r_hi on a uniform grid,
/// counting r = 0 when the profile starts decreasing there.
int radial_maxima(const BoundState& state, double z, double r_hi, int samples = 2000);

/// Solution of the matching system exactly at E = 1 for a geometry at its
/// threshold radius; n labels the level.
BoundState threshold_solution(const Geometry& geom, int m, int n, int truncation = matcher::kDefaultTruncation);

enum class TailClass { ResonanceM0, MarginalM1, BoundMge2, Unclassified };

std::string_view to_string(TailClass c);

struct TailFit {
  double exponent = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
  TailClass classification = TailClass::Unclassified;
};

/// Slope of log|leading channel| against log r over [r_lo, r_hi]; defaults
/// to [a + 10, 10 (a + 10)]. Throws WindowTooShortError when the outer
/// cutoff leaves less than a factor 2 in r.
TailFit asymptotic_tail_check(const BoundState& state, double r_lo = 0.0, double r_hi = 0.0);

}  // namespace waveguide::states
