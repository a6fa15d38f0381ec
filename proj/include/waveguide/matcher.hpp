#pragma once

// Mode-matching dispersion matrices, their zero indicator, the bound-state
// energy search and null-space recovery.
//
// One window / two equal windows: the unknowns are the inner coefficients
// B_j' multiplying R_j'(r) chi_j'(z) for r < a (ND or NN basis). The outer
// field is sum_j A_j K(k_j r)/K(k_j a) chi_j^DD(z). Matching value and
// r-derivative at r = a and projecting both onto chi^DD eliminates A and
// gives Q B = 0 with
//   Q_jj' = (L_j g_j' - g'_j') / (1 + |L_j|) P_jj',
// L_j the outer logarithmic derivative at a and (g, g') the inner radial
// factor and its derivative at a. For propagating inner channels g = J,
// for evanescent ones g = I/I(k a). Each row and column differs from the
// textbook bracket [k'/k J'/K' - J/K] P by a positive factor, recorded in
// log_row_scale and log_col_scale, so determinant signs and roots agree.
//
// Two distinct windows: the ring b < r < a uses the ND basis with two
// radial solutions per channel, u = J or I/I(k a) and v = Y/M(k b) or
// K/K(k b). Rows 0..N-1 match at r = a as above. Rows N..2N-1 match at
// r = b: the value is projected onto NN (giving B), the derivative onto ND.
// The propagating NN channel 0 introduces a pole at J_m(k_0 b) = 0; it is
// removed by keeping B_0 as an extra unknown, which gives the bordered
// system of size 2N+1 whose determinant is J_m(k_0 b) det Q.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "waveguide/geometry.hpp"

namespace waveguide::matcher {

inline constexpr int kDefaultTruncation = 40;

struct DispersionMatrix {
  Geometry geom;
  double energy = 0.0;
  int m = 0;
  int truncation = 0;
  /// N x N, or 2N x 2N block form [[Q1, Q2], [Q3, Q4]] for TwoDistinct.
  Eigen::MatrixXd entries;
  /// log of the positive row/column factors relative to the bracket form
  /// (one window and two equal windows only).
  Eigen::VectorXd log_row_scale;
  Eigen::VectorXd log_col_scale;
  /// TwoDistinct only: pole-free (2N+1) system with unknowns (C, D, B_0).
  Eigen::MatrixXd bordered;

  bool has_border() const { return bordered.size() > 0; }
  const Eigen::MatrixXd& system() const { return has_border() ? bordered : entries; }
};

DispersionMatrix assemble_one_window(double energy, double a, int m, int n);
DispersionMatrix assemble_two_equal(double energy, double a, int m, int n);
DispersionMatrix assemble_two_distinct(double energy, double a, double b, int m, int n);
DispersionMatrix assemble(const Geometry& geom, double energy, int m, int n);

/// Same matrices at exactly E = 1, where the outer DD channel 0 carries the
/// power-law solution (a/r)^m instead of K.
DispersionMatrix assemble_threshold(const Geometry& geom, int m, int n);

struct DetIndicator {
  /// sign(det) * exp(mean log |U_ii|) of the LU factor.
  double value = 0.0;
  int sign = 0;
  double mean_log_abs = 0.0;
  /// Filled when singular values are requested, otherwise NaN.
  double smallest_singular_value = 0.0;
  double largest_singular_value = 0.0;
};

DetIndicator det_indicator(const DispersionMatrix& q, bool singular_values = true);
DetIndicator det_indicator(const Eigen::MatrixXd& q, bool singular_values = true);

struct NullSpaceSolution {
  Geometry geom;
  int m = 0;
  int n = 0;
  int truncation = 0;
  /// Reported energy; the truncation-extrapolated value when enabled.
  double energy = 0.0;
  /// Root of det Q at this truncation; the coefficients belong to it.
  double raw_energy = 0.0;
  /// Outer DD coefficients multiplying K(k_j r)/K(k_j a).
  Eigen::VectorXd A;
  /// Inner (r < a or r < b) coefficients multiplying the regular factor.
  Eigen::VectorXd B;
  /// Ring coefficients (TwoDistinct only) multiplying u and v.
  Eigen::VectorXd C;
  Eigen::VectorXd D;
  double smallest_singular_value = 0.0;
  double second_singular_value = 0.0;
  double largest_singular_value = 0.0;
  /// ||M x|| / ||x|| for the solved system M and null vector x.
  double residual = 0.0;
  std::vector<std::string> warnings;
};

/// Null vector of the system at a root and reconstruction of the remaining
/// coefficient families. Sign fixed so the first significant primary
/// coefficient is positive.
NullSpaceSolution recover_coefficients(const DispersionMatrix& q);

struct EnergyInterval {
  double lo = 0.0;
  double hi = 1.0;
};

struct SearchOptions {
  double scan_step = 5e-4;
  /// Distance kept from every channel threshold and from the interval ends.
  double guard = 1e-9;
  /// Report the Richardson limit of E(N), E(2N), ... instead of E(N).
  bool extrapolate = true;
  /// Doublings used by the extrapolation: 1 removes the 1/N term,
  /// 2 also the 1/N^2 term.
  int richardson_levels = 2;
  /// Stop after this many states (ascending); negative means all.
  int max_states = -1;
  /// Re-solve at N + 10 and warn if a root moves by more than 1e-5.
  bool check_convergence = false;
  /// Roots whose smallest singular value exceeds this fraction of the
  /// largest are rejected as sign changes without a null vector.
  double root_acceptance = 1e-6;
};

struct SearchReport {
  std::vector<NullSpaceSolution> states;
  std::vector<std::string> warnings;
  /// Largest |E(N+10) - E(N)| when check_convergence is set.
  std::optional<double> convergence_delta;
};

SearchReport search_bound_states(const Geometry& geom, int m, int n, EnergyInterval search = {},
                                 const SearchOptions& options = {});

std::vector<NullSpaceSolution> find_bound_states(const Geometry& geom, int m, int n,
                                                 EnergyInterval search = {},
                                                 const SearchOptions& options = {});

/// Thresholds of every channel family the geometry uses that fall inside
/// (lo, hi).
std::vector<double> interior_thresholds(const Geometry& geom, EnergyInterval interval);

/// Roots of det Q(E) at fixed truncation inside [lo, hi] by sign scan and
/// bisection to machine precision; no extrapolation, no acceptance test.
std::vector<double> scan_roots(const Geometry& geom, int m, int n, EnergyInterval interval,
                               double step);

/// Richardson limit of values at truncations N, 2N, 4N, ... assuming an
/// expansion in powers of 1/N.
double richardson_limit(std::vector<double> values);

/// Richardson limit of the root near `root` (found at truncation n) from
/// truncations n, 2n, ..., 2^levels n, assuming E(N) = E + c1/N + c2/N^2 + ...
std::optional<double> extrapolated_root(const Geometry& geom, int m, int n, double root, EnergyInterval interval,
                                        int levels);

/// Root of det Q(E) at truncation n nearest to `near`, searched outward in
/// steps of `step` up to `reach` and clipped to `interval`.
std::optional<double> nearest_root(const Geometry& geom, int m, int n, double near,
                                   EnergyInterval interval, double step = 1e-4,
                                   double reach = 0.02);

}  // namespace waveguide::matcher
