#pragma once

// Radial factors R(r) of separated solutions of
//   R'' + R'/r + (q - m^2/r^2) R = 0,   q = +kappa^2 or -kappa^2,
// normalized so that they stay O(1) at a reference radius. Modified Bessel
// functions are never formed unscaled.

#include "waveguide/modes.hpp"
#include "waveguide/specfun.hpp"

namespace waveguide::radial {

enum class Solution {
  Regular,    // J(kr), I(kr)/I(k r0), (r/r0)^m
  Irregular,  // Y(kr)/M(k r0) with M = sqrt(J^2 + Y^2), K(kr)/K(k r0)
  Decaying,   // K(kr)/K(k r0), (r0/r)^m; not defined on propagating branches
};

class RadialFunction {
 public:
  RadialFunction(Solution kind, int m, modes::RadialWavenumber wavenumber, double reference);

  /// Value and d/dr at r.
  specfun::FunctionPair operator()(double r) const;

  Solution kind() const { return kind_; }
  int order() const { return m_; }
  const modes::RadialWavenumber& wavenumber() const { return k_; }
  double reference() const { return r0_; }

  /// Signed separation constant q in R'' + R'/r + (q - m^2/r^2) R = 0.
  double separation_constant() const;

 private:
  Solution kind_;
  int m_;
  modes::RadialWavenumber k_;
  double r0_;
  double scale_ = 1.0;
};

/// Antiderivative F with F' = r R^2 for any solution of the radial equation
/// with separation constant q != 0, given R and R' at r:
///   F(r) = [r^2 R'^2 + (q r^2 - m^2) R^2] / (2 q).
double lommel_antiderivative(int m, double q, double r, const specfun::FunctionPair& at_r);

}  // namespace waveguide::radial
