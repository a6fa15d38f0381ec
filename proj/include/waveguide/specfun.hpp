#pragma once

// Real-argument cylinder functions of integer order: J_m, Y_m, I_m, K_m,
// their first derivatives, exponentially scaled modified forms and the
// positive zeros of J_m.
//
// Small arguments use Temme's series, moderate arguments the continued
// fractions of Steed (J/Y) and Thompson-Barnett (I/K) combined with Miller
// recurrence, large arguments the Hankel expansions.

#include <string_view>

namespace waveguide::specfun {

enum class BesselKind { J, Y, I, K };

std::string_view to_string(BesselKind kind);

/// Largest order for which accuracy is maintained.
inline constexpr int kMaxOrder = 30;

/// Value of the requested cylinder function.
///
/// x must be > 0 for Y and K and >= 0 for J and I. Throws DomainError
/// outside the domain and OverflowError when I_m(x) is not representable.
double bessel(BesselKind kind, int order, double x);

/// d/dx of the requested cylinder function; same domain as bessel().
double bessel_derivative(BesselKind kind, int order, double x);

struct FunctionPair {
  double value = 0.0;
  double derivative = 0.0;
};

/// All four ordinary cylinder quantities at once (x > 0).
struct CylinderSet {
  double j = 0.0;
  double y = 0.0;
  double jp = 0.0;
  double yp = 0.0;
};

CylinderSet bessel_jy(int order, double x);

/// e^{-x} I_m(x) and e^{-x} I_m'(x); finite for every x > 0.
FunctionPair bessel_i_scaled(int order, double x);

/// e^{x} K_m(x) and e^{x} K_m'(x); finite for every x > 0.
FunctionPair bessel_k_scaled(int order, double x);

struct BesselZero {
  int order = 0;
  int index = 0;   // 1-based
  double value = 0.0;
};

/// index-th positive zero of J_order.
BesselZero bessel_zero(int order, int index);

}  // namespace waveguide::specfun
