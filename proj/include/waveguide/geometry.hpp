#pragma once

#include <string>
#include <string_view>

namespace waveguide {

/// Window configurations on the plane z = 0 of the waveguide 0 < z < 1.
///   OneWindow    Neumann disc r < a on z = 0
///   TwoEqual     Neumann discs r < a on both walls
///   TwoDistinct  disc r < a on z = 0, disc r < b on z = 1, 0 < b < a
enum class Config { OneWindow, TwoEqual, TwoDistinct };

std::string_view to_string(Config config);

struct Geometry {
  Config config = Config::OneWindow;
  double a = 1.0;
  double b = 0.0;

  static Geometry one_window(double a);
  static Geometry two_equal(double a);
  /// Requires 0 < b <= a; b == a is kept as TwoDistinct, see from_radii.
  static Geometry two_distinct(double a, double b);
  /// Routes b == 0 to OneWindow and b == a to TwoEqual.
  static Geometry from_radii(double a, double b);

  /// Throws DomainError when the radii violate the configuration.
  void validate() const;

  std::string describe() const;
};

}  // namespace waveguide
