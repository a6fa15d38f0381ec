#include "waveguide/geometry.hpp"

#include <cmath>
#include <fmt/format.h>

#include "waveguide/errors.hpp"

namespace waveguide {

std::string_view to_string(Config config) {
  switch (config) {
    case Config::OneWindow: return "one";
    case Config::TwoEqual: return "two-equal";
    case Config::TwoDistinct: return "two-distinct";
  }
  return "?";
}

Geometry Geometry::one_window(double a) {
  Geometry g{Config::OneWindow, a, 0.0};
  g.validate();
  return g;
}

Geometry Geometry::two_equal(double a) {
  Geometry g{Config::TwoEqual, a, a};
  g.validate();
  return g;
}

Geometry Geometry::two_distinct(double a, double b) {
  Geometry g{Config::TwoDistinct, a, b};
  g.validate();
  return g;
}

Geometry Geometry::from_radii(double a, double b) {
  if (b == 0.0) return one_window(a);
  if (b == a) return two_equal(a);
  return two_distinct(a, b);
}

void Geometry::validate() const {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError(fmt::format("radius a must be > 0, got {}", a));
  switch (config) {
    case Config::OneWindow:
      if (b != 0.0) throw DomainError("one-window geometry has b = 0");
      break;
    case Config::TwoEqual:
      if (b != a) throw DomainError("two-equal geometry has b = a");
      break;
    case Config::TwoDistinct:
      if (!(b > 0.0) || !(b <= a)) {
        throw DomainError(fmt::format("two-distinct geometry needs 0 < b <= a, got a={} b={}", a, b));
      }
      break;
  }
}

std::string Geometry::describe() const {
  if (config == Config::TwoDistinct) return fmt::format("{}(a={}, b={})", to_string(config), a, b);
  return fmt::format("{}(a={})", to_string(config), a);
}

}  // namespace waveguide
