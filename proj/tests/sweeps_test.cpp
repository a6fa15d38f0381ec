#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "waveguide/errors.hpp"
#include "waveguide/specfun.hpp"
#include "waveguide/sweeps.hpp"

using namespace waveguide;
using std::numbers::pi;

TEST_CASE("plateaus of a synthetic staircase") {
  // Three smooth steps leave four flat runs.
  std::vector<double> x, y;
  for (int i = 0; i <= 1000; ++i) {
    const double t = i / 1000.0;
    x.push_back(t);
    double v = 1.0;
    for (double c : {0.25, 0.5, 0.75}) v += 0.5 * (1.0 + std::tanh((t - c) / 0.01));
    y.push_back(v);
  }
  const auto flat = sweeps::detect_plateaus(x, y, 0.2, 0.015);
  REQUIRE(flat.size() == 4);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    CHECK(flat[i].lo < flat[i].hi);
    if (i > 0) CHECK(flat[i - 1].hi < flat[i].lo);
  }
  CHECK(flat.front().lo == 0.0);
  CHECK(flat.back().hi == 1.0);
  CHECK(sweeps::detect_plateaus(x, y, 0.2, 0.015, true).size() == 4);
  // Runs narrower than the minimum width disappear.
  CHECK(sweeps::detect_plateaus(x, y, 0.2, 0.3).empty());
  // A steady slope has no plateau.
  CHECK(sweeps::detect_plateaus(x, x, 0.2, 0.015).empty());
  CHECK(sweeps::detect_plateaus(x, x, 2.0, 0.015).size() == 1);
}

TEST_CASE("small-radius fit recovers a synthetic constant") {
  std::vector<double> a, e;
  for (double r = 0.55; r <= 0.9001; r += 0.05) {
    a.push_back(r);
    e.push_back(1.0 - std::exp(-0.445 / (r * r * r)));
  }
  const auto fit = sweeps::fit_small_radius_constant(a, e);
  CHECK(std::abs(fit.c - 0.445) < 1e-6);
  CHECK(fit.spread < 1e-6);
  CHECK(fit.constants.size() == a.size());

  e.back() = 1.0 - 1e-13;
  CHECK_THROWS_AS(sweeps::fit_small_radius_constant(a, e), RegimeError);
}

TEST_CASE("Dirichlet-cylinder brackets") {
  const double x01 = specfun::bessel_zero(0, 1).value;
  const double x02 = specfun::bessel_zero(0, 2).value;
  const auto c = sweeps::certify_bracket(Geometry::two_equal(3.0), 0, 0, 0.05);
  CHECK(c.lower == 0.0);
  CHECK(c.upper == doctest::Approx(std::pow(x01 / (3.0 * pi), 2)).epsilon(1e-14));
  CHECK(c.upper == doctest::Approx(0.0651).epsilon(1e-3));
  CHECK(c.binding);
  CHECK(c.pass);
  CHECK_FALSE(sweeps::certify_bracket(Geometry::two_equal(3.0), 0, 0, 0.07).pass);

  const auto excited = sweeps::certify_bracket(Geometry::two_distinct(4.0, 2.0), 0, 1, 0.3);
  CHECK(excited.lower == doctest::Approx(std::pow(x01 / (4.0 * pi), 2)).epsilon(1e-14));
  CHECK(excited.upper == doctest::Approx(std::pow(x02 / (2.0 * pi), 2)).epsilon(1e-14));

  const auto open = sweeps::certify_bracket(Geometry::one_window(3.0), 1, 0, 0.9);
  CHECK(std::isinf(open.upper));
  CHECK_FALSE(open.binding);
  CHECK(open.pass);
  // Bounds at or above the continuum never bind.
  CHECK_FALSE(sweeps::certify_bracket(Geometry::two_equal(0.5), 0, 0, 0.9).binding);
}

TEST_CASE("outer sweeps") {
  sweeps::SweepOptions o;
  o.truncation = 20;
  const auto r = sweeps::sweep_outer(Config::TwoEqual, {0.5, 1.0, 2.0, 3.0}, {0, 1, 2}, o);
  CHECK(r.grid.size() == 4);
  int at2 = 0;
  for (const auto& c : r.curves) {
    for (std::size_t i = 0; i + 1 < c.energy.size(); ++i) CHECK(c.energy[i + 1] <= c.energy[i]);
    for (std::size_t i = 0; i < c.axis.size(); ++i) {
      const auto cert = sweeps::certify_bracket(Geometry::two_equal(c.axis[i]), c.m, c.n, c.energy[i]);
      CHECK(cert.pass);
      if (c.axis[i] == 2.0) ++at2;
    }
  }
  CHECK(at2 >= 4);
  REQUIRE(r.curve(1, 0) != nullptr);
  CHECK(r.curve(1, 0)->axis.front() == 1.0);
  CHECK(r.curve(7, 0) == nullptr);
  bool emerged = false;
  for (const auto& e : r.emergences) emerged |= (e.m == 1 && e.n == 0 && e.between.lo == 0.5 && e.between.hi == 1.0);
  CHECK(emerged);
}

TEST_CASE("inner sweep endpoints") {
  sweeps::SweepOptions o;
  o.truncation = 20;
  o.mean_radius = true;
  const double a = 3.0;
  const auto r = sweeps::sweep_inner(a, {0.003, 0.75, 1.5, 2.25, 3.0}, 0, o);
  CHECK(r.axis == sweeps::Axis::InnerRatio);
  CHECK(r.outer_radius == a);
  CHECK(r.grid.back() == 1.0);
  const auto one = matcher::find_bound_states(Geometry::one_window(a), 0, 20);
  const auto two = matcher::find_bound_states(Geometry::two_equal(a), 0, 20);
  for (const auto& c : r.curves) {
    CHECK(c.mean_radius.size() == c.energy.size());
    for (std::size_t i = 0; i + 1 < c.energy.size(); ++i) CHECK(c.energy[i + 1] <= c.energy[i]);
    if (c.axis.front() == r.grid.front()) CHECK(std::abs(c.energy.front() - one[c.n].energy) < 1e-4);
    CHECK(std::abs(c.energy.back() - two[c.n].energy) < 1e-12);
  }
  for (const auto& g : r.gaps) CHECK(g.gap > 0.0);
}

TEST_CASE("critical radii") {
  const auto cr = sweeps::critical_radius(Config::TwoEqual, 1, 0);
  CHECK(std::abs(cr.radius - 0.866) < 0.02);
  CHECK(cr.epsilon == 1e-6);
  CHECK(cr.m == 1);
  CHECK(std::abs(cr.radius - cr.raw_radius) < 1e-2);
  // Just beyond it the level is bound, just before it is not.
  CHECK_FALSE(matcher::find_bound_states(Geometry::two_equal(cr.radius + 0.01), 1, 40).empty());
  CHECK(matcher::find_bound_states(Geometry::two_equal(cr.radius - 0.01), 1, 40).empty());

  sweeps::CriticalOptions narrow;
  narrow.a_hi = 0.5;
  CHECK_THROWS_AS(sweeps::critical_radius(Config::OneWindow, 1, 0, 20, narrow), NotFoundError);
  sweeps::CriticalOptions exact;
  exact.epsilon = 0.0;
  CHECK_THROWS_AS(sweeps::critical_radius(Config::OneWindow, 0, 0, 20, exact), DomainError);
}

TEST_CASE("small-radius constants settle as the window shrinks") {
  // The law is asymptotic in a -> 0: per-point constants fall towards the
  // limit as a decreases.
  const auto fit = sweeps::fit_small_radius_constant({0.35, 0.45, 0.7, 0.9}, 40, true);
  for (std::size_t i = 0; i + 1 < fit.constants.size(); ++i) CHECK(fit.constants[i] < fit.constants[i + 1]);
  CHECK(fit.constants.front() > 0.42);
  CHECK(fit.constants.front() < 0.46);
  for (double e : fit.energy) CHECK(e < 1.0);
}
