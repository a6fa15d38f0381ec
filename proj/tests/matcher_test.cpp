#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "waveguide/errors.hpp"
#include "waveguide/matcher.hpp"
#include "waveguide/modes.hpp"
#include "waveguide/specfun.hpp"

using namespace waveguide;
using specfun::BesselKind;
using std::numbers::pi;

namespace {

struct Inner {
  double g;   // radial factor at r = a
  double gp;  // its r-derivative
};

// Unnormalized textbook radial factor: J on propagating, I on evanescent
// inner branches.
Inner inner_factor(double energy, double threshold, int m, double a) {
  if (energy > threshold) {
    const double k = pi * std::sqrt(energy - threshold);
    return {specfun::bessel(BesselKind::J, m, k * a), k * specfun::bessel_derivative(BesselKind::J, m, k * a)};
  }
  const double k = pi * std::sqrt(threshold - energy);
  return {specfun::bessel(BesselKind::I, m, k * a), k * specfun::bessel_derivative(BesselKind::I, m, k * a)};
}

// Bracket form [k'/k g'/K' - g/K] P written with unscaled Bessel functions.
Eigen::MatrixXd bracket_form(double energy, double a, int m, int n, bool two_equal) {
  Eigen::MatrixXd q(n, n);
  const auto which = two_equal ? modes::CouplingKind::P2 : modes::CouplingKind::P1;
  const auto inner = two_equal ? modes::BasisKind::NN : modes::BasisKind::ND;
  for (int j = 0; j < n; ++j) {
    const double k = pi * std::sqrt((j + 1.0) * (j + 1.0) - energy);
    const double kv = specfun::bessel(BesselKind::K, m, k * a);
    const double kd = k * specfun::bessel_derivative(BesselKind::K, m, k * a);
    for (int jp = 0; jp < n; ++jp) {
      const auto f = inner_factor(energy, modes::transverse_eigenvalue(inner, jp), m, a);
      q(j, jp) = (f.gp / kd - f.g / kv) * modes::coupling_entry(which, j, jp);
    }
  }
  return q;
}

int det_sign(Eigen::MatrixXd q) {
  // Positive row and column equilibration keeps the sign of the determinant.
  for (Eigen::Index i = 0; i < q.rows(); ++i) q.row(i) /= q.row(i).cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < q.cols(); ++i) q.col(i) /= q.col(i).cwiseAbs().maxCoeff();
  const double d = Eigen::PartialPivLU<Eigen::MatrixXd>(q).determinant();
  return d > 0 ? 1 : (d < 0 ? -1 : 0);
}

std::vector<double> energies(const Geometry& g, int m, int n = matcher::kDefaultTruncation) {
  std::vector<double> e;
  for (const auto& s : matcher::find_bound_states(g, m, n)) e.push_back(s.energy);
  return e;
}

}  // namespace

TEST_CASE("matrix shapes and finiteness") {
  const auto q = matcher::assemble_one_window(0.5, 1.0, 0, 20);
  CHECK(q.entries.rows() == 20);
  CHECK(q.entries.cols() == 20);
  CHECK(q.entries.allFinite());
  CHECK_FALSE(q.has_border());
  const auto t = matcher::assemble_two_distinct(0.5, 3.0, 1.5, 1, 12);
  CHECK(t.entries.rows() == 24);
  CHECK(t.entries.cols() == 24);
  CHECK(t.bordered.rows() == 25);
  CHECK(t.entries.allFinite());
  CHECK(t.bordered.allFinite());
  // Large radii and truncations stay finite thanks to the scaled forms.
  CHECK(matcher::assemble_one_window(0.3, 20.0, 3, 80).entries.allFinite());
  CHECK(matcher::assemble_two_distinct(0.9, 20.0, 19.0, 2, 60).bordered.allFinite());
}

TEST_CASE("scaled entries equal the bracket form up to the recorded factors") {
  for (bool two_equal : {false, true}) {
    for (int m : {0, 1, 3}) {
      for (double e : {0.1, 0.5, 0.93}) {
        const double a = 1.3;
        const int n = 12;
        const auto q = two_equal ? matcher::assemble_two_equal(e, a, m, n) : matcher::assemble_one_window(e, a, m, n);
        const auto ref = bracket_form(e, a, m, n, two_equal);
        for (int j = 0; j < n; ++j) {
          for (int jp = 0; jp < n; ++jp) {
            const double scaled = ref(j, jp) * std::exp(q.log_row_scale(j) + q.log_col_scale(jp));
            const double tol = 1e-10 * (std::abs(q.entries.row(j).maxCoeff()) + std::abs(q.entries.row(j).minCoeff()));
            INFO("two_equal=", two_equal, " m=", m, " E=", e, " (", j, ", ", jp, ")");
            CHECK(std::abs(q.entries(j, jp) - scaled) <= tol);
          }
        }
      }
    }
  }
}

TEST_CASE("roots agree with a bracket-form scan oracle") {
  // Independent root of the unscaled determinant at small N.
  const int n = 12;
  const double a = 5.0;
  double lo = 0.2501, hi = lo;
  int s_lo = det_sign(bracket_form(lo, a, 0, n, false));
  while (hi < 0.3) {
    hi = lo + 1e-4;
    if (det_sign(bracket_form(hi, a, 0, n, false)) != s_lo) break;
    lo = hi;
  }
  REQUIRE(hi < 0.3);
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (det_sign(bracket_form(mid, a, 0, n, false)) == s_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const auto roots = matcher::scan_roots(Geometry::one_window(a), 0, n, {0.0, 1.0}, 5e-4);
  REQUIRE_FALSE(roots.empty());
  CHECK(std::abs(roots.front() - 0.5 * (lo + hi)) < 1e-9);
  // The indicator changes sign across it.
  const auto below = matcher::det_indicator(matcher::assemble_one_window(roots.front() - 1e-4, a, 0, n));
  const auto above = matcher::det_indicator(matcher::assemble_one_window(roots.front() + 1e-4, a, 0, n));
  CHECK(below.sign * above.sign < 0);
}

TEST_CASE("row scaling leaves the indicator zeros in place") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (double e : {0.26, 0.27, 0.28, 0.3}) {
    auto q = matcher::assemble_one_window(e, 5.0, 0, 20).entries;
    const int s = matcher::det_indicator(q, false).sign;
    for (Eigen::Index i = 0; i < q.rows(); ++i) q.row(i) *= u(rng);
    CHECK(matcher::det_indicator(q, false).sign == s);
  }
  const auto far = matcher::det_indicator(matcher::assemble_one_window(0.6, 5.0, 0, 20));
  CHECK(std::abs(far.value) > 0.0);
  CHECK(far.smallest_singular_value > 0.0);
}

TEST_CASE("threshold coincidences are rejected") {
  CHECK_THROWS_AS(matcher::assemble_one_window(0.25, 1.0, 0, 10), DegenerateThresholdError);
  CHECK_THROWS_AS(matcher::assemble_two_distinct(0.25, 2.0, 1.0, 0, 10), DegenerateThresholdError);
  CHECK_THROWS_AS(matcher::assemble_two_distinct(0.5, 2.0, 2.0, 0, 10), DomainError);
  CHECK_THROWS_AS(matcher::assemble_one_window(0.5, -1.0, 0, 10), DomainError);
  CHECK_THROWS_AS(matcher::assemble_one_window(0.5, 1.0, 0, 0), DomainError);
  CHECK_THROWS_AS(matcher::assemble_one_window(0.5, 1.0, -1, 10), DomainError);
}

TEST_CASE("bound states of reference geometries") {
  const auto one5 = energies(Geometry::one_window(5.0), 0);
  REQUIRE(one5.size() >= 2);
  CHECK(one5.front() > 0.25);
  const auto one10 = energies(Geometry::one_window(10.0), 0);
  CHECK(one10.front() < one5.front());
  CHECK(one10.front() > 0.25);

  CHECK(energies(Geometry::two_equal(0.5), 1).empty());

  const double x01 = specfun::bessel_zero(0, 1).value;
  CHECK(energies(Geometry::two_equal(3.0), 0).front() <= std::pow(x01 / (pi * 3.0), 2));
}

TEST_CASE("energies decrease with the radius and lie in (0, 1)") {
  for (auto make : {&Geometry::one_window, &Geometry::two_equal}) {
    for (int m : {0, 1}) {
      std::vector<double> previous;
      for (double a : {1.0, 2.0, 3.0, 5.0, 8.0}) {
        const auto e = energies(make(a), m);
        for (double x : e) {
          CHECK(x > 0.0);
          CHECK(x < 1.0);
        }
        CHECK(e.size() >= previous.size());
        for (std::size_t i = 0; i < previous.size(); ++i) CHECK(e[i] <= previous[i]);
        previous = e;
      }
    }
  }
}

TEST_CASE("a second window lowers the ground state") {
  for (double a : {0.6, 1.0, 2.0, 4.0}) {
    CHECK(energies(Geometry::two_equal(a), 0).front() <= energies(Geometry::one_window(a), 0).front());
  }
}

TEST_CASE("truncation convergence of extrapolated energies") {
  for (const auto& g : {Geometry::one_window(3.0), Geometry::two_equal(2.0), Geometry::two_distinct(4.0, 2.0)}) {
    const auto e40 = energies(g, 0, 40);
    const auto e60 = energies(g, 0, 60);
    REQUIRE(e40.size() == e60.size());
    for (std::size_t i = 0; i < e40.size(); ++i) CHECK(std::abs(e40[i] - e60[i]) < 1e-5);
  }
  const auto e80 = energies(Geometry::one_window(3.0), 0, 80);
  const auto e40 = energies(Geometry::one_window(3.0), 0, 40);
  for (std::size_t i = 0; i < e40.size(); ++i) CHECK(std::abs(e40[i] - e80[i]) < 1e-6);
}

TEST_CASE("raw roots converge like 1/N and Richardson removes it") {
  const auto g = Geometry::one_window(3.0);
  matcher::SearchOptions raw;
  raw.extrapolate = false;
  raw.max_states = 1;
  const double e1 = matcher::find_bound_states(g, 0, 20, {}, raw).front().energy;
  const double e2 = matcher::find_bound_states(g, 0, 40, {}, raw).front().energy;
  const double e4 = matcher::find_bound_states(g, 0, 80, {}, raw).front().energy;
  CHECK((e2 - e1) / (e4 - e2) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(matcher::richardson_limit({e1, e2, e4}) == doctest::Approx(energies(g, 0, 20).front()).epsilon(1e-12));
  CHECK(matcher::richardson_limit({1.0, 3.0}) == 5.0);
  CHECK(matcher::richardson_limit({7.0}) == 7.0);
}

TEST_CASE("inner radius limits") {
  for (double a : {5.0, 10.0}) {
    const auto one = energies(Geometry::one_window(a), 0);
    const auto small = energies(Geometry::two_distinct(a, 1e-3 * a), 0);
    REQUIRE(one.size() == small.size());
    for (std::size_t i = 0; i < one.size(); ++i) CHECK(std::abs(one[i] - small[i]) < 1e-4);
  }
  // Towards b = a the difference shrinks in proportion to the ring width.
  const double a = 5.0;
  const auto two = energies(Geometry::two_equal(a), 0);
  const auto w3 = energies(Geometry::two_distinct(a, a * (1.0 - 1e-3)), 0);
  const auto w4 = energies(Geometry::two_distinct(a, a * (1.0 - 1e-4)), 0);
  const auto w6 = energies(Geometry::two_distinct(a, a * (1.0 - 1e-6)), 0);
  REQUIRE(two.size() == w3.size());
  REQUIRE(two.size() == w4.size());
  REQUIRE(two.size() == w6.size());
  for (std::size_t i = 0; i < two.size(); ++i) {
    CHECK((w3[i] - two[i]) / (w4[i] - two[i]) == doctest::Approx(10.0).epsilon(0.1));
    CHECK(std::abs(w6[i] - two[i]) < 1e-5);
  }
}

TEST_CASE("null vectors and reconstructed coefficients") {
  for (const auto& g : {Geometry::one_window(0.74), Geometry::one_window(3.0), Geometry::two_equal(2.0)}) {
    for (const auto& s : matcher::find_bound_states(g, 0, 20)) {
      CHECK(s.residual <= 1e-8);
      CHECK(s.B.norm() > 0.0);
      CHECK(s.A.norm() > 0.0);
      // First significant primary coefficient is positive.
      for (Eigen::Index j = 0; j < s.B.size(); ++j) {
        if (std::abs(s.B(j)) > 1e-8 * s.B.cwiseAbs().maxCoeff()) {
          CHECK(s.B(j) > 0.0);
          break;
        }
      }
      // Projected matching at r = a, rebuilt from the Bessel functions.
      const bool two = g.config == Config::TwoEqual;
      const auto which = two ? modes::CouplingKind::P2 : modes::CouplingKind::P1;
      const auto inner = two ? modes::BasisKind::NN : modes::BasisKind::ND;
      const int n = s.truncation;
      const double e = s.raw_energy;
      const double scale = s.A.cwiseAbs().maxCoeff();
      for (int j = 0; j < n; ++j) {
        double value = 0.0, slope = 0.0;
        for (int jp = 0; jp < n; ++jp) {
          const double t = modes::transverse_eigenvalue(inner, jp);
          const auto f = inner_factor(e, t, 0, g.a);
          // Evanescent factors are normalized to 1 at r = a.
          const double norm = e > t ? 1.0 : f.g;
          value += modes::coupling_entry(which, j, jp) * s.B(jp) * f.g / norm;
          slope += modes::coupling_entry(which, j, jp) * s.B(jp) * f.gp / norm;
        }
        const double k = pi * std::sqrt((j + 1.0) * (j + 1.0) - e);
        const auto kk = specfun::bessel_k_scaled(0, k * g.a);
        const double log_derivative = k * kk.derivative / kk.value;
        CHECK(std::abs(value - s.A(j)) <= 1e-8 * scale);
        CHECK(std::abs(slope - s.A(j) * log_derivative) <= 1e-8 * scale * (1.0 + std::abs(log_derivative)));
      }
    }
  }
  const auto ground = matcher::find_bound_states(Geometry::one_window(0.74), 0, 40).front();
  for (Eigen::Index j = 1; j < ground.B.size(); ++j) CHECK(std::abs(ground.B(0)) > std::abs(ground.B(j)));
}

TEST_CASE("two-distinct null vectors") {
  for (const auto& s : matcher::find_bound_states(Geometry::two_distinct(5.0, 2.5), 1, 30)) {
    CHECK(s.residual <= 1e-8);
    CHECK(s.C.size() == 30);
    CHECK(s.D.size() == 30);
    CHECK(s.B.size() == 30);
    CHECK(s.A.size() == 30);
    CHECK(s.smallest_singular_value <= 1e-6 * s.largest_singular_value);
  }
}

TEST_CASE("threshold matrices") {
  const auto q = matcher::assemble_threshold(Geometry::one_window(1.5), 2, 20);
  CHECK(q.energy == 1.0);
  CHECK(q.entries.allFinite());
  CHECK(matcher::assemble_threshold(Geometry::two_distinct(3.0, 1.0), 1, 12).bordered.allFinite());
}

TEST_CASE("degenerate null spaces are reported") {
  matcher::DispersionMatrix q = matcher::assemble_one_window(0.5, 1.0, 0, 6);
  q.entries = Eigen::MatrixXd::Identity(6, 6);
  q.entries(0, 0) = 0.0;
  q.entries(1, 1) = 0.0;
  CHECK_THROWS_AS(matcher::recover_coefficients(q), NearDegenerateRootError);
}
