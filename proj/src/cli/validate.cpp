#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <functional>
#include <numbers>

#include "waveguide/cli/commands.hpp"
#include "waveguide/errors.hpp"
#include "waveguide/matcher.hpp"
#include "waveguide/modes.hpp"
#include "waveguide/specfun.hpp"

namespace waveguide::cli {
namespace {

using std::numbers::pi;

class Suite {
 public:
  Suite(std::string name, double tolerance) {
    r_.name = std::move(name);
    r_.tolerance = tolerance;
  }

  void check(double error, const std::string& what) {
    ++r_.checks;
    if (!std::isfinite(error)) error = std::numeric_limits<double>::infinity();
    r_.worst = std::max(r_.worst, error);
    if (!(error <= r_.tolerance)) fail(fmt::format("{}: error {:.3e}", what, error));
  }

  void fail(const std::string& message) {
    ++r_.failures;
    r_.pass = false;
    if (r_.messages.size() < 5) r_.messages.push_back(message);
  }

  SuiteResult& result() { return r_; }

 private:
  SuiteResult r_;
};

// Composite 20-point Gauss-Legendre over [0, 1].
double integrate_unit(const std::function<double(double)>& f) {
  constexpr int kPanels = 64;
  double sum = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    sum += boost::math::quadrature::gauss<double, 20>::integrate(f, static_cast<double>(p) / kPanels,
                                                                 static_cast<double>(p + 1) / kPanels);
  }
  return sum;
}

void wronskians(Suite& s) {
  using specfun::BesselKind;
  for (int m = 0; m <= specfun::kMaxOrder; m += 3) {
    for (int k = 0; k <= 30; ++k) {
      const double x = 1e-2 * std::pow(1e4, k / 30.0);
      const auto jy = specfun::bessel_jy(m, x);
      s.check(std::abs(0.5 * pi * x * (jy.j * jy.yp - jy.jp * jy.y) - 1.0), fmt::format("J/Y m={} x={}", m, x));
      const auto i = specfun::bessel_i_scaled(m, x);
      const auto kk = specfun::bessel_k_scaled(m, x);
      s.check(std::abs(x * (i.value * kk.derivative - i.derivative * kk.value) + 1.0),
              fmt::format("I/K m={} x={}", m, x));
    }
  }
}

void orthonormality(Suite& s) {
  constexpr int kModes = 40;
  for (auto kind : {modes::BasisKind::DD, modes::BasisKind::ND, modes::BasisKind::NN}) {
    for (int i = 0; i < kModes; ++i) {
      for (int j = i; j < kModes; ++j) {
        const double g = integrate_unit([&](double z) { return modes::chi(kind, i, z) * modes::chi(kind, j, z); });
        s.check(std::abs(g - (i == j ? 1.0 : 0.0)), fmt::format("{} ({}, {})", modes::to_string(kind), i, j));
      }
    }
  }
}

void coupling_oracle(Suite& s) {
  constexpr int kModes = 40;
  for (auto which : {modes::CouplingKind::P1, modes::CouplingKind::P2, modes::CouplingKind::P3}) {
    const auto p = modes::coupling_matrix(which, kModes);
    const auto rb = modes::row_basis(which);
    const auto cb = modes::column_basis(which);
    for (int i = 0; i < kModes; ++i) {
      for (int j = 0; j < kModes; ++j) {
        const double q = integrate_unit([&](double z) { return modes::chi(rb, i, z) * modes::chi(cb, j, z); });
        s.check(std::abs(p(i, j) - q), fmt::format("{} ({}, {})", modes::to_string(which), i, j));
      }
    }
  }
}

std::vector<double> energies(const Geometry& g, int m) {
  std::vector<double> e;
  for (const auto& st : matcher::search_bound_states(g, m, matcher::kDefaultTruncation).states) e.push_back(st.energy);
  return e;
}

void compare_spectra(Suite& s, const std::vector<double>& x, const std::vector<double>& y, const std::string& what) {
  if (x.size() != y.size()) {
    s.fail(fmt::format("{}: {} vs {} states", what, x.size(), y.size()));
    return;
  }
  for (std::size_t i = 0; i < x.size(); ++i) s.check(std::abs(x[i] - y[i]), fmt::format("{} n={}", what, i));
}

void limits(Suite& s) {
  constexpr double a = 5.0;
  // The b -> a difference is linear in the ring width a - b.
  compare_spectra(s, energies(Geometry::two_distinct(a, 1e-3 * a), 0), energies(Geometry::one_window(a), 0),
                  "b = 1e-3 a vs one window");
  compare_spectra(s, energies(Geometry::two_distinct(a, (1.0 - 1e-6) * a), 0), energies(Geometry::two_equal(a), 0),
                  "b = (1 - 1e-6) a vs two equal");
}

void brackets(Suite& s) {
  const std::vector<std::pair<Geometry, int>> cases{
      {Geometry::two_equal(2.0), 0}, {Geometry::two_equal(3.0), 0},        {Geometry::two_equal(5.0), 0},
      {Geometry::two_equal(3.0), 1}, {Geometry::one_window(3.0), 0},       {Geometry::one_window(3.0), 2},
      {Geometry::two_distinct(5.0, 2.5), 0}, {Geometry::two_distinct(5.0, 2.5), 1}};
  for (const auto& [g, m] : cases) {
    for (const auto& st : matcher::search_bound_states(g, m, matcher::kDefaultTruncation).states) {
      const auto c = sweeps::certify_bracket(g, m, st.n, st.energy);
      const double excess = std::max(c.lower - c.energy, c.energy - c.upper);
      s.check(std::max(excess, 0.0), fmt::format("{} m={} n={} E={:.8f} in [{:.8f}, {:.8f}]", g.describe(), m, st.n,
                                                 c.energy, c.lower, c.upper));
    }
  }
}

void convergence(Suite& s) {
  for (const auto& g : {Geometry::one_window(0.74), Geometry::two_equal(0.56), Geometry::two_equal(3.0),
                        Geometry::two_distinct(5.0, 2.5)}) {
    const auto e40 = matcher::search_bound_states(g, 0, 40).states;
    const auto e60 = matcher::search_bound_states(g, 0, 60).states;
    if (e40.size() != e60.size()) {
      s.fail(fmt::format("{}: {} states at N=40, {} at N=60", g.describe(), e40.size(), e60.size()));
      continue;
    }
    for (std::size_t i = 0; i < e40.size(); ++i) {
      s.check(std::abs(e40[i].energy - e60[i].energy), fmt::format("{} n={}", g.describe(), i));
    }
  }
}

}  // namespace

std::vector<SuiteResult> run_validation() {
  struct Entry {
    const char* name;
    double tolerance;
    void (*body)(Suite&);
  };
  const Entry entries[] = {
      {"bessel-wronskian", 1e-10, wronskians},     {"transverse-orthonormality", 1e-10, orthonormality},
      {"coupling-oracle", 1e-10, coupling_oracle}, {"limit-consistency", 1e-5, limits},
      {"bracket-certificates", 0.0, brackets},     {"truncation-convergence", 1e-5, convergence},
  };
  std::vector<SuiteResult> out;
  for (const auto& e : entries) {
    Suite s(e.name, e.tolerance);
    const auto start = std::chrono::steady_clock::now();
    try {
      e.body(s);
    } catch (const std::exception& ex) {
      s.fail(fmt::format("aborted: {}", ex.what()));
    }
    s.result().wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(s.result()));
  }
  return out;
}

Json validation_report(const std::vector<SuiteResult>& suites) {
  Json list = Json::array();
  bool pass = true;
  for (const auto& s : suites) {
    pass = pass && s.pass;
    list.push_back({{"name", s.name},
                    {"pass", s.pass},
                    {"checks", s.checks},
                    {"failures", s.failures},
                    {"worst", s.worst},
                    {"tolerance", s.tolerance},
                    {"wall_ms", s.wall_ms},
                    {"messages", s.messages}});
  }
  Json report;
  report["schema"] = kValidateSchema;
  report["pass"] = pass;
  report["suites"] = std::move(list);
  return report;
}

}  // namespace waveguide::cli
