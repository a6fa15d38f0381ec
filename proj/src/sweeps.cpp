#include "waveguide/sweeps.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>

#include "waveguide/errors.hpp"
#include "waveguide/specfun.hpp"

namespace waveguide::sweeps {
namespace {

using std::numbers::pi;

void check_grid(const std::vector<double>& grid, const char* what) {
  if (grid.empty()) throw DomainError(fmt::format("{} grid is empty", what));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) {
      throw DomainError(fmt::format("{} grid values must be positive and finite", what));
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError(fmt::format("{} grid must be increasing", what));
  }
}

matcher::SearchOptions search_options(const SweepOptions& o) {
  matcher::SearchOptions s;
  s.extrapolate = o.extrapolate;
  s.richardson_levels = o.richardson_levels;
  s.max_states = o.max_levels;
  return s;
}

StateCurve& curve_for(std::map<std::pair<int, int>, StateCurve>& curves, int m, int n) {
  auto& c = curves[{m, n}];
  c.m = m;
  c.n = n;
  return c;
}

void finish(SweepResult& result, std::map<std::pair<int, int>, StateCurve>& curves) {
  for (auto& [key, c] : curves) {
    for (std::size_t i = 1; i < c.energy.size(); ++i) {
      if (c.energy[i] > c.energy[i - 1] + 1e-9) {
        result.warnings.push_back(fmt::format("level (m={}, n={}) rises from {} to {} between axis {} and {}", c.m,
                                              c.n, c.energy[i - 1], c.energy[i], c.axis[i - 1], c.axis[i]));
      }
    }
    if (!c.axis.empty() && c.axis.front() > result.grid.front()) {
      const auto it = std::find(result.grid.begin(), result.grid.end(), c.axis.front());
      result.emergences.push_back({c.m, c.n, {*(it - 1), *it}});
    }
    result.curves.push_back(std::move(c));
  }
  // Adjacent-level gaps at shared axis points.
  for (const auto& upper : result.curves) {
    if (upper.n == 0) continue;
    const StateCurve* lower = result.curve(upper.m, upper.n - 1);
    if (lower == nullptr) continue;
    Gap g{upper.m, upper.n - 1, upper.n, std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t i = 0; i < upper.axis.size(); ++i) {
      const auto it = std::find(lower->axis.begin(), lower->axis.end(), upper.axis[i]);
      if (it == lower->axis.end()) continue;
      const double d = upper.energy[i] - lower->energy[static_cast<std::size_t>(it - lower->axis.begin())];
      if (d < g.gap) {
        g.gap = d;
        g.at = upper.axis[i];
      }
    }
    if (std::isfinite(g.gap)) result.gaps.push_back(g);
  }
}

void flag_close_levels(SweepResult& result, const std::vector<matcher::NullSpaceSolution>& states, double axis,
                       double resolution) {
  for (std::size_t i = 1; i < states.size(); ++i) {
    if (states[i].energy - states[i - 1].energy < resolution) {
      result.warnings.push_back(fmt::format("continuation ambiguity at axis {}: m={} levels {} and {} within {}", axis,
                                            states[i].m, i - 1, i, resolution));
    }
  }
}

Geometry single_geometry(Config config, double a) {
  switch (config) {
    case Config::OneWindow: return Geometry::one_window(a);
    case Config::TwoEqual: return Geometry::two_equal(a);
    case Config::TwoDistinct: break;
  }
  throw DomainError("this operation supports the one-window and two-equal configurations only");
}

// Nearest sign change of f around x0 within [lo, hi], stepping outward.
std::optional<double> nearest_sign_change(const std::function<int(double)>& f, double x0, double step, double reach,
                                          double lo, double hi, double tol) {
  const auto refine = [&](double l, double h, int sl) {
    while (h - l > tol) {
      const double mid = 0.5 * (l + h);
      if (f(mid) == sl) {
        l = mid;
      } else {
        h = mid;
      }
    }
    return 0.5 * (l + h);
  };
  const int s0 = f(x0);
  double left = x0, right = x0;
  int s_left = s0, s_right = s0;
  for (int k = 1; k * step <= reach + 1e-15; ++k) {
    if (right < hi) {
      const double x = std::min(x0 + k * step, hi);
      const int s = f(x);
      if (s != s_right) return refine(right, x, s_right);
      right = x;
    }
    if (left > lo) {
      const double x = std::max(x0 - k * step, lo);
      const int s = f(x);
      if (s != s_left) return refine(x, left, s);
      left = x;
    }
  }
  return std::nullopt;
}

}  // namespace

const StateCurve* SweepResult::curve(int m, int n) const {
  for (const auto& c : curves) {
    if (c.m == m && c.n == n) return &c;
  }
  return nullptr;
}

std::vector<Interval> detect_plateaus(const std::vector<double>& x, const std::vector<double>& y, double threshold,
                                      double min_width, bool logarithmic) {
  std::vector<Interval> out;
  if (x.size() != y.size()) throw DomainError("plateau detection needs equally long x and y");
  std::optional<double> start;
  double end = 0.0;
  const auto close = [&] {
    if (start && end - *start >= min_width * (1.0 - 1e-9)) out.push_back({*start, end});
    start.reset();
  };
  for (std::size_t i = 1; i < x.size(); ++i) {
    double slope = (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
    if (logarithmic) slope /= 0.5 * (y[i] + y[i - 1]);
    if (std::abs(slope) < threshold) {
      if (!start) start = x[i - 1];
      end = x[i];
    } else {
      close();
    }
  }
  close();
  return out;
}

SweepResult sweep_outer(Config config, const std::vector<double>& a_grid, const std::vector<int>& m_list,
                        const SweepOptions& options) {
  check_grid(a_grid, "outer radius");
  if (m_list.empty()) throw DomainError("m list is empty");
  SweepResult result;
  result.axis = Axis::OuterRadius;
  result.config = config;
  result.grid = a_grid;
  std::map<std::pair<int, int>, StateCurve> curves;
  for (double a : a_grid) {
    const Geometry geom = single_geometry(config, a);
    for (int m : m_list) {
      const int am = std::abs(m);
      auto report = matcher::search_bound_states(geom, am, options.truncation, options.window, search_options(options));
      for (auto& w : report.warnings) result.warnings.push_back(fmt::format("a={}: {}", a, w));
      flag_close_levels(result, report.states, a, 5e-4);
      for (const auto& s : report.states) {
        auto& c = curve_for(curves, am, s.n);
        c.axis.push_back(a);
        c.energy.push_back(s.energy);
        if (options.mean_radius) c.mean_radius.push_back(states::mean_radius(states::normalize(s)));
      }
    }
  }
  finish(result, curves);
  return result;
}

SweepResult sweep_inner(double a, const std::vector<double>& b_grid, int m, const SweepOptions& options) {
  check_grid(b_grid, "inner radius");
  if (b_grid.back() > a) throw DomainError(fmt::format("inner radii must not exceed a = {}", a));
  SweepResult result;
  result.axis = Axis::InnerRatio;
  result.config = Config::TwoDistinct;
  result.outer_radius = a;
  const int am = std::abs(m);
  std::map<std::pair<int, int>, StateCurve> curves;
  std::size_t previous_count = 0;
  for (double b : b_grid) {
    const double x = b / a;
    result.grid.push_back(x);
    const Geometry geom = Geometry::from_radii(a, b);
    auto report = matcher::search_bound_states(geom, am, options.truncation, options.window, search_options(options));
    for (auto& w : report.warnings) result.warnings.push_back(fmt::format("b/a={}: {}", x, w));
    flag_close_levels(result, report.states, x, 5e-4);
    if (report.states.size() < previous_count) {
      result.warnings.push_back(fmt::format("continuation ambiguity at b/a={}: level count dropped from {} to {}", x,
                                            previous_count, report.states.size()));
    }
    previous_count = report.states.size();
    for (const auto& s : report.states) {
      auto& c = curve_for(curves, am, s.n);
      c.axis.push_back(x);
      c.energy.push_back(s.energy);
      if (options.mean_radius) c.mean_radius.push_back(states::mean_radius(states::normalize(s)));
    }
  }
  for (auto& [key, c] : curves) {
    c.plateaus = detect_plateaus(c.axis, c.energy, options.plateau_threshold, options.min_plateau_width, true);
    if (!c.mean_radius.empty()) {
      c.radius_plateaus =
          detect_plateaus(c.axis, c.mean_radius, options.radius_plateau_threshold, options.min_plateau_width, true);
    }
  }
  finish(result, curves);
  return result;
}

CriticalRadius critical_radius(Config config, int m, int n, int truncation, const CriticalOptions& options) {
  if (n < 0) throw DomainError("level index must be >= 0");
  if (!(options.epsilon >= 0.0 && options.epsilon < 1.0)) throw DomainError("epsilon must lie in [0, 1)");
  if (!(options.a_lo > 0.0 && options.a_hi > options.a_lo && options.scan_step > 0.0)) {
    throw DomainError("critical radius search needs 0 < a_lo < a_hi and a positive step");
  }
  single_geometry(config, 1.0);
  const int am = std::abs(m);
  const auto sign = [&](double a, int nt) {
    const Geometry g = single_geometry(config, a);
    const auto q = options.epsilon > 0.0 ? matcher::assemble(g, 1.0 - options.epsilon, am, nt)
                                         : matcher::assemble_threshold(g, am, nt);
    return matcher::det_indicator(q, false).sign;
  };
  constexpr double kTol = 1e-9;

  // Exactly at threshold the m = 0 ground state is bound for every a > 0,
  // so the first sign change in a belongs to level 1.
  const int needed = options.epsilon == 0.0 && am == 0 ? n : n + 1;
  if (needed == 0) throw DomainError("the m = 0 ground state lies below E = 1 for every a > 0");

  CriticalRadius out{config, am, n, 0.0, 0.0, options.epsilon, truncation};
  int changes = 0;
  double a_prev = options.a_lo;
  int s_prev = sign(a_prev, truncation);
  bool found = false;
  while (a_prev < options.a_hi) {
    const double a = std::min(a_prev + options.scan_step, options.a_hi);
    const int s = sign(a, truncation);
    if (s != s_prev && ++changes == needed) {
      double lo = a_prev, hi = a;
      while (hi - lo > kTol) {
        const double mid = 0.5 * (lo + hi);
        if (sign(mid, truncation) == s_prev) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      out.raw_radius = 0.5 * (lo + hi);
      found = true;
      break;
    }
    a_prev = a;
    s_prev = s;
  }
  if (!found) {
    throw NotFoundError(fmt::format("level (m={}, n={}) of {} does not reach E = 1 - {} for a in [{}, {}]", am, n,
                                    to_string(config), options.epsilon, options.a_lo, options.a_hi));
  }
  out.radius = out.raw_radius;
  if (options.extrapolate) {
    if (options.richardson_levels < 1 || options.richardson_levels > 3) {
      throw DomainError(fmt::format("Richardson levels must be 1, 2 or 3, got {}", options.richardson_levels));
    }
    std::vector<double> table{out.raw_radius};
    int nt = truncation;
    for (int k = 0; k < options.richardson_levels; ++k) {
      nt *= 2;
      const auto fine = nearest_sign_change([&](double a) { return sign(a, nt); }, table.back(), 0.005, 0.25,
                                            options.a_lo, options.a_hi, kTol);
      if (!fine) throw NotFoundError(fmt::format("no emergence radius near {} at truncation {}", table.back(), nt));
      table.push_back(*fine);
    }
    out.radius = matcher::richardson_limit(std::move(table));
  }
  return out;
}

SmallRadiusFit fit_small_radius_constant(const std::vector<double>& a, const std::vector<double>& energy) {
  if (a.size() != energy.size() || a.empty()) throw DomainError("fit needs equally long, nonempty a and E");
  SmallRadiusFit fit;
  fit.a = a;
  fit.energy = energy;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double gap = 1.0 - energy[i];
    if (!(gap >= 1e-12)) {
      throw RegimeError(fmt::format("1 - E = {:.3e} at a = {} is below the resolvable 1e-12", gap, a[i]));
    }
    fit.constants.push_back(-a[i] * a[i] * a[i] * std::log(gap));
  }
  const double k = static_cast<double>(fit.constants.size());
  double sum = 0.0;
  for (double c : fit.constants) sum += c;
  fit.c = sum / k;
  double ss = 0.0;
  for (double c : fit.constants) ss += (c - fit.c) * (c - fit.c);
  fit.standard_error = k > 1 ? std::sqrt(ss / (k - 1.0) / k) : 0.0;
  fit.min = *std::min_element(fit.constants.begin(), fit.constants.end());
  fit.max = *std::max_element(fit.constants.begin(), fit.constants.end());
  fit.spread = (fit.max - fit.min) / std::abs(fit.c);
  return fit;
}

SmallRadiusFit fit_small_radius_constant(const std::vector<double>& a_grid, int truncation, bool extrapolate) {
  check_grid(a_grid, "small radius");
  std::vector<double> energies;
  matcher::SearchOptions o;
  o.extrapolate = extrapolate;
  o.max_states = 1;
  for (double a : a_grid) {
    const auto states = matcher::find_bound_states(Geometry::one_window(a), 0, truncation, {0.25, 1.0}, o);
    if (states.empty()) {
      throw RegimeError(fmt::format("no resolvable ground state below 1 - 1e-9 at a = {}", a));
    }
    energies.push_back(states.front().energy);
  }
  return fit_small_radius_constant(a_grid, energies);
}

BracketCertificate certify_bracket(const Geometry& geom, int m, int n, double energy) {
  geom.validate();
  if (n < 0) throw DomainError("level index must be >= 0");
  const int am = std::abs(m);
  BracketCertificate c{am, n, energy, 0.0, std::numeric_limits<double>::infinity(), false, false};
  if (n > 0) {
    const double x = specfun::bessel_zero(am, n).value;
    c.lower = std::pow(x / (pi * geom.a), 2);
  }
  const double b = geom.config == Config::OneWindow ? 0.0 : geom.b;
  if (b > 0.0) {
    const double x = specfun::bessel_zero(am, n + 1).value;
    c.upper = std::pow(x / (pi * b), 2);
  }
  c.binding = c.upper < 1.0;
  c.pass = c.lower <= energy && energy <= c.upper;
  return c;
}

BracketCertificate certify_bracket(const states::BoundState& state) {
  return certify_bracket(state.geom, state.m, state.n, state.energy);
}

}  // namespace waveguide::sweeps
