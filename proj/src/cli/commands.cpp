#include "waveguide/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <ostream>
#include <set>

#include "waveguide/errors.hpp"
#include "waveguide/matcher.hpp"

namespace waveguide::cli {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

matcher::SearchOptions search_options(const RunConfig& c) {
  matcher::SearchOptions o;
  o.extrapolate = c.extrapolate;
  o.scan_step = c.scan_step;
  o.root_acceptance = c.root_acceptance;
  o.check_convergence = c.check_convergence;
  return o;
}

// Non-finite values (an unbounded bracket) become null.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json intervals(const std::vector<sweeps::Interval>& list) {
  Json out = Json::array();
  for (const auto& i : list) out.push_back({i.lo, i.hi});
  return out;
}

std::string g17(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

Json echo(const RunConfig& c) {
  Json j;
  j["command"] = to_string(c.command);
  j["geometry"] = {{"config", to_string(c.geometry)}, {"a", c.a}, {"b", c.b}};
  j["solver"] = {{"m", c.m_list},
                 {"truncation", c.truncation},
                 {"extrapolate", c.extrapolate},
                 {"e_lo", c.e_lo},
                 {"e_hi", c.e_hi},
                 {"scan_step", c.scan_step},
                 {"root_acceptance", c.root_acceptance},
                 {"check_convergence", c.check_convergence}};
  if (c.command == Command::Wavefunction) {
    j["wavefunction"] = {
        {"n", c.n}, {"grid_nr", c.grid_nr}, {"grid_nz", c.grid_nz}, {"grid_r_max", c.grid_r_max}};
  }
  if (c.command == Command::Sweep) {
    j["sweep"] = {{"axis", to_string(c.axis)},
                  {"grid", c.grid},
                  {"mean_radius", c.mean_radius},
                  {"max_levels", c.max_levels},
                  {"plateau_threshold", c.plateau_threshold},
                  {"radius_plateau_threshold", c.radius_plateau_threshold},
                  {"min_plateau_width", c.min_plateau_width},
                  {"critical_levels", c.critical_levels},
                  {"critical_epsilon", c.critical_epsilon},
                  {"fit_grid", c.fit_grid}};
  }
  return j;
}

Json cmd_spectrum(const RunConfig& c) {
  validate(c);
  const auto start = Clock::now();
  const Geometry geom = c.geometry_value();
  Json states_json = Json::array();
  Json warnings = Json::array();
  std::optional<double> delta;
  for (int m : c.m_list) {
    auto report = matcher::search_bound_states(geom, std::abs(m), c.truncation, {c.e_lo, c.e_hi}, search_options(c));
    for (const auto& w : report.warnings) warnings.push_back(w);
    if (report.convergence_delta) delta = std::max(delta.value_or(0.0), *report.convergence_delta);
    for (const auto& sol : report.states) {
      auto state = states::normalize(sol);
      state.m = m;
      const auto residual = states::matching_residual(state);
      const auto bracket = sweeps::certify_bracket(state);
      states_json.push_back({{"m", m},
                             {"n", state.n},
                             {"energy", state.energy},
                             {"mean_radius", states::mean_radius(state)},
                             {"residual_value", residual.max_value()},
                             {"residual_derivative", residual.max_derivative()},
                             {"bracket",
                              {{"lower", bracket.lower},
                               {"upper", number(bracket.upper)},
                               {"binding", bracket.binding},
                               {"pass", bracket.pass}}}});
    }
  }
  Json record;
  record["schema"] = kSpectrumSchema;
  record["config"] = echo(c);
  record["states"] = std::move(states_json);
  record["warnings"] = std::move(warnings);
  record["provenance"] = {{"truncation", c.truncation},
                          {"convergence_delta", delta ? Json(*delta) : Json(nullptr)},
                          {"wall_ms", c.timings ? Json(elapsed_ms(start)) : Json(nullptr)}};
  return record;
}

states::FieldGrid cmd_wavefunction(const RunConfig& c) {
  validate(c);
  if (c.m_list.size() != 1) throw ConfigError("solver.m: the wavefunction command takes exactly one m");
  const Geometry geom = c.geometry_value();
  const int m = c.m_list.front();
  auto o = search_options(c);
  o.max_states = c.n + 1;
  const auto report = matcher::search_bound_states(geom, std::abs(m), c.truncation, {c.e_lo, c.e_hi}, o);
  if (static_cast<int>(report.states.size()) <= c.n) {
    throw ConfigError(fmt::format("wavefunction.n: no state n={} for m={} in {}; {} bound state(s) found", c.n, m,
                                  geom.describe(), report.states.size()));
  }
  auto state = states::normalize(report.states[static_cast<std::size_t>(c.n)]);
  state.m = m;
  return states::field_grid(state, {c.grid_nr, c.grid_nz, c.grid_r_max});
}

void write_field_csv(const states::FieldGrid& grid, std::ostream& out) {
  out << "r,z,f\n";
  for (std::size_t i = 0; i < grid.r.size(); ++i) {
    for (std::size_t k = 0; k < grid.z.size(); ++k) {
      out << g17(grid.r[i]) << ',' << g17(grid.z[k]) << ','
          << g17(grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))) << '\n';
    }
  }
}

SweepOutput cmd_sweep(const RunConfig& c) {
  validate(c);
  const auto start = Clock::now();
  sweeps::SweepOptions o;
  o.truncation = c.truncation;
  o.extrapolate = c.extrapolate;
  o.window = {c.e_lo, c.e_hi};
  o.max_levels = c.max_levels;
  o.mean_radius = c.mean_radius;
  o.plateau_threshold = c.plateau_threshold;
  o.radius_plateau_threshold = c.radius_plateau_threshold;
  o.min_plateau_width = c.min_plateau_width;

  SweepOutput output;
  auto& r = output.result;
  if (c.axis == SweepAxis::OuterRadius) {
    std::vector<int> orders;
    for (int m : c.m_list) orders.push_back(std::abs(m));
    r = sweeps::sweep_outer(c.geometry, c.grid, orders, o);
  } else {
    std::vector<double> b(c.grid.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = c.grid[i] * c.a;
    b.back() = std::min(b.back(), c.a);
    r = sweeps::sweep_inner(c.a, b, std::abs(c.m_list.front()), o);
  }
  std::vector<std::string> warnings = r.warnings;

  Json critical = Json::array();
  if (c.critical_levels > 0) {
    sweeps::CriticalOptions co;
    co.epsilon = c.critical_epsilon;
    co.extrapolate = c.extrapolate;
    std::set<int> seen;
    for (int m : c.m_list) {
      if (!seen.insert(std::abs(m)).second) continue;
      for (int n = 0; n < c.critical_levels; ++n) {
        try {
          const auto cr = sweeps::critical_radius(c.geometry, std::abs(m), n, c.truncation, co);
          critical.push_back({{"m", cr.m},
                              {"n", cr.n},
                              {"radius", cr.radius},
                              {"raw_radius", cr.raw_radius},
                              {"epsilon", cr.epsilon},
                              {"truncation", cr.truncation}});
        } catch (const Error& e) {
          warnings.push_back(fmt::format("critical radius (m={}, n={}): {}", std::abs(m), n, e.what()));
        }
      }
    }
  }

  Json fit = nullptr;
  if (!c.fit_grid.empty()) {
    try {
      const auto f = sweeps::fit_small_radius_constant(c.fit_grid, c.truncation, c.extrapolate);
      fit = {{"c", f.c},
             {"spread", f.spread},
             {"min", f.min},
             {"max", f.max},
             {"standard_error", f.standard_error},
             {"a", f.a},
             {"energy", f.energy},
             {"constants", f.constants}};
    } catch (const Error& e) {
      warnings.push_back(fmt::format("small-radius fit: {}", e.what()));
    }
  }

  Json curves = Json::array();
  for (const auto& cv : r.curves) {
    curves.push_back({{"m", cv.m},
                      {"n", cv.n},
                      {"samples", cv.axis.size()},
                      {"plateaus", intervals(cv.plateaus)},
                      {"radius_plateaus", intervals(cv.radius_plateaus)}});
  }
  Json emergences = Json::array();
  for (const auto& e : r.emergences) emergences.push_back({{"m", e.m}, {"n", e.n}, {"between", {e.between.lo, e.between.hi}}});
  Json gaps = Json::array();
  for (const auto& g : r.gaps) {
    gaps.push_back({{"m", g.m}, {"lower", g.lower}, {"upper", g.upper}, {"gap", g.gap}, {"at", g.at}});
  }

  auto& a = output.analytics;
  a["schema"] = kSweepSchema;
  a["config"] = echo(c);
  a["axis"] = to_string(c.axis);
  a["outer_radius"] = c.axis == SweepAxis::InnerRatio ? Json(c.a) : Json(nullptr);
  a["curves"] = std::move(curves);
  a["emergences"] = std::move(emergences);
  a["gaps"] = std::move(gaps);
  a["critical_radii"] = std::move(critical);
  a["fit"] = std::move(fit);
  a["warnings"] = warnings;
  a["partial"] = !warnings.empty();
  a["provenance"] = {{"truncation", c.truncation},
                     {"wall_ms", c.timings ? Json(elapsed_ms(start)) : Json(nullptr)}};
  return output;
}

void write_sweep_csv(const sweeps::SweepResult& result, std::ostream& out) {
  out << "axis,state_m,state_n,E,mean_r\n";
  for (const auto& cv : result.curves) {
    for (std::size_t i = 0; i < cv.axis.size(); ++i) {
      out << g17(cv.axis[i]) << ',' << cv.m << ',' << cv.n << ',' << g17(cv.energy[i]) << ',';
      if (i < cv.mean_radius.size()) out << g17(cv.mean_radius[i]);
      out << '\n';
    }
  }
}

}  // namespace waveguide::cli
