#include "waveguide/cli/config.hpp"

#include <algorithm>
#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <set>

#include "waveguide/errors.hpp"

namespace waveguide::cli {
namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"geometry", {"config", "a", "b"}},
      {"solver",
       {"m", "truncation", "extrapolate", "e_lo", "e_hi", "scan_step", "root_acceptance", "check_convergence"}},
      {"wavefunction", {"n", "grid_nr", "grid_nz", "grid_r_max"}},
      {"sweep",
       {"axis", "grid", "grid_lo", "grid_hi", "grid_count", "grid_spacing", "mean_radius", "max_levels",
        "plateau_threshold", "radius_plateau_threshold", "min_plateau_width", "critical_levels", "critical_epsilon",
        "fit_grid"}},
      {"output", {"out", "analytics", "timings"}},
  };
  return keys;
}

class Reader {
 public:
  Reader(const Tree& tree, std::string_view source) : tree_(tree), source_(source) {}

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw ConfigError(fmt::format("{}: {}: {}", source_, field, what));
  }

  const std::string* raw(const std::string& field) const {
    const auto node = tree_.get_optional<std::string>(Tree::path_type(field, '.'));
    if (!node) return nullptr;
    cache_ = boost::algorithm::trim_copy(*node);
    return &cache_;
  }

  void get(const std::string& field, double& out) const {
    if (const auto* s = raw(field)) out = to_double(field, *s);
  }

  void get(const std::string& field, int& out) const {
    if (const auto* s = raw(field)) out = to_int(field, *s);
  }

  void get(const std::string& field, bool& out) const {
    const auto* s = raw(field);
    if (s == nullptr) return;
    const std::string v = boost::algorithm::to_lower_copy(*s);
    if (v == "true" || v == "1" || v == "yes" || v == "on") {
      out = true;
    } else if (v == "false" || v == "0" || v == "no" || v == "off") {
      out = false;
    } else {
      fail(field, fmt::format("expected a boolean, got '{}'", *s));
    }
  }

  void get(const std::string& field, std::string& out) const {
    if (const auto* s = raw(field)) out = *s;
  }

  void get(const std::string& field, std::vector<double>& out) const {
    if (const auto* s = raw(field)) {
      out.clear();
      for (const auto& item : split(*s)) out.push_back(to_double(field, item));
    }
  }

  void get(const std::string& field, std::vector<int>& out) const {
    if (const auto* s = raw(field)) {
      out.clear();
      for (const auto& item : split(*s)) out.push_back(to_int(field, item));
    }
  }

 private:
  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> parts;
    if (boost::algorithm::trim_copy(s).empty()) return parts;
    boost::algorithm::split(parts, s, boost::algorithm::is_any_of(","));
    for (auto& p : parts) boost::algorithm::trim(p);
    return parts;
  }

  double to_double(const std::string& field, const std::string& s) const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
      fail(field, fmt::format("expected a finite number, got '{}'", s));
    }
    return v;
  }

  int to_int(const std::string& field, const std::string& s) const {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(field, fmt::format("expected an integer, got '{}'", s));
    return v;
  }

  const Tree& tree_;
  std::string source_;
  mutable std::string cache_;
};

Config parse_config_tag(const Reader& in, const std::string& tag) {
  if (tag == "one") return Config::OneWindow;
  if (tag == "two-equal") return Config::TwoEqual;
  if (tag == "two-distinct") return Config::TwoDistinct;
  in.fail("geometry.config", fmt::format("expected one, two-equal or two-distinct, got '{}'", tag));
}

std::vector<double> spaced_grid(const Reader& in, double lo, double hi, int count, const std::string& spacing) {
  if (count < 1) in.fail("sweep.grid_count", "must be >= 1");
  if (!(lo > 0.0 && hi >= lo)) in.fail("sweep.grid_lo", "needs 0 < grid_lo <= grid_hi");
  std::vector<double> grid;
  if (count == 1) return {lo};
  for (int i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / (count - 1);
    if (spacing == "log") {
      grid.push_back(lo * std::pow(hi / lo, t));
    } else if (spacing == "linear") {
      grid.push_back(lo + (hi - lo) * t);
    } else {
      in.fail("sweep.grid_spacing", fmt::format("expected linear or log, got '{}'", spacing));
    }
  }
  grid.back() = hi;
  return grid;
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Spectrum: return "spectrum";
    case Command::Wavefunction: return "wavefunction";
    case Command::Sweep: return "sweep";
    case Command::Validate: return "validate";
  }
  return "?";
}

std::string_view to_string(SweepAxis axis) { return axis == SweepAxis::OuterRadius ? "a" : "b"; }

Geometry RunConfig::geometry_value() const {
  switch (geometry) {
    case Config::OneWindow: return Geometry::one_window(a);
    case Config::TwoEqual: return Geometry::two_equal(a);
    case Config::TwoDistinct: return Geometry::from_radii(a, b);
  }
  return Geometry::one_window(a);
}

Tree read_ini(const std::string& path) {
  Tree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}:{}: {}", e.filename(), e.line(), e.message()));
  }
  return tree;
}

RunConfig from_tree(Command command, const Tree& tree, std::string_view source) {
  const Reader in(tree, source);
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) in.fail(section, "unknown section");
    if (!body.data().empty() && body.empty()) in.fail(section, "key outside any section");
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) in.fail(section + "." + key, "unknown key");
    }
  }

  RunConfig c;
  c.command = command;
  std::string tag = "one";
  in.get("geometry.config", tag);
  c.geometry = parse_config_tag(in, tag);
  in.get("geometry.a", c.a);
  in.get("geometry.b", c.b);

  in.get("solver.m", c.m_list);
  in.get("solver.truncation", c.truncation);
  in.get("solver.extrapolate", c.extrapolate);
  in.get("solver.e_lo", c.e_lo);
  in.get("solver.e_hi", c.e_hi);
  in.get("solver.scan_step", c.scan_step);
  in.get("solver.root_acceptance", c.root_acceptance);
  in.get("solver.check_convergence", c.check_convergence);

  in.get("wavefunction.n", c.n);
  in.get("wavefunction.grid_nr", c.grid_nr);
  in.get("wavefunction.grid_nz", c.grid_nz);
  in.get("wavefunction.grid_r_max", c.grid_r_max);

  std::string axis = "a";
  in.get("sweep.axis", axis);
  if (axis == "a") {
    c.axis = SweepAxis::OuterRadius;
  } else if (axis == "b") {
    c.axis = SweepAxis::InnerRatio;
  } else {
    in.fail("sweep.axis", fmt::format("expected a or b, got '{}'", axis));
  }
  if (in.raw("sweep.grid") != nullptr) {
    in.get("sweep.grid", c.grid);
  } else if (c.axis == SweepAxis::OuterRadius) {
    double lo = 0.2, hi = 20.0;
    int count = 150;
    std::string spacing = "log";
    in.get("sweep.grid_lo", lo);
    in.get("sweep.grid_hi", hi);
    in.get("sweep.grid_count", count);
    in.get("sweep.grid_spacing", spacing);
    c.grid = spaced_grid(in, lo, hi, count, spacing);
  } else {
    int count = 200;
    std::string spacing = "linear";
    in.get("sweep.grid_count", count);
    double lo = 1.0 / std::max(count, 1), hi = 1.0;
    in.get("sweep.grid_lo", lo);
    in.get("sweep.grid_hi", hi);
    in.get("sweep.grid_spacing", spacing);
    c.grid = spaced_grid(in, lo, hi, count, spacing);
  }
  in.get("sweep.mean_radius", c.mean_radius);
  in.get("sweep.max_levels", c.max_levels);
  in.get("sweep.plateau_threshold", c.plateau_threshold);
  in.get("sweep.radius_plateau_threshold", c.radius_plateau_threshold);
  in.get("sweep.min_plateau_width", c.min_plateau_width);
  in.get("sweep.critical_levels", c.critical_levels);
  in.get("sweep.critical_epsilon", c.critical_epsilon);
  in.get("sweep.fit_grid", c.fit_grid);

  in.get("output.out", c.out);
  in.get("output.analytics", c.analytics);
  in.get("output.timings", c.timings);

  validate(c);
  return c;
}

void validate(const RunConfig& c) {
  const auto fail = [](const char* field, const std::string& what) {
    throw ConfigError(fmt::format("{}: {}", field, what));
  };
  if (!(c.a > 0.0)) fail("geometry.a", fmt::format("radius must be positive, got {}", c.a));
  if (c.geometry == Config::TwoDistinct) {
    if (!(c.b > 0.0)) fail("geometry.b", fmt::format("radius must be positive, got {}", c.b));
    if (c.b > c.a) fail("geometry.b", fmt::format("inner radius {} exceeds outer radius {}", c.b, c.a));
  } else if (c.b != 0.0 && !(c.geometry == Config::TwoEqual && c.b == c.a)) {
    fail("geometry.b", fmt::format("only the two-distinct configuration takes b, got {}", c.b));
  }
  if (c.m_list.empty()) fail("solver.m", "needs at least one azimuthal number");
  for (int m : c.m_list) {
    if (std::abs(m) > 30) fail("solver.m", fmt::format("|m| must be <= 30, got {}", m));
  }
  if (c.truncation < 8) fail("solver.truncation", fmt::format("must be >= 8, got {}", c.truncation));
  if (!(c.e_lo >= 0.0 && c.e_hi <= 1.0 && c.e_lo < c.e_hi)) {
    fail("solver.e_lo", fmt::format("energy interval [{}, {}] must satisfy 0 <= e_lo < e_hi <= 1", c.e_lo, c.e_hi));
  }
  if (!(c.scan_step > 0.0 && c.scan_step < 0.1)) fail("solver.scan_step", "must lie in (0, 0.1)");
  if (!(c.root_acceptance > 0.0 && c.root_acceptance < 1.0)) fail("solver.root_acceptance", "must lie in (0, 1)");

  if (c.command == Command::Wavefunction && c.m_list.size() != 1) fail("solver.m", "the wavefunction command takes exactly one m");
  if (c.n < 0) fail("wavefunction.n", "must be >= 0");
  if (c.grid_nr < 2) fail("wavefunction.grid_nr", "must be >= 2");
  if (c.grid_nz < 2) fail("wavefunction.grid_nz", "must be >= 2");
  if (c.grid_r_max != 0.0 && !(c.grid_r_max > 0.0)) fail("wavefunction.grid_r_max", "must be positive or 0");

  if (c.command == Command::Sweep) {
    if (c.grid.empty()) fail("sweep.grid", "is empty");
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      if (!(c.grid[i] > 0.0)) fail("sweep.grid", fmt::format("values must be positive, got {}", c.grid[i]));
      if (i > 0 && !(c.grid[i] > c.grid[i - 1])) fail("sweep.grid", "must be strictly increasing");
    }
    if (c.axis == SweepAxis::InnerRatio) {
      if (c.grid.back() > 1.0) fail("sweep.grid", "ratios b/a must not exceed 1");
      if (c.m_list.size() != 1) fail("solver.m", "an inner sweep takes exactly one m");
    } else if (c.geometry == Config::TwoDistinct) {
      fail("geometry.config", "an outer-radius sweep needs the one or two-equal configuration");
    }
    if (c.critical_levels < 0) fail("sweep.critical_levels", "must be >= 0");
    if (c.critical_levels > 0 && c.geometry == Config::TwoDistinct) {
      fail("sweep.critical_levels", "critical radii need the one or two-equal configuration");
    }
    if (!(c.critical_epsilon >= 0.0 && c.critical_epsilon < 1.0)) fail("sweep.critical_epsilon", "must lie in [0, 1)");
    if (!c.fit_grid.empty() && c.geometry != Config::OneWindow) {
      fail("sweep.fit_grid", "the small-radius fit applies to the one-window configuration");
    }
    for (std::size_t i = 0; i < c.fit_grid.size(); ++i) {
      if (!(c.fit_grid[i] > 0.0)) fail("sweep.fit_grid", "values must be positive");
      if (i > 0 && !(c.fit_grid[i] > c.fit_grid[i - 1])) fail("sweep.fit_grid", "must be strictly increasing");
    }
    if (!(c.plateau_threshold > 0.0)) fail("sweep.plateau_threshold", "must be positive");
    if (!(c.radius_plateau_threshold > 0.0)) fail("sweep.radius_plateau_threshold", "must be positive");
    if (!(c.min_plateau_width >= 0.0)) fail("sweep.min_plateau_width", "must be >= 0");
  }
  if (c.out.empty()) fail("output.out", "must name a file or '-'");
}

}  // namespace waveguide::cli
