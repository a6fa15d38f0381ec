#include "waveguide/cli/app.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <map>

#include "waveguide/cli/commands.hpp"
#include "waveguide/errors.hpp"
#include "waveguide/modes.hpp"

namespace waveguide::cli {
namespace {

// Flags that map one-to-one onto configuration keys.
struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

constexpr Flag kCommonFlags[] = {
    {"--geometry", "geometry.config", "one | two-equal | two-distinct"},
    {"--a", "geometry.a", "outer (or only) Neumann radius"},
    {"--b", "geometry.b", "inner Neumann radius (two-distinct)"},
    {"--m", "solver.m", "comma-separated azimuthal numbers"},
    {"--truncation", "solver.truncation", "transverse modes per region (>= 8)"},
    {"--e-lo", "solver.e_lo", "lower end of the energy search interval"},
    {"--e-hi", "solver.e_hi", "upper end of the energy search interval"},
    {"--scan-step", "solver.scan_step", "energy step of the root scan"},
    {"--out", "output.out", "output path, '-' for stdout"},
};

constexpr Flag kWavefunctionFlags[] = {
    {"--n", "wavefunction.n", "principal number of the state"},
    {"--grid-nr", "wavefunction.grid_nr", "radial grid points"},
    {"--grid-nz", "wavefunction.grid_nz", "axial grid points"},
    {"--grid-rmax", "wavefunction.grid_r_max", "outer edge of the radial grid (0: automatic)"},
};

constexpr Flag kSweepFlags[] = {
    {"--axis", "sweep.axis", "a (outer radius) or b (ratio b/a at fixed a)"},
    {"--grid-values", "sweep.grid", "explicit comma-separated grid"},
    {"--grid-lo", "sweep.grid_lo", "first grid value"},
    {"--grid-hi", "sweep.grid_hi", "last grid value"},
    {"--grid-count", "sweep.grid_count", "number of grid values"},
    {"--grid-spacing", "sweep.grid_spacing", "linear | log"},
    {"--max-levels", "sweep.max_levels", "levels kept per m (-1: all)"},
    {"--plateau-threshold", "sweep.plateau_threshold", "|d ln E / d(b/a)| marking a plateau"},
    {"--critical-levels", "sweep.critical_levels", "critical radii computed per m"},
    {"--critical-epsilon", "sweep.critical_epsilon", "critical radii are where E = 1 - epsilon"},
    {"--fit-grid", "sweep.fit_grid", "radii for the small-radius fit"},
    {"--analytics", "output.analytics", "analytics JSON path"},
};

struct Switch {
  const char* name;
  const char* key;
  const char* value;
  const char* help;
};

constexpr Switch kCommonSwitches[] = {
    {"--no-extrapolate", "solver.extrapolate", "false", "report energies at the given truncation only"},
    {"--check-convergence", "solver.check_convergence", "true", "re-solve at N + 10 and report the drift"},
    {"--timings", "output.timings", "true", "record wall time in the output"},
};

constexpr Switch kSweepSwitches[] = {
    {"--mean-radius", "sweep.mean_radius", "true", "compute mean radii along the sweep"},
};

struct Bindings {
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  std::vector<std::pair<std::string, std::pair<CLI::Option*, std::string>>> switches;
  std::string config_path;
};

template <std::size_t N>
void bind(CLI::App* app, Bindings& b, const Flag (&flags)[N]) {
  for (const auto& f : flags) b.options.emplace_back(f.key, app->add_option(f.name, b.values[f.key], f.help));
}

template <std::size_t N>
void bind(CLI::App* app, Bindings& b, const Switch (&switches)[N]) {
  for (const auto& s : switches) b.switches.push_back({s.key, {app->add_flag(s.name, s.help), s.value}});
}

Tree merged_tree(const Bindings& b) {
  Tree tree = b.config_path.empty() ? Tree{} : read_ini(b.config_path);
  for (const auto& [key, opt] : b.options) {
    if (opt->count() > 0) tree.put(Tree::path_type(key, '.'), b.values.at(key));
  }
  for (const auto& [key, sw] : b.switches) {
    if (sw.first->count() > 0) tree.put(Tree::path_type(key, '.'), sw.second);
  }
  return tree;
}

// Streams to the named file, or to `fallback` for "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path == "-") return;
    file_.open(path, std::ios::binary | std::ios::trunc);
    if (!file_) throw ConfigError(fmt::format("output.out: cannot open '{}' for writing", path));
    stream_ = &file_;
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

int execute(Command command, const Bindings& b, const std::string& fault, std::ostream& out, std::ostream& err) {
  if (command == Command::Validate) {
    if (!fault.empty() && fault != "p2-sign") throw ConfigError(fmt::format("unknown fault '{}'", fault));
    modes::testing::set_p2_sign_fault(fault == "p2-sign");
    const auto suites = run_validation();
    modes::testing::set_p2_sign_fault(false);
    const auto report = validation_report(suites);
    const RunConfig c = from_tree(command, merged_tree(b), b.config_path.empty() ? "flags" : b.config_path);
    Sink sink(c.out, out);
    *sink << report.dump(2) << '\n';
    for (const auto& s : suites) {
      err << fmt::format("{:<26} {}  {} checks, worst {:.2e} (tol {:.0e}), {:.0f} ms\n", s.name,
                         s.pass ? "PASS" : "FAIL", s.checks, s.worst, s.tolerance, s.wall_ms);
      for (const auto& m : s.messages) err << "    " << m << '\n';
    }
    return report["pass"].get<bool>() ? kExitOk : kExitValidation;
  }

  const RunConfig c = from_tree(command, merged_tree(b), b.config_path.empty() ? "flags" : b.config_path);
  switch (command) {
    case Command::Spectrum: {
      const auto record = cmd_spectrum(c);
      Sink sink(c.out, out);
      *sink << record.dump(2) << '\n';
      for (const auto& w : record["warnings"]) err << "warning: " << w.get<std::string>() << '\n';
      break;
    }
    case Command::Wavefunction: {
      const auto grid = cmd_wavefunction(c);
      Sink sink(c.out, out);
      write_field_csv(grid, *sink);
      break;
    }
    case Command::Sweep: {
      const auto result = cmd_sweep(c);
      {
        Sink sink(c.out, out);
        write_sweep_csv(result.result, *sink);
      }
      std::string analytics = c.analytics;
      if (analytics.empty() && c.out != "-") analytics = std::filesystem::path(c.out).replace_extension(".json");
      if (analytics.empty()) {
        err << "note: analytics not written; pass --analytics <path>\n";
      } else {
        Sink sink(analytics, out);
        *sink << result.analytics.dump(2) << '\n';
      }
      for (const auto& w : result.analytics["warnings"]) err << "warning: " << w.get<std::string>() << '\n';
      break;
    }
    case Command::Validate: break;
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bound states of a Dirichlet waveguide with Neumann disc windows", "waveguide"};
  app.require_subcommand(1);
  Bindings bindings;
  std::string fault;

  struct Sub {
    Command command;
    CLI::App* app;
  };
  std::vector<Sub> subs;
  const auto add = [&](Command c, const char* help) {
    auto* sub = app.add_subcommand(std::string(to_string(c)), help);
    sub->add_option("--config", bindings.config_path, "INI configuration file")->check(CLI::ExistingFile);
    subs.push_back({c, sub});
    return sub;
  };
  auto* spectrum = add(Command::Spectrum, "bound-state energies with diagnostics as JSON");
  auto* wavefunction = add(Command::Wavefunction, "field of one state on an (r, z) grid as CSV");
  auto* sweep = add(Command::Sweep, "energy curves along a or b/a as CSV plus analytics JSON");
  auto* validate = add(Command::Validate, "invariant suites; exit 4 on any failure");

  for (auto* sub : {spectrum, wavefunction, sweep}) {
    bind(sub, bindings, kCommonFlags);
    bind(sub, bindings, kCommonSwitches);
  }
  bind(wavefunction, bindings, kWavefunctionFlags);
  bind(sweep, bindings, kSweepFlags);
  bind(sweep, bindings, kSweepSwitches);
  bindings.options.emplace_back(
      "output.out", validate->add_option("--out", bindings.values["output.out"], "report path, '-' for stdout"));
  validate->add_option("--inject-fault", fault, "corrupt a component to exercise the suites")->group("");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return kExitOk;
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  Command command = Command::Spectrum;
  for (const auto& s : subs) {
    if (s.app->parsed()) command = s.command;
  }
  try {
    return execute(command, bindings, fault, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace waveguide::cli
