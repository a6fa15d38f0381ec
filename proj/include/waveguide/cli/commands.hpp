#pragma once

// The four commands behind the executable. Each returns data; writing and
// exit codes are handled by run().

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "waveguide/cli/config.hpp"
#include "waveguide/states.hpp"
#include "waveguide/sweeps.hpp"

namespace waveguide::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitValidation = 4;

inline constexpr const char* kSpectrumSchema = "waveguide-spectrum/1";
inline constexpr const char* kSweepSchema = "waveguide-sweep/1";
inline constexpr const char* kValidateSchema = "waveguide-validate/1";

using Json = nlohmann::ordered_json;

/// Resolved configuration as written into every record.
Json echo(const RunConfig& config);

/// All bound states for each m in the list, with residuals and brackets.
Json cmd_spectrum(const RunConfig& config);

/// Field of state (m_list[0], n) on the configured grid. Throws ConfigError
/// when that state does not exist.
states::FieldGrid cmd_wavefunction(const RunConfig& config);

/// Header `r,z,f`, z varying fastest, 17 significant digits.
void write_field_csv(const states::FieldGrid& grid, std::ostream& out);

struct SweepOutput {
  sweeps::SweepResult result;
  Json analytics;
};

SweepOutput cmd_sweep(const RunConfig& config);

/// Header `axis,state_m,state_n,E,mean_r`; mean_r is empty unless computed.
void write_sweep_csv(const sweeps::SweepResult& result, std::ostream& out);

struct SuiteResult {
  std::string name;
  bool pass = true;
  int checks = 0;
  int failures = 0;
  double worst = 0.0;  // largest observed error
  double tolerance = 0.0;
  double wall_ms = 0.0;
  std::vector<std::string> messages;  // first few failures
};

/// Invariant suites: Bessel Wronskians, transverse orthonormality, coupling
/// matrices against quadrature, limit consistency, bracket certificates and
/// truncation convergence.
std::vector<SuiteResult> run_validation();

Json validation_report(const std::vector<SuiteResult>& suites);

}  // namespace waveguide::cli
