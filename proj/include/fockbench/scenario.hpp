#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fockbench/errors.hpp"
#include "fockbench/lindblad.hpp"
#include "fockbench/model.hpp"

namespace fockbench {

enum class Engine { decay, cumulant, laser_steady, lindblad_validate, classb_spectrum, gillespie };

const char* engine_name(Engine engine) noexcept;

struct InitialCondition {
  enum class Kind { vacuum, fock, coherent, thermal };
  Kind kind = Kind::vacuum;
  double n_bar = 0.0;                 // coherent and thermal mean
  long long n = 0;                    // fock photon number
  std::optional<double> variance;     // cumulant engine only; defaults to the state's own variance
  double mean() const;
  double state_variance() const;
};

struct MonteCarloControls {
  std::size_t trajectories = 0;
  double averaging_times = 100.0;  // relaxation times averaged after burn-in
  double step_fraction = 0.002;    // dt as a fraction of the fastest relaxation time
};

// All times and frequencies here are in internal units (s, rad/s).
struct Numerics {
  std::optional<std::size_t> n_max;  // empty selects an automatic truncation
  double rel_tol = 1e-8;
  double t_final = 0.0;
  std::vector<double> report_times;
  std::vector<double> omega_grid;  // empty selects an automatic grid
  std::uint64_t seed = 1;
  std::size_t trajectories = 0;
  bool save_distributions = false;
  // classb-spectrum
  double n_lo = 0.0;
  double n_hi = 0.0;
  std::size_t grid_points = 2000;
  std::optional<MonteCarloControls> monte_carlo;
  // lindblad-validate
  std::vector<double> gamma_ratios;
  std::size_t mirror_levels = 7;
  std::size_t two_mode_n_max = 40;
  double adiabatic_tolerance = 1e-8;
  double two_mode_tolerance = 0.02;
};

struct SweepSpec {
  std::string parameter;  // dotted path such as gain.A
  std::vector<double> values;
};

struct Scenario {
  std::string name;
  std::string description;
  std::string origin;  // file name used in diagnostics
  std::string source;  // the document text
  Engine engine = Engine::decay;
  double time_unit = 1.0;
  LossModel loss = LossModel::linear(0.0);
  std::optional<AdiabaticParams> mirror_mode;  // set when the loss comes from an explicit mirror mode
  GainModel gain = NoGain{};
  std::optional<InitialCondition> initial;
  Numerics numerics;
  std::optional<SweepSpec> sweep;
  std::optional<double> budget_seconds;
};

// Parses and validates a scenario document. Every failure is a ParseError
// carrying origin:line.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<input>");
Scenario load_scenario(const std::string& path);

// Re-parses the scenario with the value at the dotted path replaced.
Scenario with_parameter(const Scenario& base, const std::string& path, double value);

using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct RunResult {
  std::vector<Table> tables;  // the first table is always the one-row summary
  std::vector<std::string> warnings;
  std::vector<std::string> notes;  // human-readable report lines
  std::optional<ErrorKind> failure;
  std::string failure_message;
};

struct RunOptions {
  unsigned threads = 0;
};

// Runs one scenario. Engine errors propagate as exceptions.
RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

// Runs every sweep value; failures are recorded per row and the first one in
// sweep order is reported in RunResult::failure.
RunResult sweep_scenario(const Scenario& scenario, const RunOptions& options = {});

struct ValidationReport {
  std::vector<std::string> lines;
  std::optional<ErrorKind> failure;
};

// Parses, checks model invariants and runs the built-in cross checks for the
// engine, without writing files.
ValidationReport validate_scenario(const Scenario& scenario, const RunOptions& options = {});

struct ManifestInfo {
  std::string command;
  double wall_seconds = 0.0;
  unsigned threads = 0;
  int exit_code = 0;
};

// Writes one CSV per table and manifest.yaml into dir (created if needed).
void write_results(const RunResult& result, const Scenario& scenario, const std::string& dir,
                   const ManifestInfo& info);

// 64-bit FNV-1a digest of the scenario text, as 16 hex digits.
std::string scenario_hash(const std::string& text);

}  // namespace fockbench
