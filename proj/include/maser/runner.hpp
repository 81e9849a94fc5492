#pragma once

// Run configurations, named presets and file outputs.

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "maser/thermo_analysis.hpp"

namespace maser {

inline constexpr const char* kUnitConvention = "hbar_kB_gammah_1";

/// Column order of ledger.csv. Frozen.
inline const std::vector<std::string> kLedgerColumns = {
    "t",     "P1",    "P2",   "P3",   "n_mean", "g2",   "E_f",    "W_f", "Wbound_f",
    "Eth_f", "S_f",   "S_af", "F_h_f", "F_c_f", "F_c_af", "J_h", "J_c", "sigma"};

enum class OutputKind { LedgerCsv, QGrid, EfficiencyJson, AuditJson, PnumCsv, LandscapeCsv };

std::string to_string(OutputKind k);
OutputKind output_from_string(const std::string& s);
/// File name inside the output directory.
std::string output_file(OutputKind k);

struct InitialStateSpec {
  enum class Kind { GroundVacuum, Gibbs, GibbsPoisson, Custom };
  Kind kind = Kind::GroundVacuum;
  double T_atom = 0.0;   // Gibbs, GibbsPoisson
  double T_field = 0.0;  // Gibbs
  double mean = 0.0;     // GibbsPoisson
  std::string path;      // Custom: JSON {"dim", "re", "im"}

  bool operator==(const InitialStateSpec&) const = default;
};

struct LandscapeSpec {
  double T_ref = 300.0;
  double e_min = 0.0;
  double e_max = 600.0;
  int points = 101;

  bool operator==(const LandscapeSpec&) const = default;
};

struct RunConfig {
  std::string name = "run";
  enum class Task { Integrate, Landscape };
  Task task = Task::Integrate;
  EngineParams params;
  InitialStateSpec initial;
  double t_final = 100.0;
  double dt = 0.01;
  double record_every = 0.5;
  Frame frame = Frame::Rotating;
  std::set<OutputKind> outputs;
  std::optional<double> window_start;  // default: last quarter of the run
  std::optional<double> window_end;
  LandscapeSpec landscape;

  /// Throws DomainError; called before any allocation.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

nlohmann::json to_json(const RunConfig& c);
/// Throws DomainError on a missing or wrong "units" field, unknown keys or
/// invalid values.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& file);

/// below, at_threshold, above, above_long, landscape.
std::vector<RunConfig> presets();
/// Throws DomainError for an unknown name.
RunConfig preset(const std::string& name);

/// Builds the initial joint state of an integrate task.
QOperator initial_state(const RunConfig& c);

/// Integrates an integrate-task config with the thermodynamic observer.
Trajectory simulate(const RunConfig& c);

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitAudit = 2 };

struct RunResult {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> files;
  std::string message;
};

/// Executes the config and writes the requested outputs plus manifest.json
/// into out_dir (created if needed).
RunResult run(const RunConfig& c, const std::filesystem::path& out_dir);

/// FNV-1a 64-bit hash of a file, as 16 hex digits.
std::string content_hash(const std::filesystem::path& file);

struct AuditResult {
  int exit_code = kExitOk;
  std::vector<std::string> lines;
};

/// Re-checks a run directory: manifest hashes, the second-law column of
/// ledger.csv and the recorded positivity audit.
AuditResult audit_directory(const std::filesystem::path& dir);

/// Worker count from MASER_WORKERS (default 1).
int worker_count();

/// Runs configs on a worker pool; one output subdirectory per config name when
/// there is more than one.
std::vector<RunResult> run_all(const std::vector<RunConfig>& configs,
                               const std::filesystem::path& out_dir, int workers);

}  // namespace maser
