#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "sben/ben.hpp"
#include "sben/models.hpp"

namespace sben::cli {

/// Parsed run configuration (sectioned key-value file, strict: unknown
/// sections or keys are rejected with their line number).
struct RunConfig {
  ModelSpec model;
  double t_end = 1.0;
  size_t steps = 100;
  std::string method = "incremental";  // or "global"
  SolverOptions solver;
  std::string trajectory_csv = "trajectory.csv";
  std::string report_json = "report.json";
  long seed = 0;

  // [potential] + [conjugate] sections, used by the conjugate command
  std::optional<Potential> potential;
  double conjugate_half_width = 5.0;
  int conjugate_resolution = 101;  // points per axis
  std::string conjugate_csv = "conjugate.csv";
};

RunConfig parse_config(std::istream& in, const std::string& name);
RunConfig parse_config_file(const std::string& path);

/// Shared CLI options from flags and environment.
struct Options {
  std::string out_dir;  // empty = paths as given
  std::optional<double> dt_override;
  bool quiet = false;
};

/// Trajectory CSV round-trip (schema: t, x_1..x_n, y_1..y_n, H,
/// step_gap, dissipation_rate; 17 significant digits; +inf as `inf`).
/// Writing is atomic (temp file + rename).
void write_trajectory_csv(const std::string& path, const HamiltonianModel& h,
                          const Trajectory& traj, const BenReport& rep);
Trajectory read_trajectory_csv(const std::string& path, Eigen::Index n);

int cmd_simulate(const RunConfig& cfg, const Options& opt);
int cmd_verify(const RunConfig& cfg, const Options& opt);
int cmd_compare(const RunConfig& cfg, const Options& opt);
int cmd_conjugate(const RunConfig& cfg, const Options& opt);

/// Full entry point: parses argv, dispatches, maps exceptions to exit
/// code 1. Exit codes: 0 certified/all-pass, 2 result written but not
/// certified (or checks failed), 1 error.
int run(int argc, char** argv);

}  // namespace sben::cli
