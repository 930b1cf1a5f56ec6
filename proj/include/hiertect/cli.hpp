#pragma once

// Experiment runner behind the `hiertect` tool.

#include <cstdint>
#include <iosfwd>
#include <iterator>
#include <string>
#include <vector>

#include <json.hpp>

#include "hiertect/detect.hpp"
#include "hiertect/io.hpp"

namespace hiertect::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kOk = 0, kValidationError = 1, kRuntimeError = 2 };

struct ExperimentConfig {
  std::uint64_t seed = 0;
  io::ModelSpec model;
  double sigma = 0.1;
  std::vector<double> mu_grid;
  double target_far = 0.05;
  std::size_t trials = 2000;
  std::size_t calibration_trials = 10000;
  std::vector<std::size_t> n_grid;
  std::vector<DetectorKind> detectors{std::begin(kAllDetectors), std::end(kAllDetectors)};
  std::size_t samples = 1000;      // sample / oracle-check draws
  bool recenter = true;            // learn
  double tv_tolerance = 0.02;      // oracle-check
  double cov_tolerance = 1e-10;    // oracle-check
  double flip_offset = 0.0;        // oracle-check fault injection, sampler side only
  std::string basis = "true_tree"; // or "learned": clustered from noisy snapshots
  std::size_t basis_snapshots = 1000;
  std::string output;

  /// Throws ValidationError on the first bad field.
  void validate() const;
};

/// Defaults for one subcommand: the p=1296 constrained setup for
/// reproduce-fig2 and power, d=2 L=2 for oracle-check.
ExperimentConfig defaults_for(const std::string& command);

/// Overlays `j` onto `base`. Requires schema_version and rejects unknown keys.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base);
nlohmann::json config_to_json(const ExperimentConfig& c);

/// Sampler-vs-enumeration and covariance-vs-enumeration report.
nlohmann::json oracle_report(const ExperimentConfig& c, std::size_t threads);

/// Full command line (args[0] is the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace hiertect::cli
