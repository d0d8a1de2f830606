#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qad/rates.hpp"
#include "qad/sim.hpp"

namespace qad::cli {

inline constexpr std::string_view kVersion = "1.0.0";

enum ExitCode : int { kSuccess = 0, kFailure = 1, kConfigError = 2, kIoError = 3 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An experiment: one scenario evaluated under several policies.
struct RunPlan {
  ExperimentConfig base;  ///< `policy` is overwritten per entry of `policies`
  std::vector<PolicyKind> policies{PolicyKind::dgf, PolicyKind::chernoff};
  std::string out_dir = ".";
  bool dump_trials = false;
  /// Trial index whose per-round trajectory is written for every (policy, c).
  std::optional<std::uint64_t> trajectory;

  bool operator==(const RunPlan&) const = default;
};

/// The scenario for one policy of the plan, validated.
ExperimentConfig config_for(const RunPlan& plan, PolicyKind policy);

nlohmann::json model_to_json(const ObservationModel& model);
/// Throws ConfigError for unknown kinds, missing fields or invalid parameters.
ObservationModel model_from_json(const nlohmann::json& j);

nlohmann::json plan_to_json(const RunPlan& plan);
/// Missing keys keep the defaults of `base`. Throws ConfigError.
RunPlan plan_from_json(const nlohmann::json& j, RunPlan base = {});

const std::vector<std::string>& preset_names();
/// Throws ConfigError listing the valid names. "verify" is not a scenario and is rejected here.
RunPlan preset(std::string_view name);

/// Rate report and risk lower bound used for a policy's relative loss.
struct BoundModel {
  RateReport rate;
  bool unknown_count = false;
  std::size_t true_targets = 1;

  double lower_bound(double cost) const;
};

BoundModel bound_model(const ExperimentConfig& cfg);

struct ResultRow {
  PolicyKind policy = PolicyKind::dgf;
  std::size_t num_cells = 0;
  std::size_t probes_per_round = 0;
  std::size_t num_targets = 0;
  CostPoint point;
  double lower_bound = 0.0;
  double relative_loss = 0.0;
};

struct RunManifest {
  RunPlan plan;
  std::vector<std::pair<PolicyKind, BoundModel>> bounds;
  std::string version{kVersion};
  std::string timestamp;
  std::vector<std::string> outputs;
};

nlohmann::json manifest_to_json(const RunManifest& manifest);

std::string csv_header();
std::string csv_row(const ResultRow& row);
/// 17 significant digits.
std::string format_number(double value);

struct RunOutput {
  std::vector<ResultRow> rows;
  RunManifest manifest;
  nlohmann::json diagnostics = nlohmann::json::object();
};

/// Simulates every (policy, c) of the plan and writes results.csv, summary.json
/// and any requested dumps into plan.out_dir. Progress lines go to `progress`.
RunOutput execute(const RunPlan& plan, std::ostream& progress);

/// Oracle cross-checks; prints a table and returns true iff every row passes.
bool run_verify(std::ostream& out);

/// Entry point of the qad tool. Returns one of ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qad::cli
