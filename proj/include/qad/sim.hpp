#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "qad/model.hpp"
#include "qad/oracle.hpp"
#include "qad/policies.hpp"

namespace qad {

/// One simulated scenario.
struct ExperimentConfig {
  std::size_t num_cells = 5;         ///< M
  std::size_t probes_per_round = 1;  ///< K
  std::size_t num_targets = 1;       ///< L (upper bound for unknown_l)
  PolicyKind policy = PolicyKind::dgf;
  ObservationModel model = ObservationModel::exponential(0.5, 10.0);
  /// Prior over candidate target sets (see candidate_target_sets); empty means uniform.
  std::vector<double> priors;
  /// Grid of -log c values; every entry must be > 0.
  std::vector<double> neg_log_costs{1.0, 2.0, 3.0, 4.0, 5.0};
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  /// Number of targets actually present for unknown_l and multi-target chernoff_generic.
  std::size_t true_target_count = 1;
  /// Fixes the true target set for every trial (conditional metrics).
  std::optional<CellSet> fixed_targets;
  std::uint64_t max_rounds = 1'000'000;
  /// Records the last-passage time tau1 for single-target scenarios.
  bool diagnostics = false;
  /// OpenMP thread count; 0 uses the runtime default.
  int threads = 0;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws std::invalid_argument naming the violated invariant.
void validate(const ExperimentConfig& cfg);

/// Target sets the ground truth is drawn from, in the order `priors` refers to.
std::vector<CellSet> candidate_target_sets(const ExperimentConfig& cfg);

/// Whether the scenario reports on an unknown number of targets.
bool unknown_count_mode(const ExperimentConfig& cfg);

struct TrialResult {
  std::size_t true_hypothesis = 0;  ///< index into candidate_target_sets (or 0 when fixed)
  CellSet truth;
  CellSet decision;
  bool correct = false;
  std::uint64_t tau = 0;    ///< termination round
  std::uint64_t tau_d = 0;  ///< detection round: last declaration of a decided cell
  std::uint64_t observations = 0;
  /// Last-passage time of the true cell's dominance, measured over rounds 0..tau.
  /// Empty when diagnostics are off, the scenario has several targets, or the
  /// true cell does not dominate at tau.
  std::optional<std::uint64_t> tau1;
  bool truncated = false;

  bool operator==(const TrialResult&) const = default;
};

struct AggregateMetrics {
  double cost = 0.0;
  double p_e = 0.0;
  double mean_tau = 0.0;
  double mean_tau_d = 0.0;
  /// p_e + c * mean_tau_d (tau_d equals tau unless targets are declared before termination).
  double bayes_risk = 0.0;
  double sigma = 0.0;  ///< sample standard deviation of tau
  double ci_low = 0.0;  ///< normal-approximation 95% interval on mean_tau
  double ci_high = 0.0;
  double risk_ci_low = 0.0;  ///< same interval for the per-trial loss 1{error} + c tau_d
  double risk_ci_high = 0.0;
  /// Half-width of the central 95% interquantile range of tau divided by sigma.
  double r_empirical = 0.0;
  std::uint64_t truncations = 0;
  std::uint64_t trial_count = 0;
};

/// Throws std::domain_error for empty input.
AggregateMetrics aggregate(const std::vector<TrialResult>& results, double cost);

struct CostPoint {
  double neg_log_cost = 0.0;
  double cost = 0.0;
  AggregateMetrics metrics;
};

/// Per-round callback for trajectory dumps: state after the update and the round's draws.
using TrajectorySink =
    std::function<void(const SearchState&, const std::vector<std::size_t>&, const std::vector<double>&)>;

/// Runs trials for one configuration. Holds the per-configuration precomputation.
class Simulator {
 public:
  explicit Simulator(ExperimentConfig cfg);

  const ExperimentConfig& config() const { return cfg_; }

  TrialResult run_trial(double cost, std::uint64_t trial_index, const TrajectorySink& sink = {}) const;

  /// Reference implementation: trials in index order on the calling thread.
  std::vector<TrialResult> run_trials_serial(double cost) const;
  /// OpenMP over trial indices; output identical to run_trials_serial.
  std::vector<TrialResult> run_trials_parallel(double cost) const;

 private:
  ExperimentConfig cfg_;
  std::vector<CellSet> candidates_;
  std::shared_ptr<const GenericChernoff> generic_;
};

TrialResult run_trial(const ExperimentConfig& cfg, double cost, std::uint64_t trial_index);

/// Every cost in the grid, trials in parallel.
std::vector<CostPoint> run_experiment(const ExperimentConfig& cfg);
/// Same results computed serially; the reference the parallel path is tested against.
std::vector<CostPoint> run_experiment_serial(const ExperimentConfig& cfg);

struct Tau1DecayReport {
  /// survival[n] = fraction of measured trials with tau1 > n.
  std::vector<double> survival;
  std::vector<std::size_t> tail_rounds;  ///< n values used in the fit
  double slope = 0.0;                    ///< fitted d log P(tau1 > n) / dn
  double gamma_hat = 0.0;                ///< -slope
  std::vector<double> residuals;
  std::uint64_t measured = 0;  ///< trials with an observed tau1
  std::uint64_t censored = 0;  ///< trials where the true cell did not dominate at tau
  bool conclusive = false;
};

/// Empirical survival of tau1 and a least-squares fit of log P(tau1 > n) on its tail.
///
/// Tail points are rounds past the median with at least 10 trials still
/// surviving; fewer than 5 such points yields an inconclusive report.
Tau1DecayReport tau1_decay(const std::vector<TrialResult>& results);

/// Runs `trials` trials of a single-target scenario with diagnostics on and fits tau1.
Tau1DecayReport tau1_decay_diagnostic(const ExperimentConfig& cfg, double cost, std::uint64_t trials);

}  // namespace qad
