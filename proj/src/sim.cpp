#include "qad/sim.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qad {
namespace {

constexpr double kZ95 = 1.959963984540054;

bool is_single_target_policy(PolicyKind kind) {
  return kind == PolicyKind::dgf || kind == PolicyKind::chernoff;
}

std::size_t expected_target_count(const ExperimentConfig& cfg) {
  if (unknown_count_mode(cfg)) return cfg.true_target_count;
  return cfg.num_targets;
}

// True cell strictly above every other cell.
bool dominates(const SearchState& state, std::size_t cell) {
  const auto& s = state.sums();
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (j != cell && !(s[cell] > s[j])) return false;
  }
  return true;
}

double quantile(const std::vector<double>& sorted_values, double p) {
  const double pos = p * static_cast<double>(sorted_values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted_values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]);
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& values) {
  MeanSd out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

}  // namespace

bool unknown_count_mode(const ExperimentConfig& cfg) {
  return cfg.policy == PolicyKind::unknown_l ||
         (cfg.policy == PolicyKind::chernoff_generic && cfg.num_targets > 1);
}

std::vector<CellSet> candidate_target_sets(const ExperimentConfig& cfg) {
  return subsets_of_size(cfg.num_cells, expected_target_count(cfg));
}

void validate(const ExperimentConfig& cfg) {
  const auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (cfg.num_cells < 2) fail("M >= 2 violated");
  if (cfg.probes_per_round < 1 || cfg.probes_per_round > cfg.num_cells) fail("1 <= K <= M violated");
  if (cfg.num_targets < 1 || cfg.num_targets >= cfg.num_cells) fail("1 <= L < M violated");
  if (is_single_target_policy(cfg.policy) && cfg.num_targets != 1) {
    fail(std::string(policy_name(cfg.policy)) + " requires L = 1");
  }
  if ((cfg.policy == PolicyKind::seq_dgf_l || cfg.policy == PolicyKind::unknown_l) &&
      cfg.probes_per_round != 1) {
    fail(std::string(policy_name(cfg.policy)) + " requires K = 1");
  }
  if (unknown_count_mode(cfg) &&
      (cfg.true_target_count < 1 || cfg.true_target_count > cfg.num_targets)) {
    fail("1 <= true_target_count <= L violated");
  }
  if (cfg.trials < 1) fail("trials >= 1 violated");
  if (cfg.max_rounds < 1) fail("max_rounds >= 1 violated");
  if (cfg.neg_log_costs.empty()) fail("cost grid must not be empty");
  for (double t : cfg.neg_log_costs) {
    if (!(std::isfinite(t) && t > 0.0)) fail("c in (0, 1) violated (-log c must be positive)");
  }
  const auto candidates = candidate_target_sets(cfg);
  if (!cfg.priors.empty()) {
    if (cfg.priors.size() != candidates.size()) {
      fail("priors must have one entry per candidate target set (" + std::to_string(candidates.size()) +
           ")");
    }
    double total = 0.0;
    for (double p : cfg.priors) {
      if (!(p > 0.0 && p < 1.0)) fail("0 < prior < 1 violated");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) fail("priors must sum to 1");
  }
  if (cfg.fixed_targets) {
    CellSet t = *cfg.fixed_targets;
    std::sort(t.begin(), t.end());
    if (t.size() != expected_target_count(cfg)) fail("fixed_targets has the wrong number of cells");
    if (std::adjacent_find(t.begin(), t.end()) != t.end()) fail("fixed_targets must be distinct");
    if (!t.empty() && t.back() >= cfg.num_cells) fail("fixed_targets cell out of range");
  }
}

Simulator::Simulator(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
  validate(cfg_);
  candidates_ = candidate_target_sets(cfg_);
  if (cfg_.fixed_targets) std::sort(cfg_.fixed_targets->begin(), cfg_.fixed_targets->end());
  if (cfg_.policy == PolicyKind::chernoff_generic) {
    generic_ = std::make_shared<GenericChernoff>(
        cfg_.model.kl(), cfg_.num_cells, cfg_.probes_per_round,
        generic_hypotheses(cfg_.num_cells, cfg_.num_targets));
  }
}

TrialResult Simulator::run_trial(double cost, std::uint64_t trial_index, const TrajectorySink& sink) const {
  const Policy policy(
      cfg_.policy,
      PolicyConfig::make(cfg_.model.kl(), cfg_.num_cells, cfg_.probes_per_round, cfg_.num_targets, cost),
      generic_);
  RandomStream rng = derive_stream(cfg_.seed, trial_index);

  TrialResult result;
  if (cfg_.fixed_targets) {
    result.truth = *cfg_.fixed_targets;
    const auto it = std::find(candidates_.begin(), candidates_.end(), result.truth);
    result.true_hypothesis = static_cast<std::size_t>(it - candidates_.begin());
  } else if (cfg_.priors.empty()) {
    result.true_hypothesis =
        std::uniform_int_distribution<std::size_t>(0, candidates_.size() - 1)(rng);
    result.truth = candidates_[result.true_hypothesis];
  } else {
    result.true_hypothesis =
        std::discrete_distribution<std::size_t>(cfg_.priors.begin(), cfg_.priors.end())(rng);
    result.truth = candidates_[result.true_hypothesis];
  }

  std::vector<char> abnormal(cfg_.num_cells, 0);
  for (std::size_t cell : result.truth) abnormal[cell] = 1;

  const bool track_tau1 = cfg_.diagnostics && result.truth.size() == 1;
  const std::size_t true_cell = result.truth.front();
  std::uint64_t last_violation = 0;  // round 0: all sums equal

  SearchState state(cfg_.num_cells);
  std::vector<double> observations;
  bool stopped = false;
  while (!stopped) {
    const PolicyAction action = policy.step(state, rng);
    if (const auto* probe = std::get_if<Probe>(&action)) {
      if (state.round() >= cfg_.max_rounds) {
        result.truncated = true;
        break;
      }
      observations.resize(probe->cells.size());
      for (std::size_t i = 0; i < probe->cells.size(); ++i) {
        observations[i] = cfg_.model.sample(abnormal[probe->cells[i]] != 0, rng);
      }
      state.update(probe->cells, observations, cfg_.model);
      if (sink) sink(state, probe->cells, observations);
      if (track_tau1 && !dominates(state, true_cell)) last_violation = state.round();
    } else if (const auto* declare = std::get_if<Declare>(&action)) {
      state.declare(declare->cells, declare->kind);
    } else {
      result.decision = std::get<Stop>(action).decision;
      stopped = true;
    }
  }

  result.tau = state.round();
  result.observations = std::accumulate(state.counts().begin(), state.counts().end(), std::uint64_t{0});
  std::sort(result.decision.begin(), result.decision.end());
  result.correct = stopped && result.decision == result.truth;

  result.tau_d = result.decision.empty() ? result.tau : 0;
  for (std::size_t cell : result.decision) {
    std::uint64_t when = result.tau;
    for (const auto& d : state.declarations()) {
      if (d.cell == cell && d.kind == DeclarationKind::abnormal) when = d.round;
    }
    result.tau_d = std::max(result.tau_d, when);
  }

  if (track_tau1 && stopped && dominates(state, true_cell)) result.tau1 = last_violation + 1;
  return result;
}

std::vector<TrialResult> Simulator::run_trials_serial(double cost) const {
  std::vector<TrialResult> out(cfg_.trials);
  for (std::uint64_t t = 0; t < cfg_.trials; ++t) out[t] = run_trial(cost, t);
  return out;
}

std::vector<TrialResult> Simulator::run_trials_parallel(double cost) const {
  std::vector<TrialResult> out(cfg_.trials);
  const int threads = cfg_.threads > 0 ? cfg_.threads : omp_get_max_threads();
  const auto n = static_cast<std::int64_t>(cfg_.trials);
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 256) num_threads(threads)
  for (std::int64_t t = 0; t < n; ++t) {
    try {
      out[static_cast<std::size_t>(t)] = run_trial(cost, static_cast<std::uint64_t>(t));
    } catch (...) {
#pragma omp critical(qad_trial_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

TrialResult run_trial(const ExperimentConfig& cfg, double cost, std::uint64_t trial_index) {
  return Simulator(cfg).run_trial(cost, trial_index);
}

AggregateMetrics aggregate(const std::vector<TrialResult>& results, double cost) {
  if (results.empty()) throw std::domain_error("aggregate: no trial results");
  AggregateMetrics m;
  m.cost = cost;
  m.trial_count = results.size();
  const double n = static_cast<double>(results.size());

  std::vector<double> tau(results.size());
  std::vector<double> tau_d(results.size());
  std::vector<double> loss(results.size());
  std::uint64_t errors = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    tau[i] = static_cast<double>(r.tau);
    tau_d[i] = static_cast<double>(r.tau_d);
    loss[i] = (r.correct ? 0.0 : 1.0) + cost * tau_d[i];
    if (!r.correct) ++errors;
    if (r.truncated) ++m.truncations;
  }

  const auto tau_stats = mean_sd(tau);
  const auto loss_stats = mean_sd(loss);
  m.p_e = static_cast<double>(errors) / n;
  m.mean_tau = tau_stats.mean;
  m.mean_tau_d = std::accumulate(tau_d.begin(), tau_d.end(), 0.0) / n;
  m.bayes_risk = m.p_e + cost * m.mean_tau_d;
  m.sigma = tau_stats.sd;
  const double half = kZ95 * tau_stats.sd / std::sqrt(n);
  m.ci_low = m.mean_tau - half;
  m.ci_high = m.mean_tau + half;
  const double risk_half = kZ95 * loss_stats.sd / std::sqrt(n);
  m.risk_ci_low = m.bayes_risk - risk_half;
  m.risk_ci_high = m.bayes_risk + risk_half;

  if (m.sigma > 0.0) {
    std::sort(tau.begin(), tau.end());
    m.r_empirical = 0.5 * (quantile(tau, 0.975) - quantile(tau, 0.025)) / m.sigma;
  }
  return m;
}

namespace {

std::vector<CostPoint> run_grid(const ExperimentConfig& cfg, bool parallel) {
  const Simulator sim(cfg);
  std::vector<CostPoint> points;
  for (double t : cfg.neg_log_costs) {
    const double cost = std::exp(-t);
    const auto results = parallel ? sim.run_trials_parallel(cost) : sim.run_trials_serial(cost);
    points.push_back({t, cost, aggregate(results, cost)});
  }
  return points;
}

}  // namespace

std::vector<CostPoint> run_experiment(const ExperimentConfig& cfg) { return run_grid(cfg, true); }

std::vector<CostPoint> run_experiment_serial(const ExperimentConfig& cfg) { return run_grid(cfg, false); }

Tau1DecayReport tau1_decay_diagnostic(const ExperimentConfig& cfg, double cost, std::uint64_t trials) {
  ExperimentConfig run = cfg;
  run.diagnostics = true;
  run.trials = trials;
  if (expected_target_count(run) != 1) {
    throw std::invalid_argument("tau1 diagnostic: requires a single-target scenario");
  }
  return tau1_decay(Simulator(run).run_trials_parallel(cost));
}

Tau1DecayReport tau1_decay(const std::vector<TrialResult>& results) {
  Tau1DecayReport report;
  std::vector<std::uint64_t> values;
  for (const auto& r : results) {
    if (r.tau1) {
      values.push_back(*r.tau1);
    } else {
      ++report.censored;
    }
  }
  report.measured = values.size();
  if (values.empty()) return report;

  const std::uint64_t longest = *std::max_element(values.begin(), values.end());
  std::vector<std::uint64_t> surviving(longest + 1, 0);
  for (std::uint64_t v : values) {
    for (std::uint64_t n = 0; n < v; ++n) ++surviving[n];
  }
  const double total = static_cast<double>(values.size());
  report.survival.resize(surviving.size());
  for (std::size_t n = 0; n < surviving.size(); ++n) {
    report.survival[n] = static_cast<double>(surviving[n]) / total;
  }

  for (std::size_t n = 0; n < surviving.size(); ++n) {
    if (report.survival[n] <= 0.5 && surviving[n] >= 10) report.tail_rounds.push_back(n);
  }
  if (report.tail_rounds.size() < 5) return report;

  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t n : report.tail_rounds) {
    x.push_back(static_cast<double>(n));
    y.push_back(std::log(report.survival[n]));
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  report.slope = sxy / sxx;
  report.gamma_hat = -report.slope;
  const double intercept = my - report.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) report.residuals.push_back(y[i] - (intercept + report.slope * x[i]));
  report.conclusive = true;
  return report;
}

}  // namespace qad
