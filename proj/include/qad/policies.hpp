#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qad/model.hpp"
#include "qad/oracle.hpp"
#include "qad/random.hpp"
#include "qad/rates.hpp"
#include "qad/state.hpp"

namespace qad {

enum class PolicyKind { dgf, chernoff, dgf_l, seq_dgf_l, unknown_l, chernoff_generic };

std::string_view policy_name(PolicyKind kind);
/// Parses a config identifier; std::nullopt for an unknown name.
std::optional<PolicyKind> parse_policy(std::string_view name);
const std::vector<PolicyKind>& all_policies();

/// Probe these cells this round.
struct Probe {
  std::vector<std::size_t> cells;
  bool operator==(const Probe&) const = default;
};

/// Declare cells and continue testing.
struct Declare {
  std::vector<std::size_t> cells;
  DeclarationKind kind;
  bool operator==(const Declare&) const = default;
};

/// Terminate with the given set of cells declared abnormal (sorted).
struct Stop {
  std::vector<std::size_t> decision;
  bool operator==(const Stop&) const = default;
};

using PolicyAction = std::variant<Probe, Declare, Stop>;

/// Scenario parameters shared by all policies, with the regime comparisons cached.
struct PolicyConfig {
  std::size_t num_cells = 0;         ///< M
  std::size_t probes_per_round = 1;  ///< K
  std::size_t num_targets = 1;       ///< L
  double cost = 0.0;                 ///< c
  double threshold = 0.0;            ///< -log c
  KlPair kl{};
  Regime single_regime = Regime::g;  ///< D(g||f) vs D(f||g)/(M-1)
  Regime multi_regime = Regime::g;   ///< D(g||f)/L vs D(f||g)/(M-L)

  /// Validates 1 <= K <= M, 1 <= L < M and 0 < c < 1; throws std::invalid_argument.
  static PolicyConfig make(const KlPair& kl, std::size_t num_cells, std::size_t probes_per_round,
                           std::size_t num_targets, double cost);
};

/// DGF: stop once the top gap reaches -log c; otherwise probe ranks 1..K
/// (regime g or K = M) or ranks 2..K+1.
PolicyAction dgf_step(const SearchState& state, const PolicyConfig& cfg);

/// Chernoff test specialised to a single abnormal cell: same stopping rule as
/// DGF; regime g probes the top cell plus a uniform (K-1)-subset of the rest,
/// regime f a uniform K-subset of ranks 2..M.
PolicyAction chernoff_step(const SearchState& state, const PolicyConfig& cfg, RandomStream& rng);

/// DGF(L): stop on the L-th gap; probe sets from the four-case table.
PolicyAction dgfl_step(const SearchState& state, const PolicyConfig& cfg);

/// Sequential-declaration DGF(L), K = 1. Regime g declares abnormal cells one
/// at a time from the top; regime f declares normal cells from the bottom.
PolicyAction seq_dgfl_step(const SearchState& state, const PolicyConfig& cfg);

/// Unknown number of targets (at most L), K = 1: cells crossing -log c are
/// declared and frozen; probe the best undeclared cell; stop when every |S| >= -log c.
PolicyAction unknownl_step(const SearchState& state, const PolicyConfig& cfg);

/// Chernoff test over an explicit hypothesis family.
///
/// The optimal action distribution depends only on the ML hypothesis, so it is
/// solved once per hypothesis at construction and looked up at run time.
class GenericChernoff {
 public:
  /// `hypotheses` are sets of abnormal cells; actions are all K-subsets of cells.
  GenericChernoff(const KlPair& kl, std::size_t num_cells, std::size_t probes_per_round,
                  std::vector<CellSet> hypotheses);

  const std::vector<CellSet>& hypotheses() const { return hypotheses_; }
  const std::vector<CellSet>& actions() const { return actions_; }
  const MaximinSolution& solution(std::size_t hypothesis) const { return solutions_.at(hypothesis); }

  /// Log-likelihood of each hypothesis relative to "all cells normal": sum of S over its cells.
  std::vector<double> log_likelihoods(const SearchState& state) const;

  /// ML hypothesis (ties to the lowest index) and its margin over the runner-up.
  std::pair<std::size_t, double> ml_and_margin(const SearchState& state) const;

  /// Hypotheses whose maximin value is 0.
  std::vector<std::size_t> degenerate_hypotheses() const;

 private:
  std::size_t num_cells_;
  std::vector<CellSet> hypotheses_;
  std::vector<CellSet> actions_;
  std::vector<MaximinSolution> solutions_;
};

/// Stops once the ML hypothesis leads every alternative by -log c and decides
/// for it; otherwise samples an action from the ML hypothesis' maximin distribution.
PolicyAction chernoff_generic_step(const SearchState& state, const PolicyConfig& cfg,
                                   const GenericChernoff& generic, RandomStream& rng);

/// Hypothesis family used by chernoff_generic for a config: single cells when
/// L = 1, otherwise every set of 1..L cells.
std::vector<CellSet> generic_hypotheses(std::size_t num_cells, std::size_t num_targets);

/// A policy bound to its configuration; dispatches to the step functions.
class Policy {
 public:
  Policy(PolicyKind kind, const PolicyConfig& cfg);
  /// Reuses a prebuilt generic Chernoff table (it does not depend on c).
  Policy(PolicyKind kind, const PolicyConfig& cfg, std::shared_ptr<const GenericChernoff> generic);

  PolicyAction step(const SearchState& state, RandomStream& rng) const;

  PolicyKind kind() const { return kind_; }
  const PolicyConfig& config() const { return cfg_; }

 private:
  PolicyKind kind_;
  PolicyConfig cfg_;
  std::shared_ptr<const GenericChernoff> generic_;
};

}  // namespace qad
