#include "qad/policies.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iterator>
#include <limits>
#include <stdexcept>
#include <utility>

namespace qad {
namespace {

constexpr std::array<std::pair<PolicyKind, std::string_view>, 6> kPolicyNames{{
    {PolicyKind::dgf, "dgf"},
    {PolicyKind::chernoff, "chernoff"},
    {PolicyKind::dgf_l, "dgf_l"},
    {PolicyKind::seq_dgf_l, "seq_dgf_l"},
    {PolicyKind::unknown_l, "unknown_l"},
    {PolicyKind::chernoff_generic, "chernoff_generic"},
}};

// Ranks are 1-based; returns cells at ranks first..last inclusive.
std::vector<std::size_t> rank_range(const std::vector<std::size_t>& ranking, std::size_t first,
                                    std::size_t last) {
  return {ranking.begin() + static_cast<std::ptrdiff_t>(first - 1),
          ranking.begin() + static_cast<std::ptrdiff_t>(last)};
}

double ranked_gap(const SearchState& state, const std::vector<std::size_t>& ranking, std::size_t rank) {
  const auto& s = state.sums();
  return s[ranking[rank - 1]] - s[ranking[rank]];
}

std::vector<std::size_t> sorted(std::vector<std::size_t> cells) {
  std::sort(cells.begin(), cells.end());
  return cells;
}

// Best undeclared cell by the ranking order (largest S, lowest index on ties).
std::optional<std::size_t> best_undeclared(const SearchState& state) {
  std::optional<std::size_t> best;
  for (std::size_t m = 0; m < state.num_cells(); ++m) {
    if (state.is_declared(m)) continue;
    if (!best || state.sums()[m] > state.sums()[*best]) best = m;
  }
  return best;
}

std::optional<std::size_t> worst_undeclared(const SearchState& state) {
  std::optional<std::size_t> worst;
  for (std::size_t m = 0; m < state.num_cells(); ++m) {
    if (state.is_declared(m)) continue;
    if (!worst || state.sums()[m] < state.sums()[*worst]) worst = m;
  }
  return worst;
}

std::vector<std::size_t> declared_of_kind(const SearchState& state, DeclarationKind kind) {
  std::vector<std::size_t> cells;
  for (const auto& d : state.declarations()) {
    if (d.kind == kind) cells.push_back(d.cell);
  }
  return sorted(std::move(cells));
}

}  // namespace

std::string_view policy_name(PolicyKind kind) {
  for (const auto& [k, name] : kPolicyNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
  for (const auto& [k, n] : kPolicyNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

const std::vector<PolicyKind>& all_policies() {
  static const std::vector<PolicyKind> kinds = [] {
    std::vector<PolicyKind> out;
    for (const auto& entry : kPolicyNames) out.push_back(entry.first);
    return out;
  }();
  return kinds;
}

PolicyConfig PolicyConfig::make(const KlPair& kl, std::size_t num_cells, std::size_t probes_per_round,
                                std::size_t num_targets, double cost) {
  if (num_cells < 2) throw std::invalid_argument("policy config: need M >= 2");
  if (probes_per_round < 1 || probes_per_round > num_cells) {
    throw std::invalid_argument("policy config: need 1 <= K <= M");
  }
  if (num_targets < 1 || num_targets >= num_cells) {
    throw std::invalid_argument("policy config: need 1 <= L < M");
  }
  if (!(cost > 0.0 && cost < 1.0)) throw std::invalid_argument("policy config: need 0 < c < 1");
  PolicyConfig cfg;
  cfg.num_cells = num_cells;
  cfg.probes_per_round = probes_per_round;
  cfg.num_targets = num_targets;
  cfg.cost = cost;
  cfg.threshold = -std::log(cost);
  cfg.kl = kl;
  cfg.single_regime = favours_target(kl, num_cells, 1) ? Regime::g : Regime::f;
  cfg.multi_regime = favours_target(kl, num_cells, num_targets) ? Regime::g : Regime::f;
  return cfg;
}

PolicyAction dgf_step(const SearchState& state, const PolicyConfig& cfg) {
  const auto ranking = state.ranked_cells();
  if (ranked_gap(state, ranking, 1) >= cfg.threshold) return Stop{{ranking[0]}};
  const std::size_t k = cfg.probes_per_round;
  if (cfg.single_regime == Regime::g || k == cfg.num_cells) return Probe{rank_range(ranking, 1, k)};
  return Probe{rank_range(ranking, 2, k + 1)};
}

PolicyAction chernoff_step(const SearchState& state, const PolicyConfig& cfg, RandomStream& rng) {
  const auto ranking = state.ranked_cells();
  if (ranked_gap(state, ranking, 1) >= cfg.threshold) return Stop{{ranking[0]}};
  const std::size_t k = cfg.probes_per_round;
  if (k == cfg.num_cells) return Probe{ranking};
  std::vector<std::size_t> cells;
  cells.reserve(k);
  if (cfg.single_regime == Regime::g) {
    cells.push_back(ranking[0]);
    std::sample(ranking.begin() + 1, ranking.end(), std::back_inserter(cells), k - 1, rng);
  } else {
    std::sample(ranking.begin() + 1, ranking.end(), std::back_inserter(cells), k, rng);
  }
  return Probe{std::move(cells)};
}

PolicyAction dgfl_step(const SearchState& state, const PolicyConfig& cfg) {
  const auto ranking = state.ranked_cells();
  const std::size_t m = cfg.num_cells;
  const std::size_t k = cfg.probes_per_round;
  const std::size_t l = cfg.num_targets;
  if (ranked_gap(state, ranking, l) >= cfg.threshold) return Stop{sorted(rank_range(ranking, 1, l))};
  if (cfg.multi_regime == Regime::g) {
    return Probe{k >= l ? rank_range(ranking, 1, k) : rank_range(ranking, l - k + 1, l)};
  }
  return Probe{k > m - l ? rank_range(ranking, m - k + 1, m) : rank_range(ranking, l + 1, l + k)};
}

PolicyAction seq_dgfl_step(const SearchState& state, const PolicyConfig& cfg) {
  if (cfg.multi_regime == Regime::g) {
    if (state.declared_count(DeclarationKind::abnormal) >= cfg.num_targets) {
      return Stop{declared_of_kind(state, DeclarationKind::abnormal)};
    }
    const std::size_t top = *best_undeclared(state);
    if (state.sums()[top] >= cfg.threshold) return Declare{{top}, DeclarationKind::abnormal};
    return Probe{{top}};
  }
  if (state.declared_count(DeclarationKind::normal) >= cfg.num_cells - cfg.num_targets) {
    std::vector<std::size_t> survivors;
    for (std::size_t m = 0; m < state.num_cells(); ++m) {
      if (!state.is_declared(m)) survivors.push_back(m);
    }
    return Stop{std::move(survivors)};
  }
  const std::size_t bottom = *worst_undeclared(state);
  if (state.sums()[bottom] <= -cfg.threshold) return Declare{{bottom}, DeclarationKind::normal};
  return Probe{{bottom}};
}

PolicyAction unknownl_step(const SearchState& state, const PolicyConfig& cfg) {
  const auto& s = state.sums();
  std::vector<std::size_t> crossing;
  for (std::size_t m = 0; m < state.num_cells(); ++m) {
    if (!state.is_declared(m) && s[m] >= cfg.threshold) crossing.push_back(m);
  }
  if (!crossing.empty()) return Declare{std::move(crossing), DeclarationKind::abnormal};

  const bool settled =
      std::all_of(s.begin(), s.end(), [&](double v) { return std::abs(v) >= cfg.threshold; });
  if (settled) return Stop{declared_of_kind(state, DeclarationKind::abnormal)};
  // Not settled and nothing left to declare, so an undeclared cell exists.
  return Probe{{*best_undeclared(state)}};
}

std::vector<CellSet> generic_hypotheses(std::size_t num_cells, std::size_t num_targets) {
  return num_targets == 1 ? subsets_of_size(num_cells, 1) : subsets_up_to(num_cells, num_targets);
}

GenericChernoff::GenericChernoff(const KlPair& kl, std::size_t num_cells, std::size_t probes_per_round,
                                 std::vector<CellSet> hypotheses)
    : num_cells_(num_cells),
      hypotheses_(std::move(hypotheses)),
      actions_(subsets_of_size(num_cells, probes_per_round)) {
  if (hypotheses_.size() < 2) throw std::invalid_argument("generic chernoff: need >= 2 hypotheses");
  if (actions_.empty()) throw std::invalid_argument("generic chernoff: need 1 <= K <= M");
  for (const auto& h : hypotheses_) {
    for (std::size_t cell : h) {
      if (cell >= num_cells) throw std::invalid_argument("generic chernoff: hypothesis cell out of range");
    }
  }
  const auto table = HypothesisActionKL::anomaly(kl, num_cells, hypotheses_, actions_);
  solutions_.reserve(hypotheses_.size());
  for (std::size_t h = 0; h < hypotheses_.size(); ++h) {
    solutions_.push_back(maximin_action_distribution(table, h));
  }
}

std::vector<double> GenericChernoff::log_likelihoods(const SearchState& state) const {
  std::vector<double> ll(hypotheses_.size(), 0.0);
  for (std::size_t h = 0; h < hypotheses_.size(); ++h) {
    for (std::size_t cell : hypotheses_[h]) ll[h] += state.sums()[cell];
  }
  return ll;
}

std::pair<std::size_t, double> GenericChernoff::ml_and_margin(const SearchState& state) const {
  const auto ll = log_likelihoods(state);
  std::size_t best = 0;
  for (std::size_t h = 1; h < ll.size(); ++h) {
    if (ll[h] > ll[best]) best = h;
  }
  double runner_up = -std::numeric_limits<double>::infinity();
  for (std::size_t h = 0; h < ll.size(); ++h) {
    if (h != best) runner_up = std::max(runner_up, ll[h]);
  }
  return {best, ll[best] - runner_up};
}

std::vector<std::size_t> GenericChernoff::degenerate_hypotheses() const {
  std::vector<std::size_t> out;
  for (std::size_t h = 0; h < solutions_.size(); ++h) {
    if (solutions_[h].degenerate) out.push_back(h);
  }
  return out;
}

PolicyAction chernoff_generic_step(const SearchState& state, const PolicyConfig& cfg,
                                   const GenericChernoff& generic, RandomStream& rng) {
  const auto [ml, margin] = generic.ml_and_margin(state);
  if (margin >= cfg.threshold) return Stop{generic.hypotheses()[ml]};
  const auto& q = generic.solution(ml).q;
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  std::size_t action = q.size() - 1;
  for (std::size_t a = 0; a < q.size(); ++a) {
    acc += q[a];
    if (u < acc) {
      action = a;
      break;
    }
  }
  return Probe{generic.actions()[action]};
}

Policy::Policy(PolicyKind kind, const PolicyConfig& cfg) : Policy(kind, cfg, nullptr) {}

Policy::Policy(PolicyKind kind, const PolicyConfig& cfg, std::shared_ptr<const GenericChernoff> generic)
    : kind_(kind), cfg_(cfg), generic_(std::move(generic)) {
  switch (kind_) {
    case PolicyKind::dgf:
    case PolicyKind::chernoff:
      if (cfg_.num_targets != 1) {
        throw std::invalid_argument(std::string(policy_name(kind_)) + ": requires L = 1");
      }
      break;
    case PolicyKind::seq_dgf_l:
    case PolicyKind::unknown_l:
      if (cfg_.probes_per_round != 1) {
        throw std::invalid_argument(std::string(policy_name(kind_)) + ": requires K = 1");
      }
      break;
    case PolicyKind::chernoff_generic:
      if (!generic_) {
        generic_ = std::make_shared<GenericChernoff>(
            cfg_.kl, cfg_.num_cells, cfg_.probes_per_round,
            generic_hypotheses(cfg_.num_cells, cfg_.num_targets));
      }
      break;
    case PolicyKind::dgf_l:
      break;
  }
}

PolicyAction Policy::step(const SearchState& state, RandomStream& rng) const {
  switch (kind_) {
    case PolicyKind::dgf:
      return dgf_step(state, cfg_);
    case PolicyKind::chernoff:
      return chernoff_step(state, cfg_, rng);
    case PolicyKind::dgf_l:
      return dgfl_step(state, cfg_);
    case PolicyKind::seq_dgf_l:
      return seq_dgfl_step(state, cfg_);
    case PolicyKind::unknown_l:
      return unknownl_step(state, cfg_);
    case PolicyKind::chernoff_generic:
      return chernoff_generic_step(state, cfg_, *generic_, rng);
  }
  throw std::logic_error("policy: unhandled kind");
}

}  // namespace qad
