#pragma once

#include <cstddef>

#include "qad/model.hpp"

namespace qad {

/// Which side of the rate comparison holds. `g`: chase the abnormal cell(s);
/// `f`: eliminate normal cells. Exact ties are labelled `g`.
enum class Regime { g, f };

const char* regime_name(Regime r);

/// True iff D(g||f)/L >= D(f||g)/(M-L). With L = 1 this is the single-target comparison.
bool favours_target(const KlPair& kl, std::size_t num_cells, std::size_t num_targets);

/// Rate function and the derived asymptotic bounds for one configuration.
struct RateReport {
  double d_gf = 0.0;
  double d_fg = 0.0;
  double i_star = 0.0;
  Regime regime = Regime::g;

  /// -c log c / I*: asymptotic lower bound on the Bayes risk.
  double lower_bound_at(double cost) const;
  /// -log c / I*: asymptotic lower bound on the expected sample size.
  double sample_size_bound_at(double cost) const;

  bool operator==(const RateReport&) const = default;
};

/// I*(M, K) for a single abnormal cell. Requires 1 <= K <= M, M >= 2.
RateReport rate_single(const KlPair& kl, std::size_t num_cells, std::size_t probes_per_round);
RateReport rate_single(const ObservationModel& model, std::size_t num_cells,
                       std::size_t probes_per_round);

/// I*(M, K, L) for L known abnormal cells. Requires 1 <= L < M, 1 <= K <= M.
RateReport rate_multi(const KlPair& kl, std::size_t num_cells, std::size_t probes_per_round,
                      std::size_t num_targets);
RateReport rate_multi(const ObservationModel& model, std::size_t num_cells,
                      std::size_t probes_per_round, std::size_t num_targets);

/// -c log c / i_star. Requires 0 < c < 1 and i_star > 0.
double bayes_lower_bound(double cost, double i_star);

/// -ell c log c / D(g||f): the bound for the detection-time risk when ell
/// targets are present but only an upper bound on their number is known.
double unknownl_lower_bound(double cost, std::size_t true_targets, const ObservationModel& model);

/// (r_policy - r_lb) / r_lb. Requires r_lb > 0.
double relative_loss(double r_policy, double r_lb);

/// M >= L (D(g||f) + D(f||g)) / D(g||f).
bool cells_suffice_for_targets(const ObservationModel& model, std::size_t num_cells, std::size_t num_targets);

}  // namespace qad
