#include "qad/rates.hpp"

#include <cmath>
#include <stdexcept>

namespace qad {

const char* regime_name(Regime r) { return r == Regime::g ? "g" : "f"; }

bool favours_target(const KlPair& kl, std::size_t num_cells, std::size_t num_targets) {
  const double target_rate = kl.d_gf / static_cast<double>(num_targets);
  const double normal_rate = kl.d_fg / static_cast<double>(num_cells - num_targets);
  return target_rate >= normal_rate;
}

double RateReport::lower_bound_at(double cost) const { return bayes_lower_bound(cost, i_star); }

double RateReport::sample_size_bound_at(double cost) const {
  if (!(cost > 0.0 && cost < 1.0)) throw std::domain_error("rates: cost must lie in (0, 1)");
  return -std::log(cost) / i_star;
}

RateReport rate_single(const KlPair& kl, std::size_t num_cells, std::size_t probes_per_round) {
  if (num_cells < 2) throw std::domain_error("rate_single: need M >= 2");
  if (probes_per_round < 1 || probes_per_round > num_cells) {
    throw std::domain_error("rate_single: need 1 <= K <= M");
  }
  RateReport r;
  r.d_gf = kl.d_gf;
  r.d_fg = kl.d_fg;
  r.regime = favours_target(kl, num_cells, 1) ? Regime::g : Regime::f;
  const double k = static_cast<double>(probes_per_round);
  const double m1 = static_cast<double>(num_cells - 1);
  if (probes_per_round == num_cells) {
    r.i_star = kl.d_gf + kl.d_fg;
  } else if (r.regime == Regime::g) {
    r.i_star = kl.d_gf + (k - 1.0) * kl.d_fg / m1;
  } else {
    r.i_star = k * kl.d_fg / m1;
  }
  return r;
}

RateReport rate_single(const ObservationModel& model, std::size_t num_cells,
                       std::size_t probes_per_round) {
  return rate_single(model.kl(), num_cells, probes_per_round);
}

RateReport rate_multi(const KlPair& kl, std::size_t num_cells, std::size_t probes_per_round,
                      std::size_t num_targets) {
  if (num_targets < 1 || num_targets >= num_cells) throw std::domain_error("rate_multi: need 1 <= L < M");
  if (probes_per_round < 1 || probes_per_round > num_cells) {
    throw std::domain_error("rate_multi: need 1 <= K <= M");
  }
  RateReport r;
  r.d_gf = kl.d_gf;
  r.d_fg = kl.d_fg;
  r.regime = favours_target(kl, num_cells, num_targets) ? Regime::g : Regime::f;
  const double k = static_cast<double>(probes_per_round);
  const double l = static_cast<double>(num_targets);
  const double rest = static_cast<double>(num_cells - num_targets);
  if (probes_per_round == num_cells) {
    // Both branches reduce to the sum when every cell is probed.
    r.i_star = kl.d_gf + kl.d_fg;
  } else if (r.regime == Regime::g) {
    r.i_star = probes_per_round >= num_targets ? kl.d_gf + (k - l) * kl.d_fg / rest : k * kl.d_gf / l;
  } else {
    r.i_star = probes_per_round > num_cells - num_targets
                   ? kl.d_fg + (k - rest) * kl.d_gf / l
                   : k * kl.d_fg / rest;
  }
  return r;
}

RateReport rate_multi(const ObservationModel& model, std::size_t num_cells,
                      std::size_t probes_per_round, std::size_t num_targets) {
  return rate_multi(model.kl(), num_cells, probes_per_round, num_targets);
}

double bayes_lower_bound(double cost, double i_star) {
  if (!(cost > 0.0 && cost < 1.0)) throw std::domain_error("bayes_lower_bound: cost must lie in (0, 1)");
  if (!(i_star > 0.0)) throw std::domain_error("bayes_lower_bound: rate must be positive");
  return -cost * std::log(cost) / i_star;
}

double unknownl_lower_bound(double cost, std::size_t true_targets, const ObservationModel& model) {
  if (true_targets < 1) throw std::domain_error("unknownl_lower_bound: need at least one target");
  return static_cast<double>(true_targets) * bayes_lower_bound(cost, model.kl().d_gf);
}

double relative_loss(double r_policy, double r_lb) {
  if (!(r_lb > 0.0)) throw std::domain_error("relative_loss: lower bound must be positive");
  return (r_policy - r_lb) / r_lb;
}

bool cells_suffice_for_targets(const ObservationModel& model, std::size_t num_cells, std::size_t num_targets) {
  const auto& kl = model.kl();
  return static_cast<double>(num_cells) >=
         static_cast<double>(num_targets) * (kl.d_gf + kl.d_fg) / kl.d_gf;
}

}  // namespace qad
