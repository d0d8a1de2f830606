#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "qad/random.hpp"
#include "qad/sim.hpp"

using namespace qad;

namespace {

ExperimentConfig fig2(PolicyKind policy = PolicyKind::dgf) {
  ExperimentConfig cfg;
  cfg.policy = policy;
  cfg.model = ObservationModel::exponential(0.5, 10.0);
  cfg.trials = 2000;
  cfg.seed = 17;
  return cfg;
}

ExperimentConfig unknown_cfg(PolicyKind policy) {
  ExperimentConfig cfg;
  cfg.policy = policy;
  cfg.num_cells = 3;
  cfg.num_targets = 2;
  cfg.true_target_count = 1;
  cfg.model = ObservationModel::exponential(1.0, 0.25);
  cfg.trials = 400;
  cfg.seed = 5;
  return cfg;
}

TrialResult trial(std::uint64_t tau, bool correct, std::uint64_t tau_d = 0) {
  TrialResult r;
  r.tau = tau;
  r.tau_d = tau_d == 0 ? tau : tau_d;
  r.correct = correct;
  return r;
}

double type7(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const double lo = std::floor(h);
  const auto i = static_cast<std::size_t>(lo);
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (h - lo) * (v[i + 1] - v[i]);
}

// Two cells probed together every round under DGF; written against the trial
// stream contract without going through the policy or state code.
TrialResult two_cell_reference(double lf, double lg, std::uint64_t seed, std::uint64_t index, double t) {
  const auto model = ObservationModel::exponential(lf, lg);
  RandomStream rng = derive_stream(seed, index);
  const std::size_t truth = std::uniform_int_distribution<std::size_t>(0, 1)(rng);
  double s[2] = {0.0, 0.0};
  std::uint64_t n = 0;
  for (;;) {
    const std::size_t top = s[1] > s[0] ? 1 : 0;
    if (std::abs(s[0] - s[1]) >= t) {
      TrialResult r;
      r.truth = {truth};
      r.decision = {top};
      r.correct = top == truth;
      r.tau = n;
      r.tau_d = n;
      r.observations = 2 * n;
      return r;
    }
    const std::size_t order[2] = {top, 1 - top};
    double y[2];
    for (int i = 0; i < 2; ++i) y[i] = model.sample(order[i] == truth, rng);
    for (int i = 0; i < 2; ++i) s[order[i]] += std::log(lg / lf) - (lg - lf) * y[i];
    ++n;
  }
}

}  // namespace

TEST_SUITE("sim") {
  TEST_CASE("validation names the violated invariant") {
    auto bad = fig2();
    bad.probes_per_round = 6;
    CHECK_THROWS_WITH_AS(validate(bad), "1 <= K <= M violated", std::invalid_argument);
    bad = fig2();
    bad.num_targets = 5;
    CHECK_THROWS_WITH_AS(validate(bad), "1 <= L < M violated", std::invalid_argument);
    bad = fig2();
    bad.num_targets = 2;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = fig2();
    bad.neg_log_costs = {1.0, -2.0};
    CHECK_THROWS_WITH_AS(validate(bad), "c in (0, 1) violated (-log c must be positive)", std::invalid_argument);
    bad.neg_log_costs = {};
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = fig2();
    bad.trials = 0;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = fig2();
    bad.priors = {0.5, 0.5};
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad.priors = {0.2, 0.2, 0.2, 0.2, 0.3};
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = fig2();
    bad.fixed_targets = CellSet{7};
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = unknown_cfg(PolicyKind::unknown_l);
    bad.true_target_count = 3;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = unknown_cfg(PolicyKind::unknown_l);
    bad.probes_per_round = 2;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    CHECK_NOTHROW(validate(fig2()));
  }

  TEST_CASE("candidate target sets") {
    CHECK(candidate_target_sets(fig2()).size() == 5);
    auto multi = fig2(PolicyKind::dgf_l);
    multi.num_targets = 2;
    CHECK(candidate_target_sets(multi).size() == 10);
    auto u = unknown_cfg(PolicyKind::unknown_l);
    CHECK(unknown_count_mode(u));
    CHECK(candidate_target_sets(u).size() == 3);
    u.true_target_count = 2;
    CHECK(candidate_target_sets(u) == std::vector<CellSet>{{0, 1}, {0, 2}, {1, 2}});
    CHECK(unknown_count_mode(unknown_cfg(PolicyKind::chernoff_generic)));
    CHECK_FALSE(unknown_count_mode(fig2(PolicyKind::chernoff_generic)));
  }

  TEST_CASE("aggregate examples") {
    std::vector<TrialResult> same(50, trial(10, true));
    const auto a = aggregate(same, 0.01);
    CHECK(a.p_e == 0.0);
    CHECK(a.mean_tau == 10.0);
    CHECK(a.sigma == 0.0);
    CHECK(a.bayes_risk == doctest::Approx(0.1));
    CHECK(a.ci_low == a.ci_high);
    CHECK(a.r_empirical == 0.0);
    CHECK(a.trial_count == 50);

    const auto b = aggregate({trial(8, true), trial(12, false)}, 0.1);
    CHECK(b.p_e == 0.5);
    CHECK(b.mean_tau == 10.0);
    CHECK(b.sigma == doctest::Approx(2.0 * std::sqrt(2.0)));
    CHECK(b.bayes_risk == doctest::Approx(0.5 + 1.0));
    CHECK(b.ci_high - b.ci_low == doctest::Approx(2.0 * 1.959963984540054 * 2.0));
    CHECK_THROWS_AS(aggregate({}, 0.1), std::domain_error);
  }

  TEST_CASE("aggregate risk uses the detection round") {
    const auto m = aggregate({trial(20, true, 5), trial(30, true, 15)}, 0.1);
    CHECK(m.mean_tau == 25.0);
    CHECK(m.mean_tau_d == 10.0);
    CHECK(m.bayes_risk == doctest::Approx(1.0));
    CHECK(m.risk_ci_high - m.risk_ci_low == doctest::Approx(1.959963984540054));
  }

  TEST_CASE("empirical spread ratio matches a type-7 quantile oracle") {
    std::vector<TrialResult> rs;
    std::vector<double> taus;
    for (std::uint64_t i = 0; i < 137; ++i) {
      const std::uint64_t tau = 1 + (i * i * 7 + 3 * i) % 41;
      rs.push_back(trial(tau, i % 9 != 0));
      taus.push_back(static_cast<double>(tau));
    }
    const double mean = std::accumulate(taus.begin(), taus.end(), 0.0) / 137.0;
    double ss = 0.0;
    for (double v : taus) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / 136.0);
    const auto m = aggregate(rs, 0.05);
    CHECK(m.sigma == doctest::Approx(sd));
    CHECK(m.r_empirical == doctest::Approx(0.5 * (type7(taus, 0.975) - type7(taus, 0.025)) / sd));
    CHECK(m.p_e == doctest::Approx(16.0 / 137.0));
  }

  TEST_CASE("two-cell runs match an independent reference") {
    ExperimentConfig cfg;
    cfg.num_cells = 2;
    cfg.probes_per_round = 2;
    cfg.model = ObservationModel::exponential(1.0, 3.0);
    cfg.seed = 23;
    cfg.trials = 100;
    const Simulator sim(cfg);
    const double t = 4.0;
    for (std::uint64_t i = 0; i < cfg.trials; ++i) {
      const auto got = sim.run_trial(std::exp(-t), i);
      const auto want = two_cell_reference(1.0, 3.0, cfg.seed, i, t);
      CHECK(got.truth == want.truth);
      CHECK(got.decision == want.decision);
      CHECK(got.tau == want.tau);
      CHECK(got.observations == want.observations);
      CHECK(got.correct == want.correct);
    }
  }

  TEST_CASE("a cost close to one stops after the first round") {
    auto cfg = fig2();
    cfg.probes_per_round = 5;
    const Simulator sim(cfg);
    for (std::uint64_t i = 0; i < 100; ++i) CHECK(sim.run_trial(std::exp(-1e-9), i).tau == 1);
  }

  TEST_CASE("trials are reproducible and independent of the thread count") {
    std::vector<ExperimentConfig> cfgs{fig2(PolicyKind::dgf), fig2(PolicyKind::chernoff),
                                       unknown_cfg(PolicyKind::unknown_l),
                                       unknown_cfg(PolicyKind::chernoff_generic)};
    auto multi = fig2(PolicyKind::dgf_l);
    multi.num_targets = 2;
    multi.probes_per_round = 2;
    cfgs.push_back(multi);
    auto seq = fig2(PolicyKind::seq_dgf_l);
    seq.num_targets = 2;
    cfgs.push_back(seq);
    for (auto cfg : cfgs) {
      cfg.trials = 600;
      cfg.neg_log_costs = {2.0, 4.0};
      const auto serial = Simulator(cfg).run_trials_serial(std::exp(-3.0));
      for (int threads : {1, 2, 4}) {
        cfg.threads = threads;
        CHECK(Simulator(cfg).run_trials_parallel(std::exp(-3.0)) == serial);
      }
      CHECK(Simulator(cfg).run_trials_serial(std::exp(-3.0)) == serial);
      const auto a = run_experiment(cfg);
      const auto b = run_experiment_serial(cfg);
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].metrics.mean_tau == b[i].metrics.mean_tau);
        CHECK(a[i].metrics.p_e == b[i].metrics.p_e);
        CHECK(a[i].metrics.sigma == b[i].metrics.sigma);
      }
    }
  }

  TEST_CASE("detection round never exceeds termination") {
    for (auto cfg : {fig2(PolicyKind::chernoff), unknown_cfg(PolicyKind::unknown_l),
                     unknown_cfg(PolicyKind::chernoff_generic)}) {
      cfg.diagnostics = true;
      for (const auto& r : Simulator(cfg).run_trials_serial(std::exp(-4.0))) {
        CHECK(r.tau_d <= r.tau);
        if (r.tau1) CHECK(*r.tau1 <= r.tau);
        CHECK(std::is_sorted(r.decision.begin(), r.decision.end()));
      }
    }
  }

  TEST_CASE("truncation marks the trial and counts as an error") {
    auto cfg = fig2();
    cfg.max_rounds = 2;
    cfg.trials = 200;
    const auto rs = Simulator(cfg).run_trials_serial(std::exp(-30.0));
    for (const auto& r : rs) {
      CHECK(r.truncated);
      CHECK_FALSE(r.correct);
      CHECK(r.tau == 2);
      CHECK(r.decision.empty());
    }
    const auto m = aggregate(rs, std::exp(-30.0));
    CHECK(m.truncations == 200);
    CHECK(m.p_e == 1.0);
  }

  TEST_CASE("error probability stays below the cost scale") {
    for (const auto policy : {PolicyKind::dgf, PolicyKind::chernoff}) {
      auto cfg = fig2(policy);
      cfg.trials = 4000;
      cfg.neg_log_costs = {2.0, 3.0, 4.0, 5.0};
      double prev = 0.0;
      for (const auto& p : run_experiment(cfg)) {
        // A Bayes error at most (M - 1) c plus a 3 standard-error allowance.
        const double b = 4.0 * p.cost;
        CHECK(p.metrics.p_e <= b + 3.0 * std::sqrt(b * (1.0 - b) / 4000.0));
        CHECK(p.metrics.mean_tau > prev);
        prev = p.metrics.mean_tau;
      }
    }
  }

  TEST_CASE("unknown-count policies declare targets before stopping") {
    auto cfg = unknown_cfg(PolicyKind::unknown_l);
    cfg.fixed_targets = CellSet{0};
    cfg.trials = 1000;
    const auto m = aggregate(Simulator(cfg).run_trials_serial(std::exp(-6.0)), std::exp(-6.0));
    CHECK(m.mean_tau_d < m.mean_tau);
    CHECK(m.p_e < 0.1);
  }

  TEST_CASE("priors steer the truth distribution") {
    auto cfg = fig2();
    cfg.priors = {0.6, 0.1, 0.1, 0.1, 0.1};
    cfg.trials = 5000;
    const auto rs = Simulator(cfg).run_trials_serial(0.2);
    const auto zero = std::count_if(rs.begin(), rs.end(), [](const TrialResult& r) { return r.truth == CellSet{0}; });
    CHECK(std::abs(static_cast<double>(zero) / 5000.0 - 0.6) < 0.03);
  }

  TEST_CASE("fixed targets override the draw") {
    auto cfg = fig2(PolicyKind::dgf_l);
    cfg.num_targets = 2;
    cfg.fixed_targets = CellSet{4, 1};
    const Simulator sim(cfg);
    for (std::uint64_t i = 0; i < 50; ++i) {
      const auto r = sim.run_trial(0.1, i);
      CHECK(r.truth == CellSet{1, 4});
      CHECK(r.true_hypothesis == 6);
    }
  }

  TEST_CASE("the sink sees every round") {
    const Simulator sim(fig2());
    std::uint64_t calls = 0;
    const auto r = sim.run_trial(std::exp(-5.0), 3,
                                 [&](const SearchState& s, const std::vector<std::size_t>& probes,
                                     const std::vector<double>& obs) {
                                   ++calls;
                                   CHECK(s.round() == calls);
                                   CHECK(probes.size() == obs.size());
                                 });
    CHECK(calls == r.tau);
  }

  TEST_CASE("tau1 survival fit") {
    std::vector<TrialResult> rs;
    // tau1 = 1 + geometric-like counts so the survival tail is exactly 2^-n.
    for (std::uint64_t v = 1; v <= 12; ++v) {
      const std::uint64_t copies = std::uint64_t{1} << (12 - v);
      for (std::uint64_t i = 0; i < copies; ++i) {
        TrialResult r;
        r.tau1 = v;
        rs.push_back(r);
      }
    }
    rs.push_back(TrialResult{});
    const auto rep = tau1_decay(rs);
    CHECK(rep.censored == 1);
    CHECK(rep.measured == 4095);
    CHECK(rep.survival[0] == 1.0);
    REQUIRE(rep.conclusive);
    CHECK(rep.gamma_hat == doctest::Approx(std::log(2.0)).epsilon(0.02));
    for (double e : rep.residuals) CHECK(std::abs(e) < 0.05);

    std::vector<TrialResult> tiny(3);
    for (auto& r : tiny) r.tau1 = 2;
    CHECK_FALSE(tau1_decay(tiny).conclusive);
  }

  TEST_CASE("tau1 diagnostic needs a single target") {
    auto u = unknown_cfg(PolicyKind::unknown_l);
    u.true_target_count = 2;
    CHECK_THROWS_AS(tau1_decay_diagnostic(u, 0.1, 10), std::invalid_argument);
    const auto rep = tau1_decay_diagnostic(fig2(), std::exp(-0.5), 200);
    CHECK_FALSE(rep.conclusive);
  }
}
