// Serial reference vs OpenMP trial loop on the fig2 scenario.
//
//   bench_sim [trials] [threads]

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "qad/sim.hpp"

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const std::uint64_t trials = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 100000;
  const int threads = argc > 2 ? std::atoi(argv[2]) : omp_get_max_threads();

  bool identical = true;
  std::printf("%-10s %8s %8s %10s %10s %8s\n", "policy", "-log c", "threads", "serial s", "omp s", "speedup");
  for (auto policy : {qad::PolicyKind::dgf, qad::PolicyKind::chernoff}) {
    qad::ExperimentConfig cfg;
    cfg.policy = policy;
    cfg.trials = trials;
    cfg.threads = threads;
    const qad::Simulator sim(cfg);
    for (double t : {1.0, 5.0}) {
      const double c = std::exp(-t);
      std::vector<qad::TrialResult> serial, parallel;
      const double ts = seconds([&] { serial = sim.run_trials_serial(c); });
      const double tp = seconds([&] { parallel = sim.run_trials_parallel(c); });
      identical = identical && serial == parallel;
      std::printf("%-10s %8.1f %8d %10.4f %10.4f %8.2f\n", std::string(qad::policy_name(policy)).c_str(), t,
                  threads, ts, tp, ts / tp);
    }
  }
  std::printf("serial == parallel: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
