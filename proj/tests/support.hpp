#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "qad/policies.hpp"
#include "qad/state.hpp"

namespace testing {

/// State whose sums equal `s` after one round that probed every cell.
inline qad::SearchState state_with_sums(const std::vector<double>& s) {
  qad::SearchState state(s.size());
  std::vector<std::size_t> all(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) all[i] = i;
  state.apply_llrs(all, s);
  return state;
}

/// Selection sort by (sum desc, index asc).
inline std::vector<std::size_t> selection_rank(const std::vector<double>& s) {
  std::vector<std::size_t> left(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) left[i] = i;
  std::vector<std::size_t> out;
  while (!left.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < left.size(); ++i) {
      if (s[left[i]] > s[left[best]]) best = i;
    }
    out.push_back(left[best]);
    left.erase(left.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return out;
}

/// Sums drawn from a coarse lattice so ties are common.
inline std::vector<double> fuzz_sums(std::mt19937_64& rng, std::size_t m) {
  std::uniform_int_distribution<int> coarse(-6, 6);
  std::uniform_real_distribution<double> fine(-8.0, 8.0);
  std::bernoulli_distribution tie(0.3);
  std::vector<double> s(m);
  for (auto& v : s) v = tie(rng) ? coarse(rng) : fine(rng);
  return s;
}

// Independent KL formulas for the exponential family.
inline double exp_kl_gf(double lf, double lg) { return std::log(lg) - std::log(lf) + lf / lg - 1.0; }
inline double exp_kl_fg(double lf, double lg) { return std::log(lf) - std::log(lg) + lg / lf - 1.0; }

}  // namespace testing
