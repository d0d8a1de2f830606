#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "qad/state.hpp"
#include "support.hpp"

using qad::SearchState;

TEST_SUITE("state") {
  TEST_CASE("single additive update") {
    SearchState s(3);
    const std::vector<std::size_t> probes{0};
    const std::vector<double> llrs{1.5};
    s.apply_llrs(probes, llrs);
    CHECK(s.sums() == std::vector<double>{1.5, 0.0, 0.0});
    CHECK(s.counts() == std::vector<std::uint64_t>{1, 0, 0});
    CHECK(s.round() == 1);
  }

  TEST_CASE("update evaluates the model's llr") {
    const auto m = qad::ObservationModel::exponential(0.5, 10.0);
    SearchState s(4);
    const std::vector<std::size_t> probes{2, 0};
    const std::vector<double> obs{0.0, 1.0};
    s.update(probes, obs, m);
    CHECK(s.sums()[2] == doctest::Approx(std::log(20.0)));
    CHECK(s.sums()[0] == doctest::Approx(std::log(20.0) - 9.5));
    CHECK(s.sums()[1] == 0.0);
  }

  TEST_CASE("probing every cell conserves counts") {
    SearchState s(5);
    const std::vector<std::size_t> all{0, 1, 2, 3, 4};
    const std::vector<double> llrs{0.1, -0.2, 0.3, -0.4, 0.5};
    for (int n = 0; n < 7; ++n) s.apply_llrs(all, llrs);
    const auto total = std::accumulate(s.counts().begin(), s.counts().end(), std::uint64_t{0});
    CHECK(total == 5 * s.round());
  }

  TEST_CASE("replay of a recorded trajectory matches independent accumulation") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::size_t> cell(0, 5);
    std::normal_distribution<double> noise(0.0, 2.0);
    SearchState s(6);
    std::vector<long double> oracle(6, 0.0L);
    std::vector<std::uint64_t> counts(6, 0);
    for (int n = 0; n < 50; ++n) {
      std::size_t a = cell(rng);
      std::size_t b = cell(rng);
      while (b == a) b = cell(rng);
      const std::vector<std::size_t> probes{a, b};
      const std::vector<double> llrs{noise(rng), noise(rng)};
      s.apply_llrs(probes, llrs);
      oracle[a] += llrs[0];
      oracle[b] += llrs[1];
      ++counts[a];
      ++counts[b];
    }
    for (std::size_t m = 0; m < 6; ++m) CHECK(std::abs(s.sums()[m] - static_cast<double>(oracle[m])) <= 1e-12);
    CHECK(s.counts() == counts);
    CHECK(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}) == 2 * s.round());
  }

  TEST_CASE("invalid probes are domain errors") {
    SearchState s(3);
    const std::vector<double> one{1.0};
    const std::vector<double> two{1.0, 2.0};
    CHECK_THROWS_AS(s.apply_llrs(std::vector<std::size_t>{3}, one), std::domain_error);
    CHECK_THROWS_AS(s.apply_llrs(std::vector<std::size_t>{1, 1}, two), std::domain_error);
    CHECK_THROWS_AS(s.apply_llrs(std::vector<std::size_t>{1, 2}, one), std::invalid_argument);
    CHECK(s.round() == 0);
  }

  TEST_CASE("ranked cells") {
    CHECK(testing::state_with_sums({3.2, -1.0, 0.5}).ranked_cells() == std::vector<std::size_t>{0, 2, 1});
    CHECK(SearchState(3).ranked_cells() == std::vector<std::size_t>{0, 1, 2});
    CHECK(testing::state_with_sums({1.0, 2.0, 2.0, 1.0}).ranked_cells() == std::vector<std::size_t>{1, 2, 0, 3});
  }

  TEST_CASE("ranked cells agree with a selection-sort oracle") {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::size_t> size(2, 12);
    for (int i = 0; i < 1000; ++i) {
      const auto sums = testing::fuzz_sums(rng, size(rng));
      const auto ranked = testing::state_with_sums(sums).ranked_cells();
      CHECK(ranked == testing::selection_rank(sums));
      auto sorted = ranked;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t k = 0; k < sorted.size(); ++k) REQUIRE(sorted[k] == k);
    }
  }

  TEST_CASE("gap") {
    CHECK(testing::state_with_sums({3.2, -1.0, 0.5}).gap(1) == doctest::Approx(2.7));
    const auto flat = testing::state_with_sums({0.7, 0.7, 0.7, 0.7});
    for (std::size_t l = 1; l < 4; ++l) CHECK(flat.gap(l) == 0.0);
    CHECK_THROWS_AS(flat.gap(4), std::domain_error);
    CHECK_THROWS_AS(flat.gap(0), std::domain_error);
  }

  TEST_CASE("gap agrees with the sort oracle and is non-negative") {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<std::size_t> size(2, 10);
    for (int i = 0; i < 1000; ++i) {
      const auto sums = testing::fuzz_sums(rng, size(rng));
      const auto state = testing::state_with_sums(sums);
      const auto order = testing::selection_rank(sums);
      for (std::size_t l = 1; l < sums.size(); ++l) {
        const double g = state.gap(l);
        CHECK(g >= 0.0);
        CHECK(g == sums[order[l - 1]] - sums[order[l]]);
      }
    }
  }

  TEST_CASE("update is order-insensitive within a round") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
      std::vector<std::size_t> probes{0, 1, 2, 3, 4, 5};
      std::shuffle(probes.begin(), probes.end(), rng);
      probes.resize(3);
      std::vector<double> llrs{1.25, -0.5, 3.0};
      SearchState a(6), b(6);
      a.apply_llrs(probes, llrs);
      std::vector<std::size_t> p2{probes[2], probes[0], probes[1]};
      std::vector<double> l2{llrs[2], llrs[0], llrs[1]};
      b.apply_llrs(p2, l2);
      CHECK(a == b);
    }
  }

  TEST_CASE("unprobed cells keep a zero sum") {
    SearchState s(4);
    s.apply_llrs(std::vector<std::size_t>{1}, std::vector<double>{2.0});
    for (std::size_t m = 0; m < 4; ++m) {
      if (s.counts()[m] == 0) CHECK(s.sums()[m] == 0.0);
    }
  }

  TEST_CASE("declarations are append-only and unique") {
    SearchState s(4);
    s.declare(std::vector<std::size_t>{2}, qad::DeclarationKind::abnormal);
    s.apply_llrs(std::vector<std::size_t>{0}, std::vector<double>{-1.0});
    s.declare(std::vector<std::size_t>{0, 3}, qad::DeclarationKind::normal);
    REQUIRE(s.declarations().size() == 3);
    CHECK(s.declarations()[0] == qad::Declaration{2, 0, qad::DeclarationKind::abnormal});
    CHECK(s.declarations()[1].round == 1);
    CHECK(s.declarations()[2].cell == 3);
    for (std::size_t i = 1; i < s.declarations().size(); ++i) {
      CHECK(s.declarations()[i - 1].round <= s.declarations()[i].round);
    }
    CHECK(s.is_declared(2));
    CHECK_FALSE(s.is_declared(1));
    CHECK(s.declared_count(qad::DeclarationKind::normal) == 2);
    CHECK(s.declared_count(qad::DeclarationKind::abnormal) == 1);
    CHECK_THROWS(s.declare(std::vector<std::size_t>{2}, qad::DeclarationKind::normal));
    CHECK_THROWS(s.declare(std::vector<std::size_t>{9}, qad::DeclarationKind::normal));
  }
}
