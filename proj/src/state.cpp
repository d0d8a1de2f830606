#include "qad/state.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qad {

SearchState::SearchState(std::size_t num_cells)
    : sums_(num_cells, 0.0), counts_(num_cells, 0), declared_mask_(num_cells, 0) {
  if (num_cells == 0) throw std::invalid_argument("search state: need at least one cell");
}

void SearchState::check_probes(std::span<const std::size_t> probes) const {
  for (std::size_t i = 0; i < probes.size(); ++i) {
    if (probes[i] >= sums_.size()) {
      throw std::domain_error("search state: probe index " + std::to_string(probes[i]) +
                              " out of range");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (probes[j] == probes[i]) {
        throw std::domain_error("search state: duplicate probe " + std::to_string(probes[i]));
      }
    }
  }
}

void SearchState::update(std::span<const std::size_t> probes, std::span<const double> observations,
                         const ObservationModel& model) {
  if (probes.size() != observations.size()) {
    throw std::invalid_argument("search state: one observation per probe required");
  }
  check_probes(probes);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    sums_[probes[i]] += model.llr(observations[i]);
    ++counts_[probes[i]];
  }
  ++round_;
}

void SearchState::apply_llrs(std::span<const std::size_t> probes, std::span<const double> llrs) {
  if (probes.size() != llrs.size()) {
    throw std::invalid_argument("search state: one llr per probe required");
  }
  check_probes(probes);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    sums_[probes[i]] += llrs[i];
    ++counts_[probes[i]];
  }
  ++round_;
}

void SearchState::declare(std::span<const std::size_t> cells, DeclarationKind kind) {
  for (std::size_t cell : cells) {
    if (cell >= sums_.size()) throw std::domain_error("search state: declared cell out of range");
    if (declared_mask_[cell]) throw std::domain_error("search state: cell declared twice");
    declared_mask_[cell] = 1;
    declarations_.push_back({cell, round_, kind});
  }
}

std::vector<std::size_t> SearchState::ranked_cells() const {
  std::vector<std::size_t> order(sums_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [this](std::size_t a, std::size_t b) { return ranks_before(sums_, a, b); });
  return order;
}

double SearchState::gap(std::size_t rank) const {
  if (rank == 0 || rank >= sums_.size()) {
    throw std::domain_error("search state: gap rank must satisfy 1 <= L < M");
  }
  std::vector<double> sorted = sums_;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank), sorted.end(),
                   std::greater<>());
  const double below = sorted[rank];
  const double above =
      *std::min_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank));
  return above - below;
}

std::size_t SearchState::declared_count(DeclarationKind kind) const {
  return static_cast<std::size_t>(std::count_if(declarations_.begin(), declarations_.end(),
                                                [kind](const Declaration& d) { return d.kind == kind; }));
}

}  // namespace qad
