#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qad/model.hpp"

namespace qad {

enum class DeclarationKind { abnormal, normal };

/// A cell declared during the test, with the round at which it happened.
struct Declaration {
  std::size_t cell;
  std::uint64_t round;
  DeclarationKind kind;

  bool operator==(const Declaration&) const = default;
};

/// Per-trial bookkeeping: sum LLRs S_m(n), probe counts N_m(n), round n and
/// the declarations made so far.
///
/// Invariants: sums()[m] == 0 whenever counts()[m] == 0; declarations are
/// append-only with non-decreasing rounds and each cell is declared at most once.
class SearchState {
 public:
  explicit SearchState(std::size_t num_cells);

  /// Advances one round. `observations[i]` is the draw from cell `probes[i]`.
  /// Throws std::domain_error on out-of-range or duplicate probes.
  void update(std::span<const std::size_t> probes, std::span<const double> observations,
              const ObservationModel& model);

  /// Same as update() with the LLRs already evaluated.
  void apply_llrs(std::span<const std::size_t> probes, std::span<const double> llrs);

  /// Records declarations at the current round. Throws on an already declared cell.
  void declare(std::span<const std::size_t> cells, DeclarationKind kind);

  /// Cells sorted by sum LLR descending; ties by ascending index.
  std::vector<std::size_t> ranked_cells() const;

  /// S at rank L minus S at rank L+1 (1-based ranks). Requires 1 <= L < M.
  double gap(std::size_t rank) const;

  bool is_declared(std::size_t cell) const { return declared_mask_[cell] != 0; }
  std::size_t declared_count(DeclarationKind kind) const;

  std::size_t num_cells() const { return sums_.size(); }
  std::uint64_t round() const { return round_; }
  const std::vector<double>& sums() const { return sums_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  const std::vector<Declaration>& declarations() const { return declarations_; }

  bool operator==(const SearchState&) const = default;

 private:
  void check_probes(std::span<const std::size_t> probes) const;

  std::uint64_t round_ = 0;
  std::vector<double> sums_;
  std::vector<std::uint64_t> counts_;
  std::vector<Declaration> declarations_;
  std::vector<char> declared_mask_;
};

/// Ordering used by ranked_cells(): larger sum first, then smaller index.
inline bool ranks_before(const std::vector<double>& sums, std::size_t a, std::size_t b) {
  return sums[a] > sums[b] || (sums[a] == sums[b] && a < b);
}

}  // namespace qad
