#pragma once

#include <cstddef>
#include <vector>

#include "qad/model.hpp"

namespace qad {

/// Sorted set of cell indices.
using CellSet = std::vector<std::size_t>;

/// All size-`k` subsets of {0..M-1} in lexicographic order.
std::vector<CellSet> subsets_of_size(std::size_t num_cells, std::size_t k);

/// All subsets with size in [1, max_size], grouped by size, lexicographic within a size.
std::vector<CellSet> subsets_up_to(std::size_t num_cells, std::size_t max_size);

/// KL divergences D(p_i^u || p_j^u) for every hypothesis pair (i, j) and action u.
///
/// A hypothesis is the set of abnormal cells; an action is the set of probed
/// cells. Observations from different cells are independent, so each entry is
/// the sum over probed cells of 0, D(g||f) or D(f||g).
class HypothesisActionKL {
 public:
  HypothesisActionKL(std::size_t num_hypotheses, std::size_t num_actions);

  /// Builds the table for an anomaly structure.
  static HypothesisActionKL anomaly(const KlPair& kl, std::size_t num_cells,
                                    const std::vector<CellSet>& hypotheses,
                                    const std::vector<CellSet>& actions);

  double& at(std::size_t i, std::size_t j, std::size_t action) {
    return values_[(i * hypotheses_ + j) * actions_ + action];
  }
  double at(std::size_t i, std::size_t j, std::size_t action) const {
    return values_[(i * hypotheses_ + j) * actions_ + action];
  }

  std::size_t num_hypotheses() const { return hypotheses_; }
  std::size_t num_actions() const { return actions_; }

 private:
  std::size_t hypotheses_;
  std::size_t actions_;
  std::vector<double> values_;
};

/// Optimal action distribution for one ML hypothesis.
struct MaximinSolution {
  std::vector<double> q;  ///< probability per action
  double value = 0.0;     ///< max_q min_{j != ml} sum_u q_u D(p_ml^u || p_j^u)
  bool degenerate = false;  ///< value is 0: some hypothesis is indistinguishable from ml
};

/// Solves max_q min_{j != ml} sum_u q_u D(p_ml^u || p_j^u) as a linear program.
///
/// Uses the game-value substitution x = q / v, which turns the problem into a
/// covering LP; its dual (a packing LP with a feasible origin) is solved with a
/// dense simplex under Bland's rule. An unbounded dual means value 0, reported
/// as degenerate with a uniform q.
MaximinSolution maximin_action_distribution(const HypothesisActionKL& kl, std::size_t ml_hypothesis);

/// Exhaustive search over the lattice {q : q_u = k_u / resolution}. Test reference only.
MaximinSolution maximin_grid_search(const HypothesisActionKL& kl, std::size_t ml_hypothesis,
                                    std::size_t resolution);

/// KL divergences by numerical integration (continuous kinds) or direct
/// summation (discrete kinds), independent of the closed forms in the model.
/// Throws std::runtime_error when the quadrature error estimate exceeds 1e-9.
KlPair kl_quadrature(const ObservationModel& model);

}  // namespace qad
