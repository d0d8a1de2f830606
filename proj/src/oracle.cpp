#include "qad/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>

namespace qad {

std::vector<CellSet> subsets_of_size(std::size_t num_cells, std::size_t k) {
  std::vector<CellSet> out;
  if (k > num_cells) return out;
  CellSet current(k);
  for (std::size_t i = 0; i < k; ++i) current[i] = i;
  while (true) {
    out.push_back(current);
    // Advance to the next combination in lexicographic order.
    std::size_t i = k;
    while (i > 0 && current[i - 1] == num_cells - k + (i - 1)) --i;
    if (i == 0) break;
    ++current[i - 1];
    for (std::size_t j = i; j < k; ++j) current[j] = current[j - 1] + 1;
  }
  return out;
}

std::vector<CellSet> subsets_up_to(std::size_t num_cells, std::size_t max_size) {
  std::vector<CellSet> out;
  for (std::size_t k = 1; k <= std::min(max_size, num_cells); ++k) {
    auto level = subsets_of_size(num_cells, k);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

HypothesisActionKL::HypothesisActionKL(std::size_t num_hypotheses, std::size_t num_actions)
    : hypotheses_(num_hypotheses),
      actions_(num_actions),
      values_(num_hypotheses * num_hypotheses * num_actions, 0.0) {}

HypothesisActionKL HypothesisActionKL::anomaly(const KlPair& kl, std::size_t num_cells,
                                               const std::vector<CellSet>& hypotheses,
                                               const std::vector<CellSet>& actions) {
  HypothesisActionKL table(hypotheses.size(), actions.size());
  std::vector<std::vector<char>> abnormal(hypotheses.size(), std::vector<char>(num_cells, 0));
  for (std::size_t h = 0; h < hypotheses.size(); ++h) {
    for (std::size_t cell : hypotheses[h]) abnormal[h].at(cell) = 1;
  }
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    for (std::size_t j = 0; j < hypotheses.size(); ++j) {
      for (std::size_t u = 0; u < actions.size(); ++u) {
        double d = 0.0;
        for (std::size_t cell : actions[u]) {
          const bool gi = abnormal[i].at(cell) != 0;
          const bool gj = abnormal[j][cell] != 0;
          if (gi && !gj) d += kl.d_gf;
          if (!gi && gj) d += kl.d_fg;
        }
        table.at(i, j, u) = d;
      }
    }
  }
  return table;
}

namespace {

// Payoff matrix for the maximin problem: rows are actions, columns are the
// alternative hypotheses j != ml.
std::vector<std::vector<double>> payoff_matrix(const HypothesisActionKL& kl, std::size_t ml) {
  if (kl.num_hypotheses() < 2) throw std::invalid_argument("maximin: need at least two hypotheses");
  if (kl.num_actions() < 1) throw std::invalid_argument("maximin: need at least one action");
  if (ml >= kl.num_hypotheses()) throw std::out_of_range("maximin: ML hypothesis out of range");
  std::vector<std::vector<double>> a(kl.num_actions());
  for (std::size_t u = 0; u < kl.num_actions(); ++u) {
    for (std::size_t j = 0; j < kl.num_hypotheses(); ++j) {
      if (j != ml) a[u].push_back(kl.at(ml, j, u));
    }
  }
  return a;
}

MaximinSolution degenerate_solution(std::size_t actions) {
  MaximinSolution s;
  s.q.assign(actions, 1.0 / static_cast<double>(actions));
  s.value = 0.0;
  s.degenerate = true;
  return s;
}

}  // namespace

MaximinSolution maximin_action_distribution(const HypothesisActionKL& kl, std::size_t ml_hypothesis) {
  const auto a = payoff_matrix(kl, ml_hypothesis);
  const std::size_t rows = a.size();        // actions
  const std::size_t vars = a.front().size();  // alternatives
  const std::size_t cols = vars + rows;     // y variables then slacks
  constexpr double eps = 1e-12;

  // Packing LP: max sum(y) s.t. A y <= 1, y >= 0.
  std::vector<std::vector<double>> tab(rows, std::vector<double>(cols + 1, 0.0));
  std::vector<std::size_t> basis(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < vars; ++j) tab[r][j] = a[r][j];
    tab[r][vars + r] = 1.0;
    tab[r][cols] = 1.0;
    basis[r] = vars + r;
  }
  std::vector<double> obj(cols + 1, 0.0);
  for (std::size_t j = 0; j < vars; ++j) obj[j] = -1.0;

  for (std::size_t iter = 0;; ++iter) {
    if (iter > 10000) throw std::runtime_error("maximin: simplex failed to converge");
    std::size_t enter = cols;
    for (std::size_t j = 0; j < cols; ++j) {
      if (obj[j] < -eps) {
        enter = j;
        break;
      }
    }
    if (enter == cols) break;

    std::size_t leave = rows;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rows; ++r) {
      if (tab[r][enter] > eps) {
        const double ratio = tab[r][cols] / tab[r][enter];
        if (ratio < best_ratio - eps ||
            (std::abs(ratio - best_ratio) <= eps && leave < rows && basis[r] < basis[leave])) {
          best_ratio = ratio;
          leave = r;
        }
      }
    }
    if (leave == rows) return degenerate_solution(rows);  // unbounded dual

    const double pivot = tab[leave][enter];
    for (double& v : tab[leave]) v /= pivot;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == leave) continue;
      const double factor = tab[r][enter];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j <= cols; ++j) tab[r][j] -= factor * tab[leave][j];
    }
    const double factor = obj[enter];
    for (std::size_t j = 0; j <= cols; ++j) obj[j] -= factor * tab[leave][j];
    basis[leave] = enter;
  }

  const double total = obj[cols];  // sum(y) = 1 / value
  if (!(total > eps)) return degenerate_solution(rows);

  MaximinSolution s;
  s.q.resize(rows);
  double mass = 0.0;
  for (std::size_t u = 0; u < rows; ++u) {
    s.q[u] = std::max(0.0, obj[vars + u]);
    mass += s.q[u];
  }
  for (double& p : s.q) p /= mass;
  s.value = 1.0 / total;
  return s;
}

MaximinSolution maximin_grid_search(const HypothesisActionKL& kl, std::size_t ml_hypothesis,
                                    std::size_t resolution) {
  const auto a = payoff_matrix(kl, ml_hypothesis);
  const std::size_t actions = a.size();
  const std::size_t alternatives = a.front().size();
  if (resolution == 0) throw std::invalid_argument("maximin grid: resolution must be positive");

  MaximinSolution best;
  best.value = -1.0;
  std::vector<std::size_t> parts(actions, 0);

  auto evaluate = [&] {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < alternatives; ++j) {
      double sum = 0.0;
      for (std::size_t u = 0; u < actions; ++u) {
        sum += static_cast<double>(parts[u]) * a[u][j];
      }
      worst = std::min(worst, sum / static_cast<double>(resolution));
    }
    if (worst > best.value) {
      best.value = worst;
      best.q.resize(actions);
      for (std::size_t u = 0; u < actions; ++u) {
        best.q[u] = static_cast<double>(parts[u]) / static_cast<double>(resolution);
      }
    }
  };

  // Enumerate compositions of `resolution` into `actions` non-negative parts.
  auto recurse = [&](auto&& self, std::size_t index, std::size_t remaining) -> void {
    if (index + 1 == actions) {
      parts[index] = remaining;
      evaluate();
      return;
    }
    for (std::size_t k = 0; k <= remaining; ++k) {
      parts[index] = k;
      self(self, index + 1, remaining - k);
    }
  };
  recurse(recurse, 0, resolution);
  best.degenerate = best.value <= 0.0;
  return best;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double finite_sum_kl(const std::vector<double>& p, const std::vector<double>& q) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) sum += p[i] * (std::log(p[i]) - std::log(q[i]));
  }
  return sum;
}

template <class Integrator, class F>
double integrate_checked(Integrator& integrator, F f) {
  double error = 0.0;
  double l1 = 0.0;
  const double value = integrator.integrate(f, 1e-13, &error, &l1);
  if (!std::isfinite(value) || error > 1e-9 * std::max(1.0, std::abs(value))) {
    throw std::runtime_error("kl_quadrature: integration did not converge");
  }
  return value;
}

}  // namespace

KlPair kl_quadrature(const ObservationModel& model) {
  return std::visit(
      overloaded{
          [](const Exponential& m) {
            auto log_density = [](double rate, double y) { return std::log(rate) - rate * y; };
            auto divergence = [&](double p_rate, double q_rate) {
              boost::math::quadrature::exp_sinh<double> integrator;
              return integrate_checked(integrator, [&](double y) {
                const double lp = log_density(p_rate, y);
                const double lq = log_density(q_rate, y);
                return std::exp(lp) * (lp - lq);
              });
            };
            return KlPair{divergence(m.lambda_g, m.lambda_f), divergence(m.lambda_f, m.lambda_g)};
          },
          [](const Gaussian& m) {
            auto log_density = [&](double mu, double y) {
              const double z = (y - mu) / m.sigma;
              return -0.5 * z * z - std::log(m.sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
            };
            auto divergence = [&](double p_mu, double q_mu) {
              boost::math::quadrature::sinh_sinh<double> integrator;
              return integrate_checked(integrator, [&](double y) {
                const double lp = log_density(p_mu, y);
                const double lq = log_density(q_mu, y);
                const double w = std::exp(lp);
                return w == 0.0 ? 0.0 : w * (lp - lq);
              });
            };
            return KlPair{divergence(m.mu_g, m.mu_f), divergence(m.mu_f, m.mu_g)};
          },
          [](const Bernoulli& m) {
            const std::vector<double> f{1.0 - m.p_f, m.p_f};
            const std::vector<double> g{1.0 - m.p_g, m.p_g};
            return KlPair{finite_sum_kl(g, f), finite_sum_kl(f, g)};
          },
          [](const Tabulated& m) {
            return KlPair{finite_sum_kl(m.pmf_g, m.pmf_f), finite_sum_kl(m.pmf_f, m.pmf_g)};
          },
      },
      model.kind());
}

}  // namespace qad
