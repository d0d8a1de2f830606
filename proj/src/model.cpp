#include "qad/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qad {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

bool open_probability(double p) { return std::isfinite(p) && p > 0.0 && p < 1.0; }

double discrete_kl(const std::vector<double>& p, const std::vector<double>& q) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += p[i] * std::log(p[i] / q[i]);
  return sum;
}

void validate_pmf(const std::vector<double>& pmf, const char* name) {
  for (double p : pmf) {
    if (!(std::isfinite(p) && p > 0.0)) {
      throw std::invalid_argument(std::string("tabulated model: ") + name +
                                  " must be strictly positive on the shared support");
    }
  }
  const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument(std::string("tabulated model: ") + name + " must sum to 1");
  }
}

std::vector<double> cumulative(const std::vector<double>& pmf) {
  std::vector<double> cdf(pmf.size());
  std::partial_sum(pmf.begin(), pmf.end(), cdf.begin());
  cdf.back() = 1.0;
  return cdf;
}

KlPair validate_and_compute_kl(const ObservationModel::Kind& kind) {
  return std::visit(
      overloaded{
          [](const Exponential& m) {
            if (!positive_finite(m.lambda_f) || !positive_finite(m.lambda_g)) {
              throw std::invalid_argument("exponential model: rates must be positive and finite");
            }
            const double lf = m.lambda_f;
            const double lg = m.lambda_g;
            return KlPair{std::log(lg) - std::log(lf) + lf / lg - 1.0,
                          std::log(lf) - std::log(lg) + lg / lf - 1.0};
          },
          [](const Gaussian& m) {
            if (!std::isfinite(m.mu_f) || !std::isfinite(m.mu_g) || !positive_finite(m.sigma)) {
              throw std::invalid_argument("gaussian model: means must be finite and sigma > 0");
            }
            const double z = (m.mu_g - m.mu_f) / m.sigma;
            const double d = 0.5 * z * z;
            return KlPair{d, d};
          },
          [](const Bernoulli& m) {
            if (!open_probability(m.p_f) || !open_probability(m.p_g)) {
              throw std::invalid_argument("bernoulli model: probabilities must lie in (0, 1)");
            }
            const std::vector<double> f{1.0 - m.p_f, m.p_f};
            const std::vector<double> g{1.0 - m.p_g, m.p_g};
            return KlPair{discrete_kl(g, f), discrete_kl(f, g)};
          },
          [](const Tabulated& m) {
            if (m.support.empty() || m.pmf_f.size() != m.support.size() ||
                m.pmf_g.size() != m.support.size()) {
              throw std::invalid_argument(
                  "tabulated model: support and both pmfs must be non-empty and equally sized");
            }
            std::vector<double> sorted = m.support;
            std::sort(sorted.begin(), sorted.end());
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() ||
                !std::all_of(sorted.begin(), sorted.end(), [](double v) { return std::isfinite(v); })) {
              throw std::invalid_argument("tabulated model: support values must be distinct and finite");
            }
            validate_pmf(m.pmf_f, "pmf_f");
            validate_pmf(m.pmf_g, "pmf_g");
            return KlPair{discrete_kl(m.pmf_g, m.pmf_f), discrete_kl(m.pmf_f, m.pmf_g)};
          },
      },
      kind);
}

}  // namespace

ObservationModel::ObservationModel(Kind kind) : kind_(std::move(kind)) {
  kl_ = validate_and_compute_kl(kind_);
  if (!(kl_.d_gf >= kMinDivergence) || !(kl_.d_fg >= kMinDivergence)) {
    throw std::invalid_argument(
        "observation model: f and g must be distinguishable (both KL divergences >= 1e-9)");
  }
  if (const auto* t = std::get_if<Tabulated>(&kind_)) {
    cdf_f_ = cumulative(t->pmf_f);
    cdf_g_ = cumulative(t->pmf_g);
  }
}

ObservationModel ObservationModel::exponential(double lambda_f, double lambda_g) {
  return ObservationModel(Exponential{lambda_f, lambda_g});
}

ObservationModel ObservationModel::gaussian(double mu_f, double mu_g, double sigma) {
  return ObservationModel(Gaussian{mu_f, mu_g, sigma});
}

ObservationModel ObservationModel::bernoulli(double p_f, double p_g) {
  return ObservationModel(Bernoulli{p_f, p_g});
}

ObservationModel ObservationModel::tabulated(std::vector<double> support, std::vector<double> pmf_f,
                                             std::vector<double> pmf_g) {
  return ObservationModel(Tabulated{std::move(support), std::move(pmf_f), std::move(pmf_g)});
}

double ObservationModel::sample(bool abnormal, RandomStream& rng) const {
  return std::visit(
      overloaded{
          [&](const Exponential& m) {
            return std::exponential_distribution<double>(abnormal ? m.lambda_g : m.lambda_f)(rng);
          },
          [&](const Gaussian& m) {
            return std::normal_distribution<double>(abnormal ? m.mu_g : m.mu_f, m.sigma)(rng);
          },
          [&](const Bernoulli& m) {
            return std::bernoulli_distribution(abnormal ? m.p_g : m.p_f)(rng) ? 1.0 : 0.0;
          },
          [&](const Tabulated& m) {
            const auto& cdf = abnormal ? cdf_g_ : cdf_f_;
            const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            const auto idx = std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
            return m.support[idx];
          },
      },
      kind_);
}

double ObservationModel::llr(double y) const {
  return std::visit(
      overloaded{
          [&](const Exponential& m) {
            if (!(y >= 0.0)) throw std::domain_error("exponential llr: y must be non-negative");
            return std::log(m.lambda_g / m.lambda_f) - (m.lambda_g - m.lambda_f) * y;
          },
          [&](const Gaussian& m) {
            const double a = (y - m.mu_f) / m.sigma;
            const double b = (y - m.mu_g) / m.sigma;
            return 0.5 * (a * a - b * b);
          },
          [&](const Bernoulli& m) {
            if (y == 1.0) return std::log(m.p_g / m.p_f);
            if (y == 0.0) return std::log((1.0 - m.p_g) / (1.0 - m.p_f));
            throw std::domain_error("bernoulli llr: y must be 0 or 1");
          },
          [&](const Tabulated& m) {
            auto it = std::find(m.support.begin(), m.support.end(), y);
            if (it == m.support.end()) throw std::domain_error("tabulated llr: y outside the support");
            const auto idx = static_cast<std::size_t>(it - m.support.begin());
            return std::log(m.pmf_g[idx] / m.pmf_f[idx]);
          },
      },
      kind_);
}

ObservationModel ObservationModel::swapped() const {
  return std::visit(
      overloaded{
          [](const Exponential& m) { return ObservationModel(Exponential{m.lambda_g, m.lambda_f}); },
          [](const Gaussian& m) { return ObservationModel(Gaussian{m.mu_g, m.mu_f, m.sigma}); },
          [](const Bernoulli& m) { return ObservationModel(Bernoulli{m.p_g, m.p_f}); },
          [](const Tabulated& m) { return ObservationModel(Tabulated{m.support, m.pmf_g, m.pmf_f}); },
      },
      kind_);
}

std::string ObservationModel::kind_name() const {
  return std::visit(overloaded{
                        [](const Exponential&) { return std::string("exponential"); },
                        [](const Gaussian&) { return std::string("gaussian"); },
                        [](const Bernoulli&) { return std::string("bernoulli"); },
                        [](const Tabulated&) { return std::string("tabulated"); },
                    },
                    kind_);
}

}  // namespace qad
