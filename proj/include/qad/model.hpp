#pragma once

#include <string>
#include <variant>
#include <vector>

#include "qad/random.hpp"

namespace qad {

/// Exponential observations: f = exp(lambda_f), g = exp(lambda_g).
struct Exponential {
  double lambda_f;
  double lambda_g;
  bool operator==(const Exponential&) const = default;
};

/// Gaussian observations with a shared standard deviation.
struct Gaussian {
  double mu_f;
  double mu_g;
  double sigma;
  bool operator==(const Gaussian&) const = default;
};

/// Observations in {0, 1}; p_f and p_g are the probabilities of a 1.
struct Bernoulli {
  double p_f;
  double p_g;
  bool operator==(const Bernoulli&) const = default;
};

/// Finite support shared by both densities; pmfs must be strictly positive.
struct Tabulated {
  std::vector<double> support;
  std::vector<double> pmf_f;
  std::vector<double> pmf_g;
  bool operator==(const Tabulated&) const = default;
};

/// KL divergences of the abnormal/normal pair.
struct KlPair {
  double d_gf;  ///< D(g || f)
  double d_fg;  ///< D(f || g)
};

/// Observation densities for a normal cell (f) and an abnormal cell (g).
///
/// Immutable after construction. The constructor rejects parameter sets that
/// are invalid or where either KL divergence is below 1e-9, so every model in
/// circulation has finite LLRs and distinguishable hypotheses.
class ObservationModel {
 public:
  using Kind = std::variant<Exponential, Gaussian, Bernoulli, Tabulated>;

  static constexpr double kMinDivergence = 1e-9;

  explicit ObservationModel(Kind kind);

  static ObservationModel exponential(double lambda_f, double lambda_g);
  static ObservationModel gaussian(double mu_f, double mu_g, double sigma);
  static ObservationModel bernoulli(double p_f, double p_g);
  static ObservationModel tabulated(std::vector<double> support, std::vector<double> pmf_f,
                                    std::vector<double> pmf_g);

  const Kind& kind() const { return kind_; }

  /// Draws one observation from g when `abnormal`, otherwise from f.
  double sample(bool abnormal, RandomStream& rng) const;

  /// log g(y) - log f(y). Throws std::domain_error for y outside a discrete support.
  double llr(double y) const;

  const KlPair& kl() const { return kl_; }

  /// The same model with the roles of f and g exchanged.
  ObservationModel swapped() const;

  /// Short tag used in config files: exponential, gaussian, bernoulli, tabulated.
  std::string kind_name() const;

  bool operator==(const ObservationModel& other) const { return kind_ == other.kind_; }

 private:
  Kind kind_;
  KlPair kl_{};
  std::vector<double> cdf_f_;  // tabulated only
  std::vector<double> cdf_g_;
};

inline double sample(const ObservationModel& model, bool abnormal, RandomStream& rng) {
  return model.sample(abnormal, rng);
}

inline double llr(const ObservationModel& model, double y) { return model.llr(y); }

inline KlPair kl_divergences(const ObservationModel& model) { return model.kl(); }

}  // namespace qad
