#ifndef ORDQR_MODEL_HPP
#define ORDQR_MODEL_HPP

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>

#include "ordqr/dataset.hpp"
#include "ordqr/random.hpp"

namespace ordqr {

/// Hyperparameters. lambda^2 ~ Gamma(a1, rate a2); phi ~ InvGamma(b1, scale
/// b2); interior cut-points are uniform order statistics on
/// (delta_min, delta_max).
struct Priors {
  double a1 = 0.1;
  double a2 = 0.1;
  double b1 = 0.1;
  double b2 = 0.1;
  double delta_min = -10.0;
  double delta_max = 10.0;

  void validate() const;
};

/// Quantile level, priors and data for one fit. Immutable once built.
class ModelSpec {
 public:
  ModelSpec(double theta, Priors priors, std::shared_ptr<const OrdinalDataset> data);

  double theta() const { return theta_; }
  /// 1 - 2 theta, the location coefficient of the mixing variable.
  double xi() const { return xi_; }
  /// theta (1 - theta), the rate of the exponential mixing variable.
  double zeta() const { return zeta_; }
  const Priors& priors() const { return priors_; }
  const OrdinalDataset& data() const { return *data_; }
  const std::shared_ptr<const OrdinalDataset>& data_ptr() const { return data_; }

 private:
  double theta_;
  double xi_;
  double zeta_;
  Priors priors_;
  std::shared_ptr<const OrdinalDataset> data_;
};

/// One complete draw of every unknown in the augmented posterior.
struct ChainState {
  Eigen::VectorXd beta;      ///< p
  Eigen::VectorXd alpha;     ///< N
  Eigen::VectorXd latent_l;  ///< one per observation
  Eigen::VectorXd latent_v;  ///< one per observation, > 0
  Eigen::VectorXd s;         ///< p, > 0
  double lambda_sq = 1.0;
  double phi = 1.0;
  Eigen::VectorXd delta;  ///< C + 1 cut-points, delta(0) = -inf, delta(C) = +inf

  /// Linear predictor alpha_i + x' beta per observation.
  Eigen::VectorXd linear_predictor(const OrdinalDataset& data) const;
};

/// Name of the first violated invariant, or nullopt if the state is valid.
std::optional<std::string> find_state_violation(const ChainState& state, const ModelSpec& spec);

/// P(y = c | beta, alpha_i, v, delta) for c = 1..C, from the conditional
/// normal form of the latent response.
Eigen::VectorXd category_probability(const ChainState& state, const ModelSpec& spec, Eigen::Index obs);

/// Interior cut-points equally spaced in (delta_min, delta_max).
Eigen::VectorXd equally_spaced_cutpoints(int num_categories, double delta_min, double delta_max);

/// Neutral start: beta = 0, alpha = 0, s = 1, lambda^2 = phi = 1, equally
/// spaced cut-points, v from its exponential prior and l from the truncated
/// normal matching each observed category.
ChainState initialize_state(const ModelSpec& spec, Rng& rng);

}  // namespace ordqr

#endif  // ORDQR_MODEL_HPP
