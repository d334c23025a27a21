#include "ordqr/model.hpp"

#include <cmath>
#include <limits>

#include "ordqr/distributions.hpp"
#include "ordqr/errors.hpp"

namespace ordqr {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void Priors::validate() const {
  if (!(a1 > 0 && a2 > 0)) throw ConfigError("lambda^2 hyperparameters a1, a2 must be positive");
  if (!(b1 > 0 && b2 > 0)) throw ConfigError("phi hyperparameters b1, b2 must be positive");
  if (!std::isfinite(delta_min) || !std::isfinite(delta_max) || !(delta_min < delta_max))
    throw ConfigError("cut-point support needs finite delta_min < delta_max");
}

ModelSpec::ModelSpec(double theta, Priors priors, std::shared_ptr<const OrdinalDataset> data)
    : theta_(theta), xi_(1.0 - 2.0 * theta), zeta_(theta * (1.0 - theta)), priors_(priors), data_(std::move(data)) {
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("quantile level must lie in (0, 1)");
  priors_.validate();
  if (!data_) throw ConfigError("model needs a dataset");
}

Eigen::VectorXd ChainState::linear_predictor(const OrdinalDataset& data) const {
  Eigen::VectorXd eta = data.x() * beta;
  const auto& subject = data.subject_of();
  for (Eigen::Index r = 0; r < eta.size(); ++r) eta(r) += alpha(subject(r));
  return eta;
}

std::optional<std::string> find_state_violation(const ChainState& state, const ModelSpec& spec) {
  const auto& data = spec.data();
  const int C = data.num_categories();
  if (state.beta.size() != data.num_covariates() || !state.beta.allFinite()) return "beta";
  if (state.alpha.size() != data.num_subjects() || !state.alpha.allFinite()) return "alpha";
  if (state.s.size() != data.num_covariates() || !state.s.allFinite() || (state.s.array() <= 0).any()) return "s";
  if (!(std::isfinite(state.lambda_sq) && state.lambda_sq > 0)) return "lambda_sq";
  if (!(std::isfinite(state.phi) && state.phi > 0)) return "phi";
  if (state.latent_v.size() != data.num_observations() || !state.latent_v.allFinite() ||
      (state.latent_v.array() <= 0).any())
    return "v";
  if (state.delta.size() != C + 1 || state.delta(0) != -kInf || state.delta(C) != kInf) return "delta";
  for (int c = 1; c < C; ++c)
    if (!std::isfinite(state.delta(c)) || !(state.delta(c) > state.delta(c - 1))) return "delta";
  if (!(state.delta(C - 1) < state.delta(C))) return "delta";
  if (state.latent_l.size() != data.num_observations() || !state.latent_l.allFinite()) return "l";
  for (Eigen::Index r = 0; r < data.num_observations(); ++r) {
    const int y = data.y()(r);
    if (!(state.latent_l(r) > state.delta(y - 1) && state.latent_l(r) <= state.delta(y))) return "l";
  }
  return std::nullopt;
}

Eigen::VectorXd category_probability(const ChainState& state, const ModelSpec& spec, Eigen::Index obs) {
  const auto& data = spec.data();
  const int C = data.num_categories();
  const double v = state.latent_v(obs);
  const double center = state.alpha(data.subject_of()(obs)) + data.x().row(obs).dot(state.beta) + spec.xi() * v;
  const double sd = std::sqrt(2.0 * v);

  Eigen::VectorXd prob(C);
  for (int c = 1; c <= C; ++c) {
    const double lo = (state.delta(c - 1) - center) / sd;
    const double hi = (state.delta(c) - center) / sd;
    // Take the difference in whichever tail keeps precision.
    prob(c - 1) = lo >= 0.0 ? normal_ccdf(lo) - normal_ccdf(hi) : normal_cdf(hi) - normal_cdf(lo);
  }
  return prob;
}

Eigen::VectorXd equally_spaced_cutpoints(int num_categories, double delta_min, double delta_max) {
  const int C = num_categories;
  Eigen::VectorXd delta(C + 1);
  delta(0) = -kInf;
  delta(C) = kInf;
  const double step = (delta_max - delta_min) / C;
  for (int c = 1; c < C; ++c) delta(c) = delta_min + c * step;
  for (int c = 1; c < C; ++c) {
    const bool inside = delta(c) > delta_min && delta(c) < delta_max;
    if (!inside || (c > 1 && !(delta(c) > delta(c - 1))))
      throw ConfigError("cannot place " + std::to_string(C - 1) + " distinct cut-points in (delta_min, delta_max)");
  }
  return delta;
}

ChainState initialize_state(const ModelSpec& spec, Rng& rng) {
  const auto& data = spec.data();
  const Eigen::Index n = data.num_observations();
  const Eigen::Index p = data.num_covariates();

  ChainState state;
  state.beta = Eigen::VectorXd::Zero(p);
  state.alpha = Eigen::VectorXd::Zero(data.num_subjects());
  state.s = Eigen::VectorXd::Ones(p);
  state.lambda_sq = 1.0;
  state.phi = 1.0;
  state.delta = equally_spaced_cutpoints(data.num_categories(), spec.priors().delta_min, spec.priors().delta_max);

  state.latent_v.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) state.latent_v(r) = rng.exponential() / spec.zeta();

  state.latent_l.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const int y = data.y()(r);
    const double v = state.latent_v(r);
    state.latent_l(r) = sample_trunc_normal({spec.xi() * v, 2.0 * v, state.delta(y - 1), state.delta(y)}, rng);
  }
  return state;
}

}  // namespace ordqr
