#include "ordqr/gibbs.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "ordqr/distributions.hpp"
#include "ordqr/errors.hpp"

namespace ordqr {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void SamplerConfig::validate() const {
  if (iterations <= 0) throw ConfigError("iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations) throw ConfigError("burn-in must be in [0, iterations)");
  if (thin < 1) throw ConfigError("thin must be at least 1");
  if (num_chains < 1) throw ConfigError("need at least one chain");
  if (retained_per_chain() < 1) throw ConfigError("no draws retained after burn-in and thinning");
}

Eigen::Index PosteriorDraws::column(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DataError("draws have no column '" + name + "'");
  return it - names.begin();
}

bool PosteriorDraws::has_column(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<Eigen::Index> PosteriorDraws::columns_with_prefix(const std::string& prefix) const {
  std::vector<Eigen::Index> cols;
  for (std::size_t j = 0; j < names.size(); ++j)
    if (names[j].rfind(prefix, 0) == 0) cols.push_back(static_cast<Eigen::Index>(j));
  return cols;
}

std::vector<std::string> parameter_names(const OrdinalDataset& data, bool with_alpha) {
  std::vector<std::string> names;
  for (Eigen::Index k = 1; k <= data.num_covariates(); ++k) names.push_back("beta_" + std::to_string(k));
  for (int c = 1; c < data.num_categories(); ++c) names.push_back("delta_" + std::to_string(c));
  names.push_back("lambda_sq");
  names.push_back("phi");
  if (with_alpha)
    for (Eigen::Index i = 1; i <= data.num_subjects(); ++i) names.push_back("alpha_" + std::to_string(i));
  return names;
}

void update_v(ChainState& state, const ModelSpec& spec, Rng& rng) {
  const auto& data = spec.data();
  const Eigen::VectorXd eta = state.linear_predictor(data);
  const double rho2 = std::sqrt(0.5);
  for (Eigen::Index r = 0; r < eta.size(); ++r) {
    const double resid = state.latent_l(r) - eta(r);
    const double rho1_sq = std::max(0.5 * resid * resid, kMinRho1Squared);
    state.latent_v(r) = sample_gig({0.5, std::sqrt(rho1_sq), rho2}, rng);
  }
}

NormalConditional beta_conditional(const ChainState& state, const ModelSpec& spec, Eigen::Index k) {
  const auto& data = spec.data();
  const Eigen::VectorXd eta = state.linear_predictor(data);
  const auto xk = data.x().col(k);
  const Eigen::ArrayXd weight = 0.5 / state.latent_v.array();
  const Eigen::ArrayXd partial =
      state.latent_l.array() - eta.array() + xk.array() * state.beta(k) - spec.xi() * state.latent_v.array();
  const double precision = (xk.array().square() * weight).sum() + 1.0 / state.s(k);
  const double variance = 1.0 / precision;
  return {variance * (partial * xk.array() * weight).sum(), variance};
}

void update_beta(ChainState& state, const ModelSpec& spec, Rng& rng) {
  const auto& data = spec.data();
  const Eigen::ArrayXd weight = 0.5 / state.latent_v.array();
  // Full residual l - alpha - x'beta - xi v, updated as each beta_k moves.
  Eigen::ArrayXd resid = state.latent_l.array() - state.linear_predictor(data).array() -
                         spec.xi() * state.latent_v.array();
  for (Eigen::Index k = 0; k < data.num_covariates(); ++k) {
    const auto xk = data.x().col(k).array();
    const Eigen::ArrayXd partial = resid + xk * state.beta(k);
    const double precision = (xk.square() * weight).sum() + 1.0 / state.s(k);
    const double variance = 1.0 / precision;
    const double mean = variance * (partial * xk * weight).sum();
    state.beta(k) = mean + std::sqrt(variance) * rng.normal();
    resid = partial - xk * state.beta(k);
  }
}

void update_s(ChainState& state, const ModelSpec&, Rng& rng) {
  const double rho2 = std::sqrt(state.lambda_sq);
  for (Eigen::Index k = 0; k < state.s.size(); ++k) {
    const double rho1_sq = std::max(state.beta(k) * state.beta(k), kMinRho1Squared);
    state.s(k) = sample_gig({0.5, std::sqrt(rho1_sq), rho2}, rng);
  }
}

void update_lambda_sq(ChainState& state, const ModelSpec& spec, Rng& rng) {
  const auto& pr = spec.priors();
  const double shape = static_cast<double>(state.s.size()) + pr.a1;
  const double rate = 0.5 * state.s.sum() + pr.a2;
  state.lambda_sq = sample_gamma(shape, rate, rng);
}

NormalConditional alpha_conditional(const ChainState& state, const ModelSpec& spec, Eigen::Index i) {
  const auto& data = spec.data();
  const auto block = data.subject(i);
  double precision = 1.0 / state.phi;
  double weighted = 0.0;
  for (Eigen::Index r = block.first; r < block.first + block.size; ++r) {
    const double v = state.latent_v(r);
    const double eta = state.latent_l(r) - data.x().row(r).dot(state.beta) - spec.xi() * v;
    precision += 0.5 / v;
    weighted += 0.5 * eta / v;
  }
  const double variance = 1.0 / precision;
  return {variance * weighted, variance};
}

void update_alpha(ChainState& state, const ModelSpec& spec, Rng& rng) {
  const auto& data = spec.data();
  const Eigen::VectorXd xb = data.x() * state.beta;
  for (Eigen::Index i = 0; i < data.num_subjects(); ++i) {
    const auto block = data.subject(i);
    double precision = 1.0 / state.phi;
    double weighted = 0.0;
    for (Eigen::Index r = block.first; r < block.first + block.size; ++r) {
      const double v = state.latent_v(r);
      precision += 0.5 / v;
      weighted += 0.5 * (state.latent_l(r) - xb(r) - spec.xi() * v) / v;
    }
    const double variance = 1.0 / precision;
    state.alpha(i) = variance * weighted + std::sqrt(variance) * rng.normal();
  }
}

void update_phi(ChainState& state, const ModelSpec& spec, Rng& rng) {
  const auto& pr = spec.priors();
  const double shape = 0.5 * static_cast<double>(state.alpha.size()) + pr.b1;
  const double scale = 0.5 * state.alpha.squaredNorm() + pr.b2;
  state.phi = sample_standard(dist::InverseGamma{shape, scale}, rng);
}

void update_l(ChainState& state, const ModelSpec& spec, Rng& rng) {
  const auto& data = spec.data();
  const Eigen::VectorXd eta = state.linear_predictor(data);
  for (Eigen::Index r = 0; r < eta.size(); ++r) {
    const int y = data.y()(r);
    const double v = state.latent_v(r);
    state.latent_l(r) =
        sample_trunc_normal({eta(r) + spec.xi() * v, 2.0 * v, state.delta(y - 1), state.delta(y)}, rng);
  }
}

namespace {

// Per-category extremes of the latent responses; empty categories give
// max = -inf and min = +inf.
struct CategoryExtremes {
  Eigen::VectorXd max_l;
  Eigen::VectorXd min_l;
};

CategoryExtremes category_extremes(const ChainState& state, const OrdinalDataset& data) {
  const int C = data.num_categories();
  CategoryExtremes ex{Eigen::VectorXd::Constant(C + 1, -kInf), Eigen::VectorXd::Constant(C + 1, kInf)};
  for (Eigen::Index r = 0; r < data.num_observations(); ++r) {
    const int y = data.y()(r);
    ex.max_l(y) = std::max(ex.max_l(y), state.latent_l(r));
    ex.min_l(y) = std::min(ex.min_l(y), state.latent_l(r));
  }
  return ex;
}

std::pair<double, double> bounds_from(const CategoryExtremes& ex, const ChainState& state, const Priors& pr, int c) {
  const double lower = std::max({ex.max_l(c), state.delta(c - 1), pr.delta_min});
  const double upper = std::min({ex.min_l(c + 1), state.delta(c + 1), pr.delta_max});
  return {lower, upper};
}

}  // namespace

std::pair<double, double> delta_conditional_bounds(const ChainState& state, const ModelSpec& spec, int c) {
  return bounds_from(category_extremes(state, spec.data()), state, spec.priors(), c);
}

void update_delta(ChainState& state, const ModelSpec& spec, Rng& rng) {
  const auto ex = category_extremes(state, spec.data());
  for (int c = 1; c < spec.data().num_categories(); ++c) {
    const auto [lower, upper] = bounds_from(ex, state, spec.priors(), c);
    if (!(lower < upper))
      throw NumericalError("cut-point " + std::to_string(c) + " has empty support [" + std::to_string(lower) + ", " +
                           std::to_string(upper) + "]; latent responses violate their categories");
    double d = lower + (upper - lower) * rng.uniform();
    // Keep strict ordering against the bounds under rounding.
    if (!(d > lower)) d = std::nextafter(lower, kInf);
    if (!(d < upper)) d = std::nextafter(upper, -kInf);
    state.delta(c) = d;
  }
}

void gibbs_sweep(ChainState& state, const ModelSpec& spec, Rng& rng) {
  update_v(state, spec, rng);
  update_beta(state, spec, rng);
  update_s(state, spec, rng);
  update_lambda_sq(state, spec, rng);
  update_alpha(state, spec, rng);
  update_phi(state, spec, rng);
  update_l(state, spec, rng);
  update_delta(state, spec, rng);
}

PosteriorDraws run_single_chain(const ModelSpec& spec, const SamplerConfig& config, int chain_index) {
  config.validate();
  const auto& data = spec.data();
  Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(chain_index));

  ChainState state = initialize_state(spec, rng);
  if (config.overdispersed_starts)
    for (Eigen::Index k = 0; k < state.beta.size(); ++k) state.beta(k) += 2.0 * rng.normal();

  PosteriorDraws out;
  out.names = parameter_names(data, config.retain_alpha);
  out.config = config;
  out.theta = spec.theta();
  out.priors = spec.priors();
  out.num_chains = 1;
  out.draws_per_chain = config.retained_per_chain();
  out.values.resize(out.draws_per_chain, static_cast<Eigen::Index>(out.names.size()));
  out.chain = Eigen::VectorXi::Constant(out.draws_per_chain, chain_index);
  out.iteration.resize(out.draws_per_chain);

  const Eigen::Index p = data.num_covariates();
  const int C = data.num_categories();
  Eigen::Index row = 0;
  for (int sweep = 1; sweep <= config.iterations; ++sweep) {
    try {
      gibbs_sweep(state, spec, rng);
    } catch (const DomainError& e) {
      throw NumericalError("chain " + std::to_string(chain_index) + ", sweep " + std::to_string(sweep) + ": " +
                           e.what());
    } catch (const NumericalError& e) {
      throw NumericalError("chain " + std::to_string(chain_index) + ", sweep " + std::to_string(sweep) + ": " +
                           e.what());
    }
    if (const auto bad = find_state_violation(state, spec))
      throw NumericalError("chain " + std::to_string(chain_index) + ", sweep " + std::to_string(sweep) +
                           ": invalid value in parameter '" + *bad + "'");

    if (sweep <= config.burn_in || (sweep - config.burn_in) % config.thin != 0) continue;
    auto dst = out.values.row(row);
    dst.head(p) = state.beta.transpose();
    dst.segment(p, C - 1) = state.delta.segment(1, C - 1).transpose();
    dst(p + C - 1) = state.lambda_sq;
    dst(p + C) = state.phi;
    if (config.retain_alpha) dst.tail(state.alpha.size()) = state.alpha.transpose();
    out.iteration(row) = sweep;
    ++row;
  }
  return out;
}

unsigned worker_count(std::size_t jobs) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(hw, std::max<std::size_t>(jobs, 1)));
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& job) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = worker_count(count);
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (unsigned t = 0; t < n; ++t) threads.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

PosteriorDraws run_chain(const ModelSpec& spec, const SamplerConfig& config) {
  config.validate();
  std::vector<PosteriorDraws> chains(config.num_chains);
  parallel_for(chains.size(), [&](std::size_t c) { chains[c] = run_single_chain(spec, config, static_cast<int>(c)); });

  PosteriorDraws out = std::move(chains.front());
  if (config.num_chains == 1) return out;
  const Eigen::Index n = out.draws_per_chain;
  Eigen::MatrixXd values(n * config.num_chains, out.values.cols());
  Eigen::VectorXi chain(n * config.num_chains), iteration(n * config.num_chains);
  values.topRows(n) = out.values;
  chain.head(n) = out.chain;
  iteration.head(n) = out.iteration;
  for (int c = 1; c < config.num_chains; ++c) {
    values.middleRows(c * n, n) = chains[c].values;
    chain.segment(c * n, n) = chains[c].chain;
    iteration.segment(c * n, n) = chains[c].iteration;
  }
  out.values = std::move(values);
  out.chain = std::move(chain);
  out.iteration = std::move(iteration);
  out.num_chains = config.num_chains;
  return out;
}

}  // namespace ordqr
