#ifndef ORDQR_GIBBS_HPP
#define ORDQR_GIBBS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ordqr/model.hpp"
#include "ordqr/random.hpp"

namespace ordqr {

struct SamplerConfig {
  int iterations = 20000;
  int burn_in = 2000;
  int thin = 1;
  int num_chains = 1;
  std::uint64_t seed = 0;
  /// Perturb each chain's starting beta by N(0, 4).
  bool overdispersed_starts = false;
  /// Keep alpha_1..alpha_N in the draws (required for DIC).
  bool retain_alpha = false;

  /// floor((iterations - burn_in) / thin)
  int retained_per_chain() const { return (iterations - burn_in) / thin; }
  void validate() const;
};

/// Retained post-burn-in draws, chain-major: rows [c * n, (c + 1) * n)
/// belong to chain c.
struct PosteriorDraws {
  std::vector<std::string> names;
  Eigen::MatrixXd values;
  Eigen::VectorXi chain;
  Eigen::VectorXi iteration;  ///< sweep number (1-based) of each row
  int num_chains = 1;
  Eigen::Index draws_per_chain = 0;

  SamplerConfig config;
  double theta = 0.5;
  Priors priors;

  /// Column index of a parameter; throws if absent.
  Eigen::Index column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  /// Columns whose names start with the prefix, in order.
  std::vector<Eigen::Index> columns_with_prefix(const std::string& prefix) const;

  auto chain_rows(int c) const { return values.middleRows(c * draws_per_chain, draws_per_chain); }
};

/// Column names for a dataset: beta_1..beta_p, delta_1..delta_{C-1},
/// lambda_sq, phi and optionally alpha_1..alpha_N.
std::vector<std::string> parameter_names(const OrdinalDataset& data, bool with_alpha);

/// Below this rho1^2 the GIG updates clamp, avoiding the degenerate GIG(1/2, 0, rho2).
inline constexpr double kMinRho1Squared = 1e-12;

// Full-conditional updates, one per sweep step, each in place.
void update_v(ChainState& state, const ModelSpec& spec, Rng& rng);
void update_beta(ChainState& state, const ModelSpec& spec, Rng& rng);
void update_s(ChainState& state, const ModelSpec& spec, Rng& rng);
void update_lambda_sq(ChainState& state, const ModelSpec& spec, Rng& rng);
void update_alpha(ChainState& state, const ModelSpec& spec, Rng& rng);
void update_phi(ChainState& state, const ModelSpec& spec, Rng& rng);
void update_l(ChainState& state, const ModelSpec& spec, Rng& rng);
void update_delta(ChainState& state, const ModelSpec& spec, Rng& rng);

/// Closed-form mean and variance of the normal full conditional of beta_k
/// given everything else.
struct NormalConditional {
  double mean;
  double variance;
};
NormalConditional beta_conditional(const ChainState& state, const ModelSpec& spec, Eigen::Index k);
NormalConditional alpha_conditional(const ChainState& state, const ModelSpec& spec, Eigen::Index i);

/// Uniform support (L_c, U_c) of the full conditional of interior cut-point c.
std::pair<double, double> delta_conditional_bounds(const ChainState& state, const ModelSpec& spec, int c);

/// One systematic-scan sweep: v, beta, s, lambda^2, alpha, phi, l, delta.
void gibbs_sweep(ChainState& state, const ModelSpec& spec, Rng& rng);

/// Runs one chain from its own substream of config.seed. Throws
/// NumericalError naming the sweep and parameter on a non-finite state.
PosteriorDraws run_single_chain(const ModelSpec& spec, const SamplerConfig& config, int chain_index);

/// Runs config.num_chains chains (concurrently when cores allow) and stacks
/// them chain-major.
PosteriorDraws run_chain(const ModelSpec& spec, const SamplerConfig& config);

/// Number of worker threads to use for independent jobs.
unsigned worker_count(std::size_t jobs);

/// Runs job(0..count-1) on up to worker_count threads. Exceptions are
/// rethrown (first by index) after all jobs finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& job);

}  // namespace ordqr

#endif  // ORDQR_GIBBS_HPP
