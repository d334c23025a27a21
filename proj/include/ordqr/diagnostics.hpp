#ifndef ORDQR_DIAGNOSTICS_HPP
#define ORDQR_DIAGNOSTICS_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "ordqr/errors.hpp"
#include "ordqr/gibbs.hpp"
#include "ordqr/model.hpp"

namespace ordqr {

/// Average of (estimate - truth) / |truth| over replications.
template <typename Derived>
typename Derived::Scalar relative_bias(const Eigen::DenseBase<Derived>& estimates, typename Derived::Scalar truth) {
  using Scalar = typename Derived::Scalar;
  if (estimates.size() < 1) throw DomainError("relative bias needs at least one replication");
  if (truth == Scalar(0)) throw DomainError("relative bias is undefined for a zero true value");
  return (estimates.derived().array() - truth).mean() / std::abs(truth);
}

/// Mean squared deviation from the replication mean (divisor M).
template <typename Derived>
typename Derived::Scalar replication_variance(const Eigen::DenseBase<Derived>& estimates) {
  const auto centered = estimates.derived().array() - estimates.derived().array().mean();
  return centered.square().mean();
}

/// S^2(model) / S^2(reference).
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar relative_efficiency(const Eigen::DenseBase<DerivedA>& model,
                                              const Eigen::DenseBase<DerivedB>& reference) {
  if (model.size() < 2 || reference.size() < 2)
    throw DomainError("relative efficiency needs at least two replications");
  const auto ref = replication_variance(reference);
  if (ref == 0) throw DomainError("reference estimator has zero replication variance");
  return replication_variance(model) / ref;
}

/// Sample quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7): h = (n - 1) p, q = x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).
double quantile_type7(const std::vector<double>& sorted, double p);

struct ParameterSummary {
  std::string name;
  double mean;
  double sd;  ///< divisor n - 1
  double lower;
  double upper;
};

struct SummaryTable {
  double level = 0.95;
  std::vector<ParameterSummary> rows;

  const ParameterSummary& operator[](const std::string& name) const;
};

/// Pooled posterior mean, SD and equal-tailed interval per column.
SummaryTable summarize(const Eigen::MatrixXd& values, const std::vector<std::string>& names, double level = 0.95);
SummaryTable summarize(const PosteriorDraws& draws, double level = 0.95);

struct MpsrfValue {
  double value;
  bool regularized;  ///< W was ridge-regularized before inversion
};

/// Brooks-Gelman multivariate PSRF of m >= 2 equally long chains (rows are
/// draws): (n - 1)/n + (m + 1)/m * largest eigenvalue of W^-1 B/n.
MpsrfValue mpsrf(const std::vector<Eigen::MatrixXd>& chains);

struct MpsrfSeries {
  std::vector<int> iteration;    ///< sampler sweep at each checkpoint
  std::vector<Eigen::Index> draws;  ///< draws per chain used
  std::vector<double> value;
  std::vector<bool> regularized;
  std::vector<std::string> parameters;
};

/// beta and delta columns (plus lambda_sq and phi when asked).
std::vector<Eigen::Index> default_mpsrf_columns(const PosteriorDraws& draws, bool include_hyper = false);

/// Up to `count` evenly spaced checkpoints (draws per chain), starting once
/// the within-chain covariance can be full rank.
std::vector<Eigen::Index> default_checkpoints(Eigen::Index draws_per_chain, Eigen::Index dim, int count = 50);

/// MPSRF over the first k draws of every chain, for each checkpoint k.
MpsrfSeries mpsrf_series(const PosteriorDraws& draws, const std::vector<Eigen::Index>& columns,
                         const std::vector<Eigen::Index>& checkpoints);

struct DicResult {
  double dic;
  double mean_deviance;      ///< D-bar
  double deviance_at_mean;   ///< D(posterior mean)
  double effective_params;   ///< p_D
  Eigen::Index floored_cells;  ///< cell probabilities floored at 1e-300
};

/// -2 sum log P(y | beta, alpha, delta) under the marginal skewed Laplace
/// ordinal likelihood (mixing variable integrated out).
double deviance(const ModelSpec& spec, const Eigen::VectorXd& beta, const Eigen::VectorXd& alpha,
                const Eigen::VectorXd& interior_delta, Eigen::Index* floored = nullptr);

/// Conditional DIC; the draws must carry beta, delta and alpha columns.
DicResult dic(const PosteriorDraws& draws, const ModelSpec& spec);

struct ReplicationRow {
  double theta;
  std::string parameter;
  double truth;
  double bias;
  double efficiency;  ///< against the reference configuration
  int replications;   ///< completed replications
};

struct ReplicationReport {
  std::vector<ReplicationRow> rows;
  int requested = 0;
  int completed = 0;
  std::vector<std::string> failures;  ///< one message per dropped replication
};

void write_summary_csv(const SummaryTable& table, const std::filesystem::path& path);
void write_summary_text(const SummaryTable& table, const std::filesystem::path& path);
void write_mpsrf_csv(const MpsrfSeries& series, const std::filesystem::path& path);
/// Two whitespace-separated columns (iteration, value) for plotting.
void write_mpsrf_plot(const MpsrfSeries& series, const std::filesystem::path& path);
void write_dic_csv(const DicResult& result, const std::filesystem::path& path);
void write_replication_csv(const ReplicationReport& report, const std::filesystem::path& path);
void write_replication_text(const ReplicationReport& report, const std::filesystem::path& path);

}  // namespace ordqr

#endif  // ORDQR_DIAGNOSTICS_HPP
