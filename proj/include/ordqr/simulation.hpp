#ifndef ORDQR_SIMULATION_HPP
#define ORDQR_SIMULATION_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ordqr/dataset.hpp"
#include "ordqr/diagnostics.hpp"
#include "ordqr/gibbs.hpp"
#include "ordqr/random.hpp"

namespace ordqr {

enum class Scenario { Sim1, Sim2 };

Scenario parse_scenario(const std::string& name);
std::string to_string(Scenario s);

/// Liability l = alpha_i + x'beta + e with e ~ logistic(0, 1) and every
/// covariate ~ U[-0.1, 0.1], cut into five categories by true_delta.
struct ScenarioConfig {
  Scenario scenario = Scenario::Sim1;
  int subjects = 40;
  int n_per_subject = 5;
  Eigen::Vector3d true_beta{-5.0, -10.0, 15.0};
  Eigen::Vector4d true_delta{-0.8416, -0.2533, 0.2533, 0.8416};
  /// Standard deviation of alpha_i; 0 for sim1, 1 for sim2.
  double random_effect_sd = 0.0;
  int replications = 20;
  std::uint64_t seed = 0;
  /// Cut-point prior support used when fitting simulated data.
  double fit_delta_min = -3.0;
  double fit_delta_max = 3.0;

  static ScenarioConfig defaults(Scenario s);
  void validate() const;
};

/// Category of a liability value under ordered interior cut-points:
/// c such that delta_{c-1} < l <= delta_c.
int threshold_category(double liability, const Eigen::Ref<const Eigen::VectorXd>& interior_delta);

/// Dataset for either scenario. The random effects come from a substream
/// forked off `rng` before any covariate is drawn, so sim2 with
/// random_effect_sd = 0 reproduces sim1 exactly. When `liability` is given
/// it receives the latent l of every row.
OrdinalDataset generate_dataset(const ScenarioConfig& config, Rng& rng, Eigen::VectorXd* liability = nullptr);
OrdinalDataset generate_sim1(const ScenarioConfig& config, Rng& rng);
OrdinalDataset generate_sim2(const ScenarioConfig& config, Rng& rng);

/// JSON sidecar describing how a dataset was generated.
void write_dataset_metadata(const ScenarioConfig& config, const std::filesystem::path& path);

/// Posterior-mean estimates of (beta, delta) for one dataset and quantile.
using Estimator = std::function<Eigen::VectorXd(const OrdinalDataset&, double theta, const SamplerConfig&)>;

/// The Gibbs sampler with default priors and the scenario's cut-point support.
Estimator gibbs_estimator(const ScenarioConfig& config);

struct ReplicationRecord {
  int index;
  bool ok;
  std::string error;
  std::vector<Eigen::VectorXd> estimates;  ///< one per theta
};

struct ReplicationRun {
  ScenarioConfig config;
  std::vector<double> thetas;
  std::vector<std::string> parameters;
  Eigen::VectorXd truth;
  std::vector<ReplicationRecord> records;
  ReplicationReport report;
};

/// Generates config.replications datasets, fits each at every theta and
/// aggregates relative bias (and efficiency against the first theta).
/// A replication whose fit fails is dropped and listed in the report.
ReplicationRun run_replication_study(const ScenarioConfig& config, const SamplerConfig& sampler,
                                     const std::vector<double>& thetas, const Estimator& estimator = {});

/// Rebuilds the report from per-replication records.
ReplicationReport aggregate_replications(const std::vector<ReplicationRecord>& records,
                                         const std::vector<double>& thetas,
                                         const std::vector<std::string>& parameters, const Eigen::VectorXd& truth);

/// Per-replication estimates, one row per (replication, theta).
void write_replication_records(const ReplicationRun& run, const std::filesystem::path& path);

}  // namespace ordqr

#endif  // ORDQR_SIMULATION_HPP
