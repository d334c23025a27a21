#include "ordqr/simulation.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "ordqr/distributions.hpp"
#include "ordqr/draws_io.hpp"
#include "ordqr/errors.hpp"
#include "ordqr/version.hpp"

namespace ordqr {

Scenario parse_scenario(const std::string& name) {
  if (name == "sim1") return Scenario::Sim1;
  if (name == "sim2") return Scenario::Sim2;
  throw ConfigError("unknown scenario '" + name + "' (expected sim1 or sim2)");
}

std::string to_string(Scenario s) { return s == Scenario::Sim1 ? "sim1" : "sim2"; }

ScenarioConfig ScenarioConfig::defaults(Scenario s) {
  ScenarioConfig c;
  c.scenario = s;
  c.random_effect_sd = s == Scenario::Sim2 ? 1.0 : 0.0;
  return c;
}

void ScenarioConfig::validate() const {
  if (subjects < 1) throw ConfigError("need at least one subject");
  if (n_per_subject < 1) throw ConfigError("need at least one observation per subject");
  if (replications < 1) throw ConfigError("need at least one replication");
  if (!(random_effect_sd >= 0.0)) throw ConfigError("random effect SD must be non-negative");
  for (int c = 1; c < true_delta.size(); ++c)
    if (!(true_delta(c) > true_delta(c - 1))) throw ConfigError("true cut-points must be strictly increasing");
  if (!(fit_delta_min < true_delta(0) && true_delta(true_delta.size() - 1) < fit_delta_max))
    throw ConfigError("fit cut-point support must contain the true cut-points");
}

int threshold_category(double liability, const Eigen::Ref<const Eigen::VectorXd>& interior_delta) {
  int c = 1;
  while (c <= interior_delta.size() && liability > interior_delta(c - 1)) ++c;
  return c;
}

OrdinalDataset generate_dataset(const ScenarioConfig& config, Rng& rng, Eigen::VectorXd* liability) {
  config.validate();
  Rng alpha_rng(rng.next_u64());

  const Eigen::Index n = static_cast<Eigen::Index>(config.subjects) * config.n_per_subject;
  const Eigen::Index p = config.true_beta.size();
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXi y(n), time(n);
  std::vector<std::string> ids;
  std::vector<Eigen::Index> offsets{0};
  const Eigen::VectorXd delta = config.true_delta;
  if (liability) liability->resize(n);

  Eigen::Index r = 0;
  for (int i = 0; i < config.subjects; ++i) {
    const double alpha =
        config.random_effect_sd > 0.0 ? config.random_effect_sd * alpha_rng.normal() : 0.0;
    ids.push_back(std::to_string(i + 1));
    for (int j = 0; j < config.n_per_subject; ++j, ++r) {
      for (Eigen::Index k = 0; k < p; ++k) x(r, k) = sample_standard(dist::Uniform{-0.1, 0.1}, rng);
      const double eps = sample_standard(dist::Logistic{0.0, 1.0}, rng);
      const double l = alpha + x.row(r).dot(config.true_beta) + eps;
      y(r) = threshold_category(l, delta);
      if (liability) (*liability)(r) = l;
      time(r) = j + 1;
    }
    offsets.push_back(r);
  }
  return OrdinalDataset(std::move(ids), std::move(offsets), std::move(y), std::move(x), std::move(time),
                        static_cast<int>(delta.size()) + 1);
}

OrdinalDataset generate_sim1(const ScenarioConfig& config, Rng& rng) {
  ScenarioConfig c = config;
  c.scenario = Scenario::Sim1;
  c.random_effect_sd = 0.0;
  return generate_dataset(c, rng);
}

OrdinalDataset generate_sim2(const ScenarioConfig& config, Rng& rng) {
  ScenarioConfig c = config;
  c.scenario = Scenario::Sim2;
  return generate_dataset(c, rng);
}

void write_dataset_metadata(const ScenarioConfig& config, const std::filesystem::path& path) {
  nlohmann::ordered_json meta;
  meta["software"] = "ordqr";
  meta["version"] = kVersion;
  meta["scenario"] = to_string(config.scenario);
  meta["subjects"] = config.subjects;
  meta["n_per_subject"] = config.n_per_subject;
  meta["true_beta"] = std::vector<double>(config.true_beta.begin(), config.true_beta.end());
  meta["true_delta"] = std::vector<double>(config.true_delta.begin(), config.true_delta.end());
  meta["error"] = "logistic(0, 1)";
  meta["covariates"] = "x1, x2, x3 independent U[-0.1, 0.1]";
  meta["random_effect_sd"] = config.random_effect_sd;
  meta["seed"] = config.seed;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << meta.dump(2) << '\n';
}

Estimator gibbs_estimator(const ScenarioConfig& config) {
  return [config](const OrdinalDataset& data, double theta, const SamplerConfig& sampler) {
    Priors priors;
    priors.delta_min = config.fit_delta_min;
    priors.delta_max = config.fit_delta_max;
    const ModelSpec spec(theta, priors, std::make_shared<OrdinalDataset>(data));
    const PosteriorDraws draws = run_chain(spec, sampler);
    const Eigen::Index p = data.num_covariates();
    const int C = data.num_categories();
    return Eigen::VectorXd(draws.values.leftCols(p + C - 1).colwise().mean().transpose());
  };
}

ReplicationReport aggregate_replications(const std::vector<ReplicationRecord>& records,
                                         const std::vector<double>& thetas,
                                         const std::vector<std::string>& parameters, const Eigen::VectorXd& truth) {
  ReplicationReport report;
  report.requested = static_cast<int>(records.size());
  std::vector<const ReplicationRecord*> done;
  for (const auto& rec : records) {
    if (rec.ok)
      done.push_back(&rec);
    else
      report.failures.push_back("replication " + std::to_string(rec.index) + ": " + rec.error);
  }
  report.completed = static_cast<int>(done.size());
  if (done.empty()) return report;

  const auto M = static_cast<Eigen::Index>(done.size());
  auto estimates_of = [&](std::size_t t, Eigen::Index h) {
    Eigen::VectorXd e(M);
    for (Eigen::Index r = 0; r < M; ++r) e(r) = done[r]->estimates[t](h);
    return e;
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    for (std::size_t h = 0; h < parameters.size(); ++h) {
      const auto hh = static_cast<Eigen::Index>(h);
      const Eigen::VectorXd est = estimates_of(t, hh);
      double eff = nan;
      if (t == 0) {
        eff = 1.0;
      } else if (M >= 2) {
        const Eigen::VectorXd ref = estimates_of(0, hh);
        if (replication_variance(ref) > 0.0) eff = relative_efficiency(est, ref);
      }
      report.rows.push_back({thetas[t], parameters[h], truth(hh), relative_bias(est, truth(hh)), eff,
                             static_cast<int>(M)});
    }
  }
  return report;
}

ReplicationRun run_replication_study(const ScenarioConfig& config, const SamplerConfig& sampler,
                                     const std::vector<double>& thetas, const Estimator& estimator) {
  config.validate();
  sampler.validate();
  if (thetas.empty()) throw ConfigError("need at least one quantile level");
  for (double t : thetas)
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("quantile levels must lie in (0, 1)");

  ReplicationRun run;
  run.config = config;
  run.thetas = thetas;
  for (Eigen::Index k = 1; k <= config.true_beta.size(); ++k) run.parameters.push_back("beta_" + std::to_string(k));
  for (Eigen::Index c = 1; c <= config.true_delta.size(); ++c)
    run.parameters.push_back("delta_" + std::to_string(c));
  run.truth.resize(config.true_beta.size() + config.true_delta.size());
  run.truth << config.true_beta, config.true_delta;

  const Estimator fit = estimator ? estimator : gibbs_estimator(config);
  run.records.resize(static_cast<std::size_t>(config.replications));
  parallel_for(run.records.size(), [&](std::size_t r) {
    auto& rec = run.records[r];
    rec.index = static_cast<int>(r) + 1;
    rec.ok = false;
    try {
      Rng data_rng = Rng::substream(config.seed, r, 0);
      const OrdinalDataset data = generate_dataset(config, data_rng);
      for (std::size_t t = 0; t < thetas.size(); ++t) {
        SamplerConfig sc = sampler;
        sc.seed = derive_seed(config.seed, r, t + 1);
        rec.estimates.push_back(fit(data, thetas[t], sc));
      }
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.estimates.clear();
      rec.error = e.what();
    }
  });
  run.report = aggregate_replications(run.records, thetas, run.parameters, run.truth);
  return run;
}

void write_replication_records(const ReplicationRun& run, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "replication,theta,status";
  for (const auto& p : run.parameters) out << ',' << p;
  out << '\n';
  for (const auto& rec : run.records) {
    for (std::size_t t = 0; t < run.thetas.size(); ++t) {
      out << rec.index << ',' << format_double(run.thetas[t]) << ',' << (rec.ok ? "ok" : "failed");
      for (std::size_t h = 0; h < run.parameters.size(); ++h)
        out << ',' << (rec.ok ? format_double(rec.estimates[t](static_cast<Eigen::Index>(h))) : "");
      out << '\n';
    }
  }
}

}  // namespace ordqr
