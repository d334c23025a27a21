#include <gtest/gtest.h>

#include <atomic>

#include "oracles.hpp"
#include "ordqr/simulation.hpp"

using namespace ordqr;

namespace {

double logistic_cdf(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::VectorXd truth_of(const ScenarioConfig& c) {
  Eigen::VectorXd t(7);
  t << c.true_beta, c.true_delta;
  return t;
}

}  // namespace

TEST(Scenario, Parsing) {
  EXPECT_EQ(parse_scenario("sim1"), Scenario::Sim1);
  EXPECT_EQ(parse_scenario("sim2"), Scenario::Sim2);
  EXPECT_EQ(to_string(Scenario::Sim2), "sim2");
  EXPECT_THROW(parse_scenario("sim3"), ConfigError);
  EXPECT_EQ(ScenarioConfig::defaults(Scenario::Sim1).random_effect_sd, 0.0);
  EXPECT_EQ(ScenarioConfig::defaults(Scenario::Sim2).random_effect_sd, 1.0);
  auto bad = ScenarioConfig::defaults(Scenario::Sim1);
  bad.subjects = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Scenario, ThresholdCategory) {
  const Eigen::Vector4d d{-0.8416, -0.2533, 0.2533, 0.8416};
  EXPECT_EQ(threshold_category(-1.0, d), 1);
  EXPECT_EQ(threshold_category(0.0, d), 3);
  EXPECT_EQ(threshold_category(-0.8416, d), 1);
  EXPECT_EQ(threshold_category(0.9, d), 5);
  EXPECT_EQ(threshold_category(0.5, d), 4);
}

TEST(Scenario, CategoryFrequenciesFollowLogisticError) {
  auto cfg = ScenarioConfig::defaults(Scenario::Sim1);
  cfg.true_beta.setZero();
  cfg.subjects = 200000;
  Rng rng(17);
  const auto data = generate_dataset(cfg, rng);
  ASSERT_EQ(data.num_observations(), 1000000);
  const auto counts = data.category_counts();
  double prev = 0.0;
  for (int c = 0; c < 5; ++c) {
    const double cum = c < 4 ? logistic_cdf(cfg.true_delta(c)) : 1.0;
    EXPECT_NEAR(static_cast<double>(counts[c]) / 1e6, cum - prev, 0.005) << "category " << c + 1;
    prev = cum;
  }
}

TEST(Scenario, RandomEffectLiabilityVariance) {
  auto cfg = ScenarioConfig::defaults(Scenario::Sim2);
  cfg.true_beta.setZero();
  cfg.subjects = 100000;
  Rng rng(18);
  Eigen::VectorXd l;
  generate_dataset(cfg, rng, &l);
  std::vector<double> v(l.data(), l.data() + l.size());
  const double expected = 1.0 + M_PI * M_PI / 3.0;
  EXPECT_NEAR(oracle::variance(v), expected, 0.02 * expected);
}

TEST(Scenario, Sim2Structure) {
  auto cfg = ScenarioConfig::defaults(Scenario::Sim2);
  Rng rng(19);
  Eigen::VectorXd l;
  const auto data = generate_dataset(cfg, rng, &l);
  EXPECT_EQ(data.num_subjects(), 40);
  EXPECT_EQ(data.num_observations(), 200);
  EXPECT_EQ(data.num_covariates(), 3);
  EXPECT_LE(data.x().maxCoeff(), 0.1);
  EXPECT_GE(data.x().minCoeff(), -0.1);
  for (Eigen::Index r = 0; r < l.size(); ++r)
    EXPECT_EQ(data.y()(r), threshold_category(l(r), cfg.true_delta));
  for (Eigen::Index i = 0; i < data.num_subjects(); ++i) {
    const auto b = data.subject(i);
    EXPECT_EQ(b.size, 5);
    for (Eigen::Index t = 0; t < 5; ++t) EXPECT_EQ(data.time()(b.first + t), t + 1);
  }
}

TEST(Scenario, Sim2WithoutRandomEffectsEqualsSim1) {
  auto c1 = ScenarioConfig::defaults(Scenario::Sim1);
  auto c2 = ScenarioConfig::defaults(Scenario::Sim2);
  c2.random_effect_sd = 0.0;
  Rng r1(23), r2(23);
  const auto a = generate_sim1(c1, r1);
  const auto b = generate_sim2(c2, r2);
  EXPECT_EQ(a.y(), b.y());
  EXPECT_EQ(a.x(), b.x());
}

TEST(Scenario, RandomEffectIsSharedWithinSubject) {
  // A huge random-effect sd makes within-subject liabilities differ only by noise.
  auto cfg = ScenarioConfig::defaults(Scenario::Sim2);
  cfg.true_beta.setZero();
  cfg.random_effect_sd = 1e6;
  Rng rng(29);
  Eigen::VectorXd l;
  const auto data = generate_dataset(cfg, rng, &l);
  for (Eigen::Index i = 0; i < data.num_subjects(); ++i) {
    const auto b = data.subject(i);
    const auto seg = l.segment(b.first, b.size);
    EXPECT_LT(seg.maxCoeff() - seg.minCoeff(), 100.0);
  }
}

TEST(Scenario, Deterministic) {
  const auto cfg = ScenarioConfig::defaults(Scenario::Sim2);
  Rng a(31), b(31), c(32);
  const auto da = generate_dataset(cfg, a), db = generate_dataset(cfg, b), dc = generate_dataset(cfg, c);
  EXPECT_EQ(da.y(), db.y());
  EXPECT_EQ(da.x(), db.x());
  EXPECT_NE(da.x(), dc.x());
}

TEST(Replication, ExactEstimatorHasNoBias) {
  auto cfg = ScenarioConfig::defaults(Scenario::Sim1);
  cfg.replications = 4;
  const Eigen::VectorXd truth = truth_of(cfg);
  const auto run = run_replication_study(cfg, SamplerConfig{}, {0.5, 0.25},
                                         [&](const OrdinalDataset&, double, const SamplerConfig&) { return truth; });
  EXPECT_EQ(run.report.completed, 4);
  ASSERT_EQ(run.report.rows.size(), 14u);
  for (const auto& row : run.report.rows) {
    EXPECT_EQ(row.bias, 0.0) << row.parameter;
    if (row.theta == 0.5) EXPECT_EQ(row.efficiency, 1.0);
  }
}

TEST(Replication, IdenticalEstimatorsAreEquallyEfficient) {
  auto cfg = ScenarioConfig::defaults(Scenario::Sim1);
  cfg.replications = 5;
  const Eigen::VectorXd truth = truth_of(cfg);
  const auto run = run_replication_study(cfg, SamplerConfig{}, {0.5, 0.1},
                                         [&](const OrdinalDataset& d, double, const SamplerConfig&) {
                                           return Eigen::VectorXd(truth.array() + d.x()(0, 0));
                                         });
  for (const auto& row : run.report.rows) EXPECT_NEAR(row.efficiency, 1.0, 1e-12) << row.parameter;
}

TEST(Replication, AggregationMatchesBruteForce) {
  const std::vector<double> thetas{0.5, 0.25};
  const std::vector<std::string> params{"a", "b"};
  Eigen::Vector2d truth{2.0, -1.0};
  std::vector<ReplicationRecord> recs;
  const double vals[3][2][2] = {{{2.5, -1.0}, {1.0, -2.0}}, {{1.5, -0.5}, {3.0, 0.0}}, {{2.2, -1.3}, {2.0, -1.0}}};
  for (int r = 0; r < 3; ++r) {
    ReplicationRecord rec{r, true, "", {}};
    for (int t = 0; t < 2; ++t) rec.estimates.push_back(Eigen::Vector2d(vals[r][t][0], vals[r][t][1]));
    recs.push_back(rec);
  }
  recs.push_back({3, false, "boom", {}});
  const auto rep = aggregate_replications(recs, thetas, params, truth);
  EXPECT_EQ(rep.completed, 3);
  EXPECT_EQ(rep.requested, 4);
  ASSERT_EQ(rep.failures.size(), 1u);
  for (const auto& row : rep.rows) {
    const int t = row.theta == 0.5 ? 0 : 1;
    const int j = row.parameter == "a" ? 0 : 1;
    double bias = 0, m = 0, mr = 0;
    for (int r = 0; r < 3; ++r) {
      bias += (vals[r][t][j] - truth(j)) / std::abs(truth(j)) / 3.0;
      m += vals[r][t][j] / 3.0;
      mr += vals[r][0][j] / 3.0;
    }
    double s = 0, sr = 0;
    for (int r = 0; r < 3; ++r) {
      s += (vals[r][t][j] - m) * (vals[r][t][j] - m);
      sr += (vals[r][0][j] - mr) * (vals[r][0][j] - mr);
    }
    EXPECT_NEAR(row.bias, bias, 1e-12);
    EXPECT_NEAR(row.efficiency, s / sr, 1e-12);
    EXPECT_EQ(row.replications, 3);
  }
}

TEST(Replication, SingleReplication) {
  auto cfg = ScenarioConfig::defaults(Scenario::Sim1);
  cfg.replications = 1;
  const Eigen::VectorXd truth = truth_of(cfg);
  const auto run = run_replication_study(cfg, SamplerConfig{}, {0.5, 0.75},
                                         [&](const OrdinalDataset&, double, const SamplerConfig&) { return truth; });
  EXPECT_EQ(run.report.completed, 1);
  for (const auto& row : run.report.rows) {
    EXPECT_EQ(row.bias, 0.0);
    if (row.theta != 0.5) EXPECT_TRUE(std::isnan(row.efficiency));
  }
}

TEST(Replication, FailedFitsAreDroppedAndReported) {
  auto cfg = ScenarioConfig::defaults(Scenario::Sim1);
  cfg.replications = 6;
  const Eigen::VectorXd truth = truth_of(cfg);
  std::atomic<int> calls{0};
  const auto run = run_replication_study(cfg, SamplerConfig{}, {0.5},
                                         [&](const OrdinalDataset&, double, const SamplerConfig&) {
                                           if (calls++ == 2) throw NumericalError("diverged");
                                           return truth;
                                         });
  EXPECT_EQ(run.report.requested, 6);
  EXPECT_EQ(run.report.completed, 5);
  ASSERT_EQ(run.report.failures.size(), 1u);
  EXPECT_NE(run.report.failures[0].find("diverged"), std::string::npos);
  for (const auto& row : run.report.rows) EXPECT_EQ(row.replications, 5);
}

TEST(Replication, GibbsStudyIsDeterministic) {
  auto cfg = ScenarioConfig::defaults(Scenario::Sim1);
  cfg.replications = 2;
  cfg.seed = 9;
  SamplerConfig s;
  s.iterations = 300;
  s.burn_in = 100;
  const auto a = run_replication_study(cfg, s, {0.5});
  const auto b = run_replication_study(cfg, s, {0.5});
  ASSERT_EQ(a.records.size(), 2u);
  EXPECT_EQ(a.records[1].estimates[0], b.records[1].estimates[0]);
  EXPECT_EQ(a.parameters.front(), "beta_1");
  EXPECT_EQ(a.parameters.back(), "delta_4");
}
