#include <gtest/gtest.h>

#include <random>

#include "gibbs_fixtures.hpp"
#include "ordqr/diagnostics.hpp"
#include "ordqr/draws_io.hpp"

using namespace ordqr;

namespace {

PosteriorDraws draws_from(const std::vector<Eigen::MatrixXd>& chains, std::vector<std::string> names) {
  PosteriorDraws d;
  d.names = std::move(names);
  d.num_chains = static_cast<int>(chains.size());
  d.draws_per_chain = chains[0].rows();
  d.values.resize(d.num_chains * d.draws_per_chain, chains[0].cols());
  d.chain.resize(d.values.rows());
  d.iteration.resize(d.values.rows());
  for (int c = 0; c < d.num_chains; ++c)
    for (Eigen::Index r = 0; r < d.draws_per_chain; ++r) {
      d.values.row(c * d.draws_per_chain + r) = chains[c].row(r);
      d.chain(c * d.draws_per_chain + r) = c;
      d.iteration(c * d.draws_per_chain + r) = static_cast<int>(r + 1);
    }
  return d;
}

Eigen::MatrixXd gaussian_chain(Eigen::Index n, Eigen::Index dim, std::uint64_t seed, double shift = 0.0) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(n, dim);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index j = 0; j < dim; ++j) m(r, j) = nd(g) + shift + 0.5 * (j > 0 ? m(r, j - 1) : 0.0);
  return m;
}

}  // namespace

TEST(Summary, ConstantColumn) {
  Eigen::MatrixXd v = Eigen::MatrixXd::Constant(100, 1, 0.1);
  const auto t = summarize(v, {"c"});
  EXPECT_EQ(t["c"].mean, 0.1);
  EXPECT_EQ(t["c"].sd, 0.0);
  EXPECT_EQ(t["c"].lower, 0.1);
  EXPECT_EQ(t["c"].upper, 0.1);
}

TEST(Summary, SmallExample) {
  Eigen::MatrixXd v(5, 1);
  v << 3, 1, 5, 2, 4;
  const auto t = summarize(v, {"x"}, 0.8);
  EXPECT_DOUBLE_EQ(t["x"].mean, 3.0);
  EXPECT_DOUBLE_EQ(t["x"].sd, std::sqrt(2.5));
  EXPECT_DOUBLE_EQ(t["x"].lower, 1.4);
  EXPECT_DOUBLE_EQ(t["x"].upper, 4.6);
  EXPECT_DOUBLE_EQ(quantile_type7({1, 2, 3, 4, 5}, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile_type7({1, 2, 3, 4, 5}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_type7({1, 2, 3, 4, 5}, 1.0), 5.0);
}

TEST(Summary, PoolingIdenticalChainsAndPermutation) {
  const Eigen::MatrixXd c = gaussian_chain(200, 2, 1);
  const auto one = summarize(draws_from({c}, {"a", "b"}));
  const auto two = summarize(draws_from({c, c}, {"a", "b"}));
  Eigen::MatrixXd reversed = c.colwise().reverse();
  const auto rev = summarize(draws_from({reversed}, {"a", "b"}));
  for (const char* n : {"a", "b"}) {
    EXPECT_NEAR(one[n].mean, two[n].mean, 1e-12);
    EXPECT_NEAR(one[n].lower, two[n].lower, 1e-12);
    EXPECT_NEAR(one[n].upper, two[n].upper, 1e-12);
    EXPECT_NEAR(one[n].mean, rev[n].mean, 1e-12);
    EXPECT_NEAR(one[n].sd, rev[n].sd, 1e-12);
    EXPECT_EQ(one[n].lower, rev[n].lower);
  }
}

TEST(Mpsrf, IdenticalChainsGiveLowerBound) {
  const Eigen::MatrixXd c = gaussian_chain(400, 3, 2);
  const auto r = mpsrf({c, c, c});
  EXPECT_NEAR(r.value, 399.0 / 400.0, 1e-10);
}

TEST(Mpsrf, UnivariateReducesToScalarPsrf) {
  std::vector<Eigen::MatrixXd> chains;
  std::vector<std::vector<double>> plain;
  for (int c = 0; c < 4; ++c) {
    chains.push_back(gaussian_chain(300, 1, 10 + c, 0.2 * c));
    plain.emplace_back(chains.back().data(), chains.back().data() + 300);
  }
  EXPECT_NEAR(mpsrf(chains).value, oracle::scalar_psrf(plain), 1e-10);
}

TEST(Mpsrf, SameTargetChainsApproachOne) {
  std::vector<Eigen::MatrixXd> chains;
  for (int c = 0; c < 4; ++c) chains.push_back(gaussian_chain(10000, 5, 20 + c));
  const auto r = mpsrf(chains);
  EXPECT_LT(std::abs(r.value - 1.0), 0.05);
  EXPECT_FALSE(r.regularized);
  std::vector<Eigen::MatrixXd> apart = chains;
  apart[0].array() += 3.0;
  EXPECT_GT(mpsrf(apart).value, 1.5);
}

TEST(Mpsrf, SingularWithinCovarianceIsRegularized) {
  std::vector<Eigen::MatrixXd> chains;
  for (int c = 0; c < 3; ++c) {
    Eigen::MatrixXd m = gaussian_chain(100, 2, 30 + c);
    m.col(1) = m.col(0);
    chains.push_back(m);
  }
  const auto r = mpsrf(chains);
  EXPECT_TRUE(r.regularized);
  EXPECT_TRUE(std::isfinite(r.value));
}

TEST(Mpsrf, RejectsSingleChain) { EXPECT_THROW(mpsrf({gaussian_chain(50, 2, 1)}), DomainError); }

TEST(Mpsrf, SeriesAtCheckpoints) {
  std::vector<Eigen::MatrixXd> chains;
  for (int c = 0; c < 2; ++c) chains.push_back(gaussian_chain(500, 2, 40 + c));
  const auto d = draws_from(chains, {"beta_1", "delta_1"});
  const auto cps = default_checkpoints(500, 2, 10);
  ASSERT_FALSE(cps.empty());
  EXPECT_EQ(cps.back(), 500);
  const auto s = mpsrf_series(d, default_mpsrf_columns(d), cps);
  ASSERT_EQ(s.value.size(), cps.size());
  std::vector<Eigen::MatrixXd> head{chains[0].topRows(cps[0]), chains[1].topRows(cps[0])};
  EXPECT_NEAR(s.value[0], mpsrf(head).value, 1e-12);
  EXPECT_NEAR(s.value.back(), mpsrf(chains).value, 1e-12);
}

namespace {

double sld_cdf(double e, double th) {
  return e <= 0 ? th * std::exp((1 - th) * e) : 1 - (1 - th) * std::exp(-th * e);
}

/// -2 log likelihood written directly from the skewed Laplace cell probabilities.
double hand_deviance(const ModelSpec& spec, const Eigen::VectorXd& beta, const Eigen::VectorXd& alpha,
                     const Eigen::VectorXd& cuts) {
  const auto& d = spec.data();
  double acc = 0;
  for (Eigen::Index r = 0; r < d.num_observations(); ++r) {
    const double eta = alpha(d.subject_of()(r)) + d.x().row(r).dot(beta);
    const int y = d.y()(r);
    const double hi = y == d.num_categories() ? 1.0 : sld_cdf(cuts(y - 1) - eta, spec.theta());
    const double lo = y == 1 ? 0.0 : sld_cdf(cuts(y - 2) - eta, spec.theta());
    acc += std::log(std::max(hi - lo, 1e-300));
  }
  return -2 * acc;
}

}  // namespace

TEST(Dic, SingleDrawHasNoEffectiveParameters) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, 1);
  const ModelSpec spec(0.5, Priors{}, fixture::make_data({{1}}, x, 2));
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(1, 3);
  const auto r = dic(draws_from({v}, {"beta_1", "delta_1", "alpha_1"}), spec);
  EXPECT_NEAR(r.effective_params, 0.0, 1e-12);
  EXPECT_NEAR(r.mean_deviance, 2 * std::log(2.0), 1e-12);
  EXPECT_NEAR(r.dic, 2 * std::log(2.0), 1e-12);
}

TEST(Dic, MatchesHandComputation) {
  Eigen::MatrixXd x(5, 2);
  x << 0.1, -0.5, 1.0, 0.3, -0.7, 0.2, 0.4, 0.4, 0.0, -1.0;
  const ModelSpec spec(0.3, Priors{}, fixture::make_data({{1, 3, 2}, {2, 3}}, x, 3));
  std::mt19937_64 g(5);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd v(40, 6);
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    v(r, 0) = 0.5 + 0.3 * nd(g);
    v(r, 1) = -0.2 + 0.3 * nd(g);
    v(r, 2) = -0.5 + 0.1 * nd(g);
    v(r, 3) = 0.6 + 0.1 * nd(g);
    v(r, 4) = 0.2 * nd(g);
    v(r, 5) = 0.2 * nd(g);
  }
  const std::vector<std::string> names{"beta_1", "beta_2", "delta_1", "delta_2", "alpha_1", "alpha_2"};
  const auto r = dic(draws_from({v}, names), spec);
  double dbar = 0;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const Eigen::RowVectorXd row = v.row(i);
    dbar += hand_deviance(spec, row.segment(0, 2).transpose(), row.segment(4, 2).transpose(),
                          row.segment(2, 2).transpose());
  }
  dbar /= v.rows();
  const Eigen::RowVectorXd m = v.colwise().mean();
  const double dhat =
      hand_deviance(spec, m.segment(0, 2).transpose(), m.segment(4, 2).transpose(), m.segment(2, 2).transpose());
  EXPECT_NEAR(r.mean_deviance, dbar, 1e-10);
  EXPECT_NEAR(r.deviance_at_mean, dhat, 1e-10);
  EXPECT_NEAR(r.effective_params, dbar - dhat, 1e-10);
  EXPECT_NEAR(r.dic, 2 * dbar - dhat, 1e-10);

  Eigen::MatrixXd extra(v.rows(), 8);
  extra << v, Eigen::VectorXd::Constant(v.rows(), 3.0), Eigen::VectorXd::Constant(v.rows(), 7.0);
  auto with_extra = names;
  with_extra.push_back("lambda_sq");
  with_extra.push_back("phi");
  EXPECT_NEAR(dic(draws_from({extra}, with_extra), spec).dic, r.dic, 1e-12);
}

TEST(Dic, RequiresAlphaColumns) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, 1);
  const ModelSpec spec(0.5, Priors{}, fixture::make_data({{1}}, x, 2));
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_ANY_THROW(dic(draws_from({v}, {"beta_1", "delta_1"}), spec));
}

TEST(ReplicationMetrics, Examples) {
  Eigen::VectorXd e(2);
  e << 1.1, 0.9;
  EXPECT_NEAR(relative_bias(e, 1.0), 0.0, 1e-15);
  e << -4.5, -5.5;
  EXPECT_NEAR(relative_bias(e, -5.0), 0.0, 1e-15);
  e << -4.0, -4.0;
  EXPECT_NEAR(relative_bias(e, -5.0), 0.2, 1e-15);
  Eigen::VectorXd a(3), b(3);
  a << 1, 2, 3;
  b << 2, 4, 6;
  EXPECT_NEAR(relative_efficiency(a, b), 0.25, 1e-15);
  EXPECT_NEAR(relative_efficiency(a, a), 1.0, 1e-15);
  EXPECT_THROW(relative_bias(a, 0.0), DomainError);
  EXPECT_THROW(relative_efficiency(a, Eigen::VectorXd::Constant(3, 1.0)), DomainError);
  EXPECT_THROW(relative_efficiency(a.head(1), a.head(1)), DomainError);
}

TEST(ReplicationMetrics, MatchBruteForce) {
  std::mt19937_64 g(8);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + trial;
    Eigen::VectorXd a(m), b(m);
    for (int i = 0; i < m; ++i) {
      a(i) = 3 + nd(g);
      b(i) = 3 + 2 * nd(g);
    }
    const double truth = 2.5 + 0.1 * trial;
    double bias = 0, ma = 0, mb = 0;
    for (int i = 0; i < m; ++i) {
      bias += (a(i) - truth) / std::abs(truth);
      ma += a(i);
      mb += b(i);
    }
    bias /= m;
    ma /= m;
    mb /= m;
    double sa = 0, sb = 0;
    for (int i = 0; i < m; ++i) {
      sa += (a(i) - ma) * (a(i) - ma);
      sb += (b(i) - mb) * (b(i) - mb);
    }
    EXPECT_NEAR(relative_bias(a, truth), bias, 1e-12);
    EXPECT_NEAR(relative_efficiency(a, b), sa / sb, 1e-12);
  }
}
