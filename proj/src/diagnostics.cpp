#include "ordqr/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "ordqr/distributions.hpp"
#include "ordqr/draws_io.hpp"

namespace ordqr {

double quantile_type7(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw DomainError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile probability outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

const ParameterSummary& SummaryTable::operator[](const std::string& name) const {
  for (const auto& row : rows)
    if (row.name == name) return row;
  throw DataError("summary has no parameter '" + name + "'");
}

SummaryTable summarize(const Eigen::MatrixXd& values, const std::vector<std::string>& names, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("credible level must lie in (0, 1)");
  if (values.rows() < 2) throw DomainError("summaries need at least two draws");
  SummaryTable table;
  table.level = level;
  const double n = static_cast<double>(values.rows());
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    const auto col = values.col(j).array();
    // Shift by the first draw so a constant column gives mean c and SD 0 exactly.
    const double shift = col(0);
    const double offset = (col - shift).mean();
    const double sd = std::sqrt((col - shift - offset).square().sum() / (n - 1.0));
    std::vector<double> sorted(col.begin(), col.end());
    std::sort(sorted.begin(), sorted.end());
    table.rows.push_back({names.at(static_cast<std::size_t>(j)), shift + offset, sd,
                          quantile_type7(sorted, 0.5 * (1.0 - level)), quantile_type7(sorted, 0.5 * (1.0 + level))});
  }
  return table;
}

SummaryTable summarize(const PosteriorDraws& draws, double level) {
  return summarize(draws.values, draws.names, level);
}

MpsrfValue mpsrf(const std::vector<Eigen::MatrixXd>& chains) {
  const auto m = static_cast<Eigen::Index>(chains.size());
  if (m < 2) throw DomainError("MPSRF needs at least two chains");
  const Eigen::Index n = chains.front().rows();
  const Eigen::Index d = chains.front().cols();
  if (n < 2) throw DomainError("MPSRF needs at least two draws per chain");
  for (const auto& c : chains)
    if (c.rows() != n || c.cols() != d) throw DomainError("MPSRF chains must have equal shapes");

  Eigen::MatrixXd means(m, d);
  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index j = 0; j < m; ++j) {
    means.row(j) = chains[j].colwise().mean();
    const Eigen::MatrixXd centered = chains[j].rowwise() - means.row(j);
    within.noalias() += centered.transpose() * centered;
  }
  within /= static_cast<double>(m * (n - 1));
  const Eigen::MatrixXd centered_means = means.rowwise() - means.colwise().mean();
  const Eigen::MatrixXd between_over_n = centered_means.transpose() * centered_means / static_cast<double>(m - 1);

  bool regularized = false;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> wsolve(within, Eigen::EigenvaluesOnly);
  const double wmax = wsolve.eigenvalues().maxCoeff();
  if (!(wsolve.eigenvalues().minCoeff() > 1e-12 * std::max(wmax, 0.0)) || !(wmax > 0.0)) {
    const double ridge = wmax > 0.0 ? 1e-10 * within.trace() / static_cast<double>(d) : 1e-10;
    within.diagonal().array() += ridge;
    regularized = true;
  }
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> gsolve(between_over_n, within,
                                                                         Eigen::EigenvaluesOnly);
  const double lambda1 = gsolve.eigenvalues().maxCoeff();
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return {(nn - 1.0) / nn + (mm + 1.0) / mm * lambda1, regularized};
}

std::vector<Eigen::Index> default_mpsrf_columns(const PosteriorDraws& draws, bool include_hyper) {
  auto cols = draws.columns_with_prefix("beta_");
  const auto deltas = draws.columns_with_prefix("delta_");
  cols.insert(cols.end(), deltas.begin(), deltas.end());
  if (include_hyper) {
    if (draws.has_column("lambda_sq")) cols.push_back(draws.column("lambda_sq"));
    if (draws.has_column("phi")) cols.push_back(draws.column("phi"));
  }
  return cols;
}

std::vector<Eigen::Index> default_checkpoints(Eigen::Index draws_per_chain, Eigen::Index dim, int count) {
  const Eigen::Index first = std::min(draws_per_chain, std::max<Eigen::Index>(dim + 2, 2));
  std::vector<Eigen::Index> out;
  if (draws_per_chain < 2) return out;
  const Eigen::Index step = std::max<Eigen::Index>(1, draws_per_chain / std::max(count, 1));
  for (Eigen::Index k = step; k <= draws_per_chain; k += step)
    if (k >= first) out.push_back(k);
  if (out.empty() || out.back() != draws_per_chain) out.push_back(draws_per_chain);
  return out;
}

MpsrfSeries mpsrf_series(const PosteriorDraws& draws, const std::vector<Eigen::Index>& columns,
                         const std::vector<Eigen::Index>& checkpoints) {
  if (draws.num_chains < 2) throw DomainError("MPSRF needs at least two chains");
  if (columns.empty()) throw DomainError("MPSRF needs at least one parameter");
  MpsrfSeries series;
  for (auto c : columns) series.parameters.push_back(draws.names.at(static_cast<std::size_t>(c)));

  std::vector<Eigen::MatrixXd> full(draws.num_chains);
  for (int c = 0; c < draws.num_chains; ++c) {
    const auto rows = draws.chain_rows(c);
    full[c].resize(rows.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) full[c].col(static_cast<Eigen::Index>(j)) = rows.col(columns[j]);
  }
  std::vector<Eigen::MatrixXd> head(draws.num_chains);
  for (auto k : checkpoints) {
    if (k < 2 || k > draws.draws_per_chain) throw DomainError("MPSRF checkpoint outside the chain");
    for (int c = 0; c < draws.num_chains; ++c) head[c] = full[c].topRows(k);
    const auto value = mpsrf(head);
    series.draws.push_back(k);
    series.iteration.push_back(draws.iteration(k - 1));
    series.value.push_back(value.value);
    series.regularized.push_back(value.regularized);
  }
  return series;
}

double deviance(const ModelSpec& spec, const Eigen::VectorXd& beta, const Eigen::VectorXd& alpha,
                const Eigen::VectorXd& interior_delta, Eigen::Index* floored) {
  const auto& data = spec.data();
  const int C = data.num_categories();
  const double inf = std::numeric_limits<double>::infinity();
  const Eigen::VectorXd xb = data.x() * beta;
  double total = 0.0;
  for (Eigen::Index r = 0; r < data.num_observations(); ++r) {
    const int y = data.y()(r);
    const double eta = xb(r) + alpha(data.subject_of()(r));
    const double lo = y == 1 ? -inf : interior_delta(y - 2) - eta;
    const double hi = y == C ? inf : interior_delta(y - 1) - eta;
    double prob = sld_interval_probability(lo, hi, spec.theta());
    if (!(prob >= 1e-300)) {
      prob = 1e-300;
      if (floored) ++*floored;
    }
    total += std::log(prob);
  }
  return -2.0 * total;
}

DicResult dic(const PosteriorDraws& draws, const ModelSpec& spec) {
  const auto& data = spec.data();
  const auto beta_cols = draws.columns_with_prefix("beta_");
  const auto delta_cols = draws.columns_with_prefix("delta_");
  const auto alpha_cols = draws.columns_with_prefix("alpha_");
  if (static_cast<Eigen::Index>(beta_cols.size()) != data.num_covariates() ||
      static_cast<int>(delta_cols.size()) != data.num_categories() - 1)
    throw DataError("draws do not match the dataset's covariates and categories");
  if (static_cast<Eigen::Index>(alpha_cols.size()) != data.num_subjects())
    throw DataError("DIC needs alpha draws for every subject (run with alpha retention)");
  if (draws.values.rows() < 1) throw DataError("DIC needs at least one draw");

  auto gather = [&](Eigen::Index row, const std::vector<Eigen::Index>& cols) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) v(static_cast<Eigen::Index>(j)) = draws.values(row, cols[j]);
    return v;
  };

  DicResult out{};
  double sum = 0.0;
  for (Eigen::Index r = 0; r < draws.values.rows(); ++r)
    sum += deviance(spec, gather(r, beta_cols), gather(r, alpha_cols), gather(r, delta_cols), &out.floored_cells);
  out.mean_deviance = sum / static_cast<double>(draws.values.rows());

  const Eigen::RowVectorXd means = draws.values.colwise().mean();
  auto mean_of = [&](const std::vector<Eigen::Index>& cols) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) v(static_cast<Eigen::Index>(j)) = means(cols[j]);
    return v;
  };
  out.deviance_at_mean = deviance(spec, mean_of(beta_cols), mean_of(alpha_cols), mean_of(delta_cols),
                                  &out.floored_cells);
  out.effective_params = out.mean_deviance - out.deviance_at_mean;
  out.dic = out.mean_deviance + out.effective_params;
  return out;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_summary_csv(const SummaryTable& table, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "parameter,mean,sd,lower,upper,level\n";
  for (const auto& r : table.rows)
    out << r.name << ',' << format_double(r.mean) << ',' << format_double(r.sd) << ',' << format_double(r.lower)
        << ',' << format_double(r.upper) << ',' << format_double(table.level) << '\n';
}

void write_summary_text(const SummaryTable& table, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  const int pct = static_cast<int>(std::lround(100.0 * table.level));
  out << std::left << std::setw(14) << "parameter" << std::right << std::setw(12) << "mean" << std::setw(12) << "sd"
      << std::setw(28) << (std::to_string(pct) + "% interval") << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& r : table.rows) {
    std::ostringstream ci;
    ci << std::fixed << std::setprecision(4) << '(' << r.lower << ", " << r.upper << ')';
    out << std::left << std::setw(14) << r.name << std::right << std::setw(12) << r.mean << std::setw(12) << r.sd
        << std::setw(28) << ci.str() << '\n';
  }
}

void write_mpsrf_csv(const MpsrfSeries& series, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "iteration,draws_per_chain,mpsrf,regularized\n";
  for (std::size_t i = 0; i < series.value.size(); ++i)
    out << series.iteration[i] << ',' << series.draws[i] << ',' << format_double(series.value[i]) << ','
        << (series.regularized[i] ? 1 : 0) << '\n';
}

void write_mpsrf_plot(const MpsrfSeries& series, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "# iteration mpsrf\n";
  for (std::size_t i = 0; i < series.value.size(); ++i)
    out << series.iteration[i] << ' ' << format_double(series.value[i]) << '\n';
}

void write_dic_csv(const DicResult& result, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "dic,mean_deviance,deviance_at_mean,p_d,floored_cells\n";
  out << format_double(result.dic) << ',' << format_double(result.mean_deviance) << ','
      << format_double(result.deviance_at_mean) << ',' << format_double(result.effective_params) << ','
      << result.floored_cells << '\n';
}

void write_replication_csv(const ReplicationReport& report, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "theta,parameter,truth,bias,eff,replications\n";
  for (const auto& r : report.rows)
    out << format_double(r.theta) << ',' << r.parameter << ',' << format_double(r.truth) << ','
        << format_double(r.bias) << ',' << format_double(r.efficiency) << ',' << r.replications << '\n';
}

void write_replication_text(const ReplicationReport& report, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "replications: " << report.completed << " of " << report.requested << " completed";
  if (report.completed < report.requested) out << " (attrition " << report.requested - report.completed << ")";
  out << '\n';
  for (const auto& f : report.failures) out << "  dropped: " << f << '\n';
  out << std::left << std::setw(8) << "theta" << std::setw(12) << "parameter" << std::right << std::setw(10)
      << "truth" << std::setw(10) << "bias" << std::setw(10) << "eff" << '\n';
  out << std::fixed;
  for (const auto& r : report.rows)
    out << std::left << std::setw(8) << std::setprecision(2) << r.theta << std::setw(12) << r.parameter
        << std::right << std::setw(10) << std::setprecision(4) << r.truth << std::setw(10)
        << std::setprecision(3) << r.bias << std::setw(10) << r.efficiency << '\n';
}

}  // namespace ordqr
