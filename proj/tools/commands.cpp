#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ordqr/dataset.hpp"
#include "ordqr/diagnostics.hpp"
#include "ordqr/draws_io.hpp"
#include "ordqr/errors.hpp"
#include "ordqr/gibbs.hpp"
#include "ordqr/model.hpp"
#include "ordqr/simulation.hpp"
#include "ordqr/version.hpp"

namespace fs = std::filesystem;

namespace ordqr::cli {

fs::path run_directory(const fs::path& out, const std::string& command, unsigned long long seed) {
  return out / (command + "-" + std::to_string(seed));
}

namespace {

using json = nlohmann::ordered_json;

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  const auto ticks = static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count());
  return mix64((static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^ ticks) >> 1;
}

std::string theta_tag(double theta) { return "theta" + format_double(theta); }

/// Argument list with every value spelled out, used for manifests and replay.
class ArgList {
 public:
  explicit ArgList(std::string command) { args_.push_back(std::move(command)); }
  ArgList& opt(const std::string& name, const std::string& value) {
    args_.push_back("--" + name);
    args_.push_back(value);
    return *this;
  }
  ArgList& opt(const std::string& name, double value) { return opt(name, format_double(value)); }
  ArgList& opt(const std::string& name, int value) { return opt(name, std::to_string(value)); }
  ArgList& opt(const std::string& name, std::uint64_t value) { return opt(name, std::to_string(value)); }
  template <typename T>
  ArgList& list(const std::string& name, const std::vector<T>& values) {
    for (const auto& v : values) opt(name, v);
    return *this;
  }
  ArgList& flag(const std::string& name, bool on) {
    if (on) args_.push_back("--" + name);
    return *this;
  }
  const std::vector<std::string>& args() const { return args_; }

 private:
  std::vector<std::string> args_;
};

/// Flag/value pairs of an argument list as a JSON object.
json config_object(const std::vector<std::string>& args) {
  json cfg = json::object();
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string key = args[i].substr(2);
    if (i + 1 < args.size() && args[i + 1].rfind("--", 0) != 0) {
      const std::string& value = args[++i];
      if (!cfg.contains(key)) {
        cfg[key] = value;
      } else {
        if (!cfg[key].is_array()) cfg[key] = json::array({cfg[key]});
        cfg[key].push_back(value);
      }
    } else {
      cfg[key] = true;
    }
  }
  return cfg;
}

struct Manifest {
  std::string command;
  std::uint64_t seed = 0;
  bool seed_generated = false;
  std::vector<std::string> args;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string started_at;
};

void write_manifest(const Manifest& m, const fs::path& dir) {
  json j;
  j["software"] = "ordqr";
  j["version"] = kVersion;
  j["command"] = m.command;
  j["seed"] = m.seed;
  j["seed_generated"] = m.seed_generated;
  j["args"] = m.args;
  j["config"] = config_object(m.args);
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["started_at"] = m.started_at;
  j["finished_at"] = timestamp();
  std::ofstream out(dir / "manifest.json");
  if (!out) throw DataError("cannot write " + (dir / "manifest.json").string());
  out << j.dump(2) << '\n';
}

void add_sampler_options(CLI::App* sub, SamplerConfig& s) {
  sub->add_option("--iterations", s.iterations, "Gibbs sweeps per chain")->capture_default_str();
  sub->add_option("--burn-in", s.burn_in, "Sweeps discarded before retention")->capture_default_str();
  sub->add_option("--thin", s.thin, "Keep every k-th post-burn-in sweep")->capture_default_str();
  sub->add_option("--chains", s.num_chains, "Independent chains")->capture_default_str();
  sub->add_flag("--overdispersed", s.overdispersed_starts, "Perturb each chain's starting beta by N(0, 4)");
}

void add_prior_options(CLI::App* sub, Priors& p) {
  sub->add_option("--a1", p.a1, "Gamma shape of lambda^2")->capture_default_str();
  sub->add_option("--a2", p.a2, "Gamma rate of lambda^2")->capture_default_str();
  sub->add_option("--b1", p.b1, "Inverse-gamma shape of phi")->capture_default_str();
  sub->add_option("--b2", p.b2, "Inverse-gamma scale of phi")->capture_default_str();
  sub->add_option("--delta-min", p.delta_min, "Lower end of the cut-point prior")->capture_default_str();
  sub->add_option("--delta-max", p.delta_max, "Upper end of the cut-point prior")->capture_default_str();
}

void add_schema_options(CLI::App* sub, CsvSchema& s) {
  sub->add_option("--subject-column", s.subject_column)->capture_default_str();
  sub->add_option("--category-column", s.category_column)->capture_default_str();
  sub->add_option("--time-column", s.time_column)->capture_default_str();
  sub->add_option("--covariates", s.covariate_columns, "Covariate columns (default: all remaining)")
      ->delimiter(',');
  sub->add_option("--levels", s.category_levels, "Ordered category labels (default: observed)")->delimiter(',');
}

void sampler_args(ArgList& a, const SamplerConfig& s) {
  a.opt("iterations", s.iterations).opt("burn-in", s.burn_in).opt("thin", s.thin).opt("chains", s.num_chains);
  a.flag("overdispersed", s.overdispersed_starts);
}

void prior_args(ArgList& a, const Priors& p) {
  a.opt("a1", p.a1).opt("a2", p.a2).opt("b1", p.b1).opt("b2", p.b2);
  a.opt("delta-min", p.delta_min).opt("delta-max", p.delta_max);
}

void schema_args(ArgList& a, const CsvSchema& s) {
  a.opt("subject-column", s.subject_column).opt("category-column", s.category_column);
  a.opt("time-column", s.time_column);
  a.list("covariates", s.covariate_columns);
  for (int l : s.category_levels) a.opt("levels", l);
}

void prepare_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
}

std::shared_ptr<const OrdinalDataset> load_data(const std::string& path, const CsvSchema& schema,
                                                std::ostream& err) {
  IngestResult in = ingest_csv(path, schema);
  for (const auto& w : in.warnings) err << "warning: " << w << '\n';
  return std::make_shared<const OrdinalDataset>(std::move(in.dataset));
}

// fit ----------------------------------------------------------------------

struct FitOptions {
  std::string data;
  std::vector<double> thetas{0.5};
  SamplerConfig sampler;
  Priors priors;
  CsvSchema schema;
  bool dic = false;
  bool hyper_mpsrf = false;
  double level = 0.95;
  std::string out = "runs";
  CLI::Option* seed_opt = nullptr;
};

ArgList fit_args(const FitOptions& o) {
  ArgList a("fit");
  a.opt("data", o.data).list("theta", o.thetas);
  sampler_args(a, o.sampler);
  a.opt("seed", o.sampler.seed).flag("retain-alpha", o.sampler.retain_alpha);
  prior_args(a, o.priors);
  schema_args(a, o.schema);
  a.flag("dic", o.dic).flag("mpsrf-hyper", o.hyper_mpsrf).opt("level", o.level).opt("out", o.out);
  return a;
}

struct FitResult {
  double theta;
  PosteriorDraws draws;
  SummaryTable summary;
  std::optional<MpsrfSeries> mpsrf;
  std::optional<DicResult> dic;
};

void print_summary(const SummaryTable& t, double theta, std::ostream& out) {
  out << "theta = " << theta << '\n';
  for (const auto& r : t.rows) {
    if (r.name.rfind("alpha_", 0) == 0) continue;
    out << "  " << std::left << std::setw(10) << r.name << std::right << std::setw(12) << std::fixed
        << std::setprecision(4) << r.mean << std::setw(10) << r.sd << '\n';
  }
  out.unsetf(std::ios::floatfield);
  out << std::setprecision(6);
}

int cmd_fit(FitOptions& o, Manifest& m, std::ostream& out, std::ostream& err) {
  if (o.dic) o.sampler.retain_alpha = true;
  o.sampler.validate();
  o.priors.validate();
  if (o.thetas.empty()) throw ConfigError("at least one --theta is required");
  const auto data = load_data(o.data, o.schema, err);

  std::vector<FitResult> results;
  for (double theta : o.thetas) {
    const ModelSpec spec(theta, o.priors, data);
    FitResult r{theta, run_chain(spec, o.sampler), {}, {}, {}};
    r.summary = summarize(r.draws, o.level);
    if (r.draws.num_chains >= 2) {
      const auto cols = default_mpsrf_columns(r.draws, o.hyper_mpsrf);
      r.mpsrf = mpsrf_series(r.draws, cols,
                             default_checkpoints(r.draws.draws_per_chain, static_cast<Eigen::Index>(cols.size())));
    }
    if (o.dic) r.dic = ordqr::dic(r.draws, spec);
    results.push_back(std::move(r));
  }

  const fs::path dir = run_directory(o.out, "fit", o.sampler.seed);
  prepare_directory(dir);
  m.inputs.push_back(o.data);
  for (const auto& r : results) {
    const std::string tag = theta_tag(r.theta);
    write_draws_csv(r.draws, dir / ("draws_" + tag + ".csv"));
    write_draws_metadata(r.draws, dir / ("draws_" + tag + ".meta.json"));
    write_summary_csv(r.summary, dir / ("summary_" + tag + ".csv"));
    write_summary_text(r.summary, dir / ("summary_" + tag + ".txt"));
    m.outputs.insert(m.outputs.end(), {"draws_" + tag + ".csv", "draws_" + tag + ".meta.json",
                                       "summary_" + tag + ".csv", "summary_" + tag + ".txt"});
    if (r.mpsrf) {
      write_mpsrf_csv(*r.mpsrf, dir / ("mpsrf_" + tag + ".csv"));
      write_mpsrf_plot(*r.mpsrf, dir / ("mpsrf_" + tag + ".dat"));
      m.outputs.insert(m.outputs.end(), {"mpsrf_" + tag + ".csv", "mpsrf_" + tag + ".dat"});
    }
    if (r.dic) {
      write_dic_csv(*r.dic, dir / ("dic_" + tag + ".csv"));
      m.outputs.push_back("dic_" + tag + ".csv");
    }
    print_summary(r.summary, r.theta, out);
    if (r.mpsrf && !r.mpsrf->value.empty()) out << "  final MPSRF " << r.mpsrf->value.back() << '\n';
    if (r.dic) out << "  DIC " << r.dic->dic << " (pD " << r.dic->effective_params << ")\n";
  }
  write_manifest(m, dir);
  out << "wrote " << dir.string() << '\n';
  return kOk;
}

// simulate -----------------------------------------------------------------

struct SimulateOptions {
  std::string scenario = "sim1";
  int subjects = 40;
  int n_per_subject = 5;
  std::optional<double> random_effect_sd;
  std::string out = "runs";
  std::uint64_t seed = 0;
};

ScenarioConfig scenario_config(const std::string& name, int subjects, int n_per_subject,
                               std::optional<double> sd, std::uint64_t seed) {
  ScenarioConfig c = ScenarioConfig::defaults(parse_scenario(name));
  c.subjects = subjects;
  c.n_per_subject = n_per_subject;
  if (sd) c.random_effect_sd = *sd;
  c.seed = seed;
  return c;
}

int cmd_simulate(const SimulateOptions& o, Manifest& m, std::ostream& out) {
  const ScenarioConfig c = scenario_config(o.scenario, o.subjects, o.n_per_subject, o.random_effect_sd, o.seed);
  c.validate();
  Rng rng = Rng::substream(o.seed, 0, 0);
  const OrdinalDataset data = generate_dataset(c, rng);

  const fs::path dir = run_directory(o.out, "simulate", o.seed);
  prepare_directory(dir);
  write_csv(data, dir / "data.csv");
  write_dataset_metadata(c, dir / "data.meta.json");
  m.outputs = {"data.csv", "data.meta.json"};
  write_manifest(m, dir);
  out << o.scenario << ": " << data.num_observations() << " observations on " << data.num_subjects()
      << " subjects\nwrote " << dir.string() << '\n';
  return kOk;
}

// replicate ----------------------------------------------------------------

struct ReplicateOptions {
  std::string scenario = "sim1";
  int subjects = 40;
  int n_per_subject = 5;
  std::optional<double> random_effect_sd;
  int replications = 20;
  std::vector<double> thetas{0.5};
  SamplerConfig sampler;
  bool full_paper_scale = false;
  std::string out = "runs";
};

int cmd_replicate(const ReplicateOptions& o, Manifest& m, std::ostream& out, std::ostream& err) {
  ScenarioConfig c = scenario_config(o.scenario, o.subjects, o.n_per_subject, o.random_effect_sd, o.sampler.seed);
  c.replications = o.replications;
  const ReplicationRun run = run_replication_study(c, o.sampler, o.thetas);

  const fs::path dir = run_directory(o.out, "replicate", o.sampler.seed);
  prepare_directory(dir);
  write_replication_csv(run.report, dir / "replication.csv");
  write_replication_text(run.report, dir / "replication.txt");
  write_replication_records(run, dir / "estimates.csv");
  m.outputs = {"replication.csv", "replication.txt", "estimates.csv"};
  write_manifest(m, dir);

  for (const auto& f : run.report.failures) err << "dropped " << f << '\n';
  out << run.report.completed << " of " << run.report.requested << " replications completed\n";
  for (const auto& r : run.report.rows)
    out << "  theta " << r.theta << "  " << std::left << std::setw(8) << r.parameter << std::right
        << "  bias " << std::setw(10) << r.bias << "  eff " << r.efficiency << '\n';
  out << "wrote " << dir.string() << '\n';
  return run.report.completed > 0 ? kOk : kNumericalError;
}

// diagnose -----------------------------------------------------------------

struct DiagnoseOptions {
  std::vector<std::string> draws;
  bool require_mpsrf = false;
  bool hyper_mpsrf = false;
  bool dic = false;
  std::string data;
  double theta = 0.5;
  Priors priors;
  CsvSchema schema;
  double level = 0.95;
  std::string out = "runs";
  std::uint64_t seed = 0;
};

int cmd_diagnose(const DiagnoseOptions& o, Manifest& m, std::ostream& out, std::ostream& err) {
  std::vector<PosteriorDraws> parts;
  for (const auto& f : o.draws) parts.push_back(read_draws_csv(f));
  const PosteriorDraws draws = combine_chains(parts);
  if (o.require_mpsrf && draws.num_chains < 2)
    throw ConfigError("--mpsrf needs at least two chains (got " + std::to_string(draws.num_chains) + ")");
  if (o.dic && o.data.empty()) throw ConfigError("--dic needs --data");

  const SummaryTable summary = summarize(draws, o.level);
  std::optional<MpsrfSeries> series;
  if (draws.num_chains >= 2) {
    const auto cols = default_mpsrf_columns(draws, o.hyper_mpsrf);
    series = mpsrf_series(draws, cols, default_checkpoints(draws.draws_per_chain, static_cast<Eigen::Index>(cols.size())));
  }
  std::optional<DicResult> dic_result;
  if (o.dic) {
    const ModelSpec spec(o.theta, o.priors, load_data(o.data, o.schema, err));
    dic_result = ordqr::dic(draws, spec);
  }

  const fs::path dir = run_directory(o.out, "diagnose", o.seed);
  prepare_directory(dir);
  m.inputs = o.draws;
  if (o.dic) m.inputs.push_back(o.data);
  write_summary_csv(summary, dir / "summary.csv");
  write_summary_text(summary, dir / "summary.txt");
  m.outputs = {"summary.csv", "summary.txt"};
  if (series) {
    write_mpsrf_csv(*series, dir / "mpsrf.csv");
    write_mpsrf_plot(*series, dir / "mpsrf.dat");
    m.outputs.insert(m.outputs.end(), {"mpsrf.csv", "mpsrf.dat"});
    if (!series->value.empty()) out << "final MPSRF " << series->value.back() << '\n';
  }
  if (dic_result) {
    write_dic_csv(*dic_result, dir / "dic.csv");
    m.outputs.push_back("dic.csv");
    out << "DIC " << dic_result->dic << " (pD " << dic_result->effective_params << ")\n";
  }
  write_manifest(m, dir);
  out << "wrote " << dir.string() << '\n';
  return kOk;
}

// replay -------------------------------------------------------------------

std::vector<std::string> replay_args(const std::string& manifest_path, const std::string& out_override) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open manifest " + manifest_path);
  const json j = json::parse(in);
  auto args = j.at("args").get<std::vector<std::string>>();
  if (args.empty() || args.front() == "replay") throw SchemaError(manifest_path + ": not a replayable manifest");
  if (!out_override.empty()) {
    const auto it = std::find(args.begin(), args.end(), "--out");
    if (it == args.end() || it + 1 == args.end()) throw SchemaError(manifest_path + ": manifest has no --out");
    *(it + 1) = out_override;
  }
  return args;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth);

/// Splices `--config FILE` (flat key = value) into the argument list after
/// the subcommand. Keys already given as flags are skipped so flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  auto it = std::find(args.begin(), args.end(), "--config");
  std::string path;
  if (it != args.end()) {
    if (it + 1 == args.end()) throw ConfigError("--config needs a file");
    path = *(it + 1);
  } else {
    it = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.rfind("--config=", 0) == 0; });
    if (it == args.end()) return args;
    path = it->substr(9);
  }
  std::vector<std::string> rest(args.begin(), it);
  rest.insert(rest.end(), it + (it->find('=') == std::string::npos ? 2 : 1), args.end());
  if (!fs::exists(path)) throw ConfigError("config file " + path + " not found");

  auto given = [&](const std::string& key) {
    return std::any_of(rest.begin(), rest.end(),
                       [&](const std::string& a) { return a == "--" + key || a.rfind("--" + key + "=", 0) == 0; });
  };
  std::vector<std::string> extra;
  for (const auto& item : CLI::ConfigINI().from_file(path)) {
    if (item.name == "++" || item.name == "--" || item.inputs.empty() || given(item.name)) continue;
    if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
      if (item.inputs[0] == "true") extra.push_back("--" + item.name);
      continue;
    }
    extra.push_back("--" + item.name);
    extra.insert(extra.end(), item.inputs.begin(), item.inputs.end());
  }
  if (rest.empty()) return extra;
  rest.insert(rest.begin() + 1, extra.begin(), extra.end());
  return rest;
}

int parse_and_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth) {
  CLI::App app{"Bayesian quantile regression for ordinal longitudinal data", "ordqr"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the model to a CSV dataset");
  fit_cmd->add_option("--config", "Flat key = value file; flags override it");
  fit_cmd->add_option("--data", fit.data, "Input CSV")->required();
  fit_cmd->add_option("--theta", fit.thetas, "Quantile level (repeatable)")->capture_default_str();
  add_sampler_options(fit_cmd, fit.sampler);
  fit.seed_opt = fit_cmd->add_option("--seed", fit.sampler.seed, "Random seed (generated if omitted)");
  fit_cmd->add_flag("--retain-alpha", fit.sampler.retain_alpha, "Keep random-effect draws");
  fit_cmd->add_flag("--dic", fit.dic, "Compute DIC (implies --retain-alpha)");
  fit_cmd->add_flag("--mpsrf-hyper", fit.hyper_mpsrf, "Include lambda_sq and phi in MPSRF");
  fit_cmd->add_option("--level", fit.level, "Credible interval level")->capture_default_str();
  fit_cmd->add_option("--out", fit.out, "Output root")->capture_default_str();
  add_prior_options(fit_cmd, fit.priors);
  add_schema_options(fit_cmd, fit.schema);

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a simulation-study dataset");
  sim_cmd->add_option("--config", "Flat key = value file; flags override it");
  sim_cmd->add_option("--scenario", sim.scenario, "sim1 or sim2")->capture_default_str();
  sim_cmd->add_option("--subjects", sim.subjects, "Number of subjects N")->capture_default_str();
  sim_cmd->add_option("--n-per-subject", sim.n_per_subject, "Observations per subject")->capture_default_str();
  sim_cmd->add_option("--random-effect-sd", sim.random_effect_sd, "SD of alpha_i (default 0 for sim1, 1 for sim2)");
  auto* sim_seed = sim_cmd->add_option("--seed", sim.seed, "Random seed (generated if omitted)");
  sim_cmd->add_option("--out", sim.out, "Output root")->capture_default_str();

  ReplicateOptions rep;
  auto* rep_cmd = app.add_subcommand("replicate", "Run a replication study");
  rep_cmd->add_option("--config", "Flat key = value file; flags override it");
  rep_cmd->add_option("--scenario", rep.scenario, "sim1 or sim2")->capture_default_str();
  rep_cmd->add_option("--subjects", rep.subjects)->capture_default_str();
  rep_cmd->add_option("--n-per-subject", rep.n_per_subject)->capture_default_str();
  rep_cmd->add_option("--random-effect-sd", rep.random_effect_sd);
  auto* rep_m = rep_cmd->add_option("--replications", rep.replications, "Replications M")->capture_default_str();
  rep_cmd->add_option("--theta", rep.thetas, "Quantile level (repeatable); the first is the efficiency reference")
      ->capture_default_str();
  rep.sampler.iterations = 10000;
  rep.sampler.burn_in = 2000;
  add_sampler_options(rep_cmd, rep.sampler);
  auto* rep_iter = rep_cmd->get_option("--iterations");
  auto* rep_burn = rep_cmd->get_option("--burn-in");
  auto* rep_seed = rep_cmd->add_option("--seed", rep.sampler.seed, "Random seed (generated if omitted)");
  rep_cmd->add_flag("--full-paper-scale", rep.full_paper_scale, "M = 200, 20000 iterations, 2000 burn-in");
  rep_cmd->add_option("--out", rep.out, "Output root")->capture_default_str();

  DiagnoseOptions diag;
  auto* diag_cmd = app.add_subcommand("diagnose", "Diagnostics on stored draws");
  diag_cmd->add_option("--config", "Flat key = value file; flags override it");
  diag_cmd->add_option("--draws", diag.draws, "Draws CSV files (one or more)")->required();
  diag_cmd->add_flag("--mpsrf", diag.require_mpsrf, "Require an MPSRF series (needs two or more chains)");
  diag_cmd->add_flag("--mpsrf-hyper", diag.hyper_mpsrf, "Include lambda_sq and phi in MPSRF");
  diag_cmd->add_flag("--dic", diag.dic, "Compute DIC (needs --data and alpha columns)");
  diag_cmd->add_option("--data", diag.data, "Dataset the draws were fitted to");
  diag_cmd->add_option("--theta", diag.theta, "Quantile level of the fit")->capture_default_str();
  diag_cmd->add_option("--level", diag.level, "Credible interval level")->capture_default_str();
  diag_cmd->add_option("--seed", diag.seed, "Names the output directory")->capture_default_str();
  diag_cmd->add_option("--out", diag.out, "Output root")->capture_default_str();
  add_prior_options(diag_cmd, diag.priors);
  add_schema_options(diag_cmd, diag.schema);

  std::string manifest_path, replay_out;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay_cmd->add_option("--manifest", manifest_path, "manifest.json of an earlier run")->required();
  replay_cmd->add_option("--out", replay_out, "Output root (default: the recorded one)");

  const std::vector<std::string> expanded = expand_config(args);
  std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUserError;
  }

  Manifest m;
  m.started_at = timestamp();
  if (fit_cmd->parsed()) {
    m.seed_generated = fit.seed_opt->count() == 0;
    if (m.seed_generated) fit.sampler.seed = fresh_seed();
    if (fit.dic) fit.sampler.retain_alpha = true;
    m.command = "fit";
    m.seed = fit.sampler.seed;
    m.args = fit_args(fit).args();
    return cmd_fit(fit, m, out, err);
  }
  if (sim_cmd->parsed()) {
    m.seed_generated = sim_seed->count() == 0;
    if (m.seed_generated) sim.seed = fresh_seed();
    ArgList a("simulate");
    a.opt("scenario", sim.scenario).opt("subjects", sim.subjects).opt("n-per-subject", sim.n_per_subject);
    if (sim.random_effect_sd) a.opt("random-effect-sd", *sim.random_effect_sd);
    a.opt("seed", sim.seed).opt("out", sim.out);
    m.command = "simulate";
    m.seed = sim.seed;
    m.args = a.args();
    return cmd_simulate(sim, m, out);
  }
  if (rep_cmd->parsed()) {
    if (rep.full_paper_scale) {
      if (rep_m->count() == 0) rep.replications = 200;
      if (rep_iter->count() == 0) rep.sampler.iterations = 20000;
      if (rep_burn->count() == 0) rep.sampler.burn_in = 2000;
    }
    if (rep.replications < 1) throw ConfigError("--replications must be at least 1");
    m.seed_generated = rep_seed->count() == 0;
    if (m.seed_generated) rep.sampler.seed = fresh_seed();
    ArgList a("replicate");
    a.opt("scenario", rep.scenario).opt("subjects", rep.subjects).opt("n-per-subject", rep.n_per_subject);
    if (rep.random_effect_sd) a.opt("random-effect-sd", *rep.random_effect_sd);
    a.opt("replications", rep.replications).list("theta", rep.thetas);
    sampler_args(a, rep.sampler);
    a.opt("seed", rep.sampler.seed).opt("out", rep.out);
    m.command = "replicate";
    m.seed = rep.sampler.seed;
    m.args = a.args();
    return cmd_replicate(rep, m, out, err);
  }
  if (diag_cmd->parsed()) {
    ArgList a("diagnose");
    a.list("draws", diag.draws).flag("mpsrf", diag.require_mpsrf).flag("mpsrf-hyper", diag.hyper_mpsrf);
    a.flag("dic", diag.dic);
    if (!diag.data.empty()) a.opt("data", diag.data);
    a.opt("theta", diag.theta).opt("level", diag.level).opt("seed", diag.seed).opt("out", diag.out);
    prior_args(a, diag.priors);
    schema_args(a, diag.schema);
    m.command = "diagnose";
    m.seed = diag.seed;
    m.args = a.args();
    return cmd_diagnose(diag, m, out, err);
  }
  if (depth > 0) throw ConfigError("a manifest cannot replay another replay");
  return dispatch(replay_args(manifest_path, replay_out), out, err, depth + 1);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth) {
  try {
    return parse_and_run(args, out, err, depth);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return kUserError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kUserError;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kUserError;
  } catch (const DomainError& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kUserError;
  } catch (const fs::filesystem_error& e) {
    err << "file error: " << e.what() << '\n';
    return kUserError;
  } catch (const nlohmann::json::exception& e) {
    err << "manifest error: " << e.what() << '\n';
    return kUserError;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kNumericalError;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return dispatch(args, out, err, 0);
}

}  // namespace ordqr::cli
