#include <gtest/gtest.h>

#include <json.hpp>
#include <sstream>

#include "../tools/commands.hpp"
#include "oracles.hpp"
#include "ordqr/diagnostics.hpp"
#include "ordqr/draws_io.hpp"

namespace fs = std::filesystem;
using ordqr::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path only_subdir(const fs::path& root, const std::string& prefix) {
  fs::path found;
  int n = 0;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory() && e.path().filename().string().rfind(prefix, 0) == 0) {
      found = e.path();
      ++n;
    }
  EXPECT_EQ(n, 1) << "under " << root;
  return found;
}

/// Small sim2 data file written through the CLI itself.
fs::path toy_data(const fs::path& root) {
  const auto r = invoke({"simulate", "--scenario", "sim2", "--subjects", "6", "--seed", "3", "--out", root.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  return root / "simulate-3" / "data.csv";
}

}  // namespace

TEST(Cli, UsageErrorsExitWithTwo) {
  const auto root = oracle::scratch_dir("cli_usage");
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"bogus"}).code, 2);
  EXPECT_EQ(invoke({"fit"}).code, 2);
  EXPECT_EQ(invoke({"simulate", "--scenario", "sim9", "--out", root.string()}).code, 2);
  EXPECT_EQ(invoke({"replicate", "--replications", "0", "--out", root.string()}).code, 2);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST(Cli, MalformedDataExitsWithTwo) {
  const auto root = oracle::scratch_dir("cli_schema");
  std::ofstream(root / "bad.csv") << "subject,y,x1\n1,1,0.2\n1,oops,0.1\n";
  const auto r = invoke({"fit", "--data", (root / "bad.csv").string(), "--iterations", "10", "--burn-in", "0",
                         "--out", root.string(), "--seed", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
  std::ofstream(root / "empty.csv") << "";
  EXPECT_EQ(invoke({"fit", "--data", (root / "empty.csv").string(), "--out", root.string()}).code, 2);
  EXPECT_EQ(invoke({"fit", "--data", (root / "missing.csv").string(), "--out", root.string()}).code, 2);
}

TEST(Cli, FitWritesDrawsAndIsReproducible) {
  const auto root = oracle::scratch_dir("cli_fit");
  const auto data = toy_data(root);
  const std::vector<std::string> args{"fit", "--data", data.string(), "--theta", "0.25", "0.5",
                                      "--iterations", "100", "--burn-in", "0", "--seed", "7"};
  auto a = args;
  a.insert(a.end(), {"--out", (root / "a").string()});
  auto b = args;
  b.insert(b.end(), {"--out", (root / "b").string()});
  ASSERT_EQ(invoke(a).code, 0);
  ASSERT_EQ(invoke(b).code, 0);
  for (const char* f : {"draws_theta0.25.csv", "draws_theta0.5.csv", "summary_theta0.5.csv"}) {
    const auto pa = root / "a" / "fit-7" / f;
    ASSERT_TRUE(fs::exists(pa)) << pa;
    EXPECT_EQ(oracle::slurp(pa), oracle::slurp(root / "b" / "fit-7" / f)) << f;
  }
  const auto draws = ordqr::read_draws_csv(root / "a" / "fit-7" / "draws_theta0.5.csv");
  EXPECT_EQ(draws.values.rows(), 100);
  EXPECT_TRUE(draws.has_column("beta_3"));
  EXPECT_TRUE(draws.has_column("delta_4"));
  EXPECT_TRUE(fs::exists(root / "a" / "fit-7" / "manifest.json"));
}

TEST(Cli, MpsrfNeedsTwoChains) {
  const auto root = oracle::scratch_dir("cli_mpsrf");
  const auto data = toy_data(root);
  const auto r = invoke({"fit", "--data", data.string(), "--iterations", "50", "--burn-in", "0", "--seed", "2",
                         "--out", root.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto draws = root / "fit-2" / "draws_theta0.5.csv";
  EXPECT_EQ(invoke({"diagnose", "--draws", draws.string(), "--mpsrf", "--out", root.string()}).code, 2);
}

TEST(Cli, DiagnoseIdenticalChainFiles) {
  const auto root = oracle::scratch_dir("cli_diag");
  const auto data = toy_data(root);
  ASSERT_EQ(invoke({"fit", "--data", data.string(), "--iterations", "200", "--burn-in", "0", "--seed", "4",
                    "--out", root.string()})
                .code,
            0);
  const auto draws = root / "fit-4" / "draws_theta0.5.csv";
  const auto r = invoke({"diagnose", "--draws", draws.string(), draws.string(), "--mpsrf", "--seed", "1",
                         "--out", root.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(root / "diagnose-1" / "mpsrf.csv");
  ASSERT_TRUE(in) << "missing mpsrf.csv";
  std::string line, last;
  std::getline(in, line);
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  std::vector<std::string> cells;
  std::stringstream ss(last);
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  ASSERT_GE(cells.size(), 3u);
  EXPECT_EQ(cells[1], "200");
  EXPECT_NEAR(std::stod(cells[2]), 199.0 / 200.0, 1e-10);
}

TEST(Cli, SeedIsGeneratedRecordedAndReplayable) {
  const auto root = oracle::scratch_dir("cli_replay");
  const auto data = toy_data(root);
  ASSERT_EQ(invoke({"fit", "--data", data.string(), "--iterations", "60", "--burn-in", "10", "--chains", "2",
                    "--out", (root / "orig").string()})
                .code,
            0);
  const auto dir = only_subdir(root / "orig", "fit-");
  const auto manifest = nlohmann::json::parse(oracle::slurp(dir / "manifest.json"));
  EXPECT_TRUE(manifest.at("seed_generated").get<bool>());
  const auto seed = manifest.at("seed").get<unsigned long long>();
  EXPECT_EQ(dir.filename().string(), "fit-" + std::to_string(seed));
  EXPECT_EQ(manifest.at("command"), "fit");

  const auto r = invoke({"replay", "--manifest", (dir / "manifest.json").string(), "--out", (root / "again").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto again = root / "again" / dir.filename();
  EXPECT_EQ(oracle::slurp(dir / "draws_theta0.5.csv"), oracle::slurp(again / "draws_theta0.5.csv"));
  EXPECT_EQ(oracle::slurp(dir / "mpsrf_theta0.5.csv"), oracle::slurp(again / "mpsrf_theta0.5.csv"));
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto root = oracle::scratch_dir("cli_config");
  const auto data = toy_data(root);
  std::ofstream(root / "fit.ini") << "data = \"" << data.string() << "\"\niterations = 40\nburn-in = 0\n"
                                  << "seed = 11\ntheta = 0.3\n";
  const auto r = invoke({"fit", "--config", (root / "fit.ini").string(), "--iterations", "30", "--out", root.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto draws = ordqr::read_draws_csv(root / "fit-11" / "draws_theta0.3.csv");
  EXPECT_EQ(draws.values.rows(), 30);
}

TEST(Cli, SimulateAndReplicate) {
  const auto root = oracle::scratch_dir("cli_sim");
  ASSERT_EQ(invoke({"simulate", "--scenario", "sim1", "--seed", "5", "--out", root.string()}).code, 0);
  EXPECT_TRUE(fs::exists(root / "simulate-5" / "data.meta.json"));
  const auto data = oracle::slurp(root / "simulate-5" / "data.csv");
  EXPECT_EQ(std::count(data.begin(), data.end(), '\n'), 201);

  const auto r = invoke({"replicate", "--scenario", "sim1", "--replications", "2", "--theta", "0.5", "0.25",
                         "--iterations", "200", "--burn-in", "50", "--seed", "8", "--out", root.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto table = oracle::slurp(root / "replicate-8" / "replication.csv");
  EXPECT_NE(table.find("beta_1"), std::string::npos);
  EXPECT_NE(table.find("delta_4"), std::string::npos);
  EXPECT_TRUE(fs::exists(root / "replicate-8" / "estimates.csv"));
}
