#include "ordqr/draws_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "ordqr/errors.hpp"
#include "ordqr/version.hpp"

namespace ordqr {

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

void write_draws_csv(const PosteriorDraws& draws, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "chain,iteration";
  for (const auto& name : draws.names) out << ',' << name;
  out << '\n';
  for (Eigen::Index r = 0; r < draws.values.rows(); ++r) {
    out << draws.chain(r) << ',' << draws.iteration(r);
    for (Eigen::Index j = 0; j < draws.values.cols(); ++j) out << ',' << format_double(draws.values(r, j));
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

void write_draws_metadata(const PosteriorDraws& draws, const std::filesystem::path& path) {
  const auto& c = draws.config;
  nlohmann::ordered_json meta;
  meta["software"] = "ordqr";
  meta["version"] = kVersion;
  meta["theta"] = draws.theta;
  meta["priors"] = {{"a1", draws.priors.a1},
                    {"a2", draws.priors.a2},
                    {"b1", draws.priors.b1},
                    {"b2", draws.priors.b2},
                    {"delta_min", draws.priors.delta_min},
                    {"delta_max", draws.priors.delta_max}};
  meta["sampler"] = {{"iterations", c.iterations},     {"burn_in", c.burn_in},
                     {"thin", c.thin},                 {"chains", c.num_chains},
                     {"seed", c.seed},                 {"overdispersed_starts", c.overdispersed_starts},
                     {"retain_alpha", c.retain_alpha}};
  meta["parameters"] = draws.names;
  meta["draws_per_chain"] = draws.draws_per_chain;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << meta.dump(2) << '\n';
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) {
    while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
    fields.push_back(f);
  }
  return fields;
}

}  // namespace

PosteriorDraws read_draws_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty draws file");
  const auto header = split(line);
  if (header.size() < 3 || header[0] != "chain" || header[1] != "iteration")
    throw SchemaError(path.string() + ": draws header must start with chain,iteration");

  const std::size_t p = header.size() - 2;
  std::vector<int> chain_order;
  std::map<int, std::vector<std::pair<int, std::vector<double>>>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line);
    if (fields.size() != header.size())
      throw DataError(path.string() + ": row " + std::to_string(line_no) + " has wrong field count");
    int chain = 0, iteration = 0;
    std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), chain);
    std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), iteration);
    std::vector<double> v(p);
    for (std::size_t j = 0; j < p; ++j) {
      const auto& f = fields[j + 2];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v[j]);
      if (ec != std::errc() || ptr != f.data() + f.size())
        throw DataError(path.string() + ": row " + std::to_string(line_no) + ": bad value '" + f + "'");
    }
    if (!rows.count(chain)) chain_order.push_back(chain);
    rows[chain].emplace_back(iteration, std::move(v));
  }
  if (chain_order.empty()) throw DataError(path.string() + ": no draws");

  const std::size_t n = rows[chain_order.front()].size();
  for (int c : chain_order)
    if (rows[c].size() != n) throw DataError(path.string() + ": chains have unequal lengths");

  PosteriorDraws out;
  out.names.assign(header.begin() + 2, header.end());
  out.num_chains = static_cast<int>(chain_order.size());
  out.draws_per_chain = static_cast<Eigen::Index>(n);
  out.values.resize(out.num_chains * out.draws_per_chain, static_cast<Eigen::Index>(p));
  out.chain.resize(out.values.rows());
  out.iteration.resize(out.values.rows());
  Eigen::Index r = 0;
  for (int c : chain_order)
    for (const auto& [it, v] : rows[c]) {
      out.chain(r) = c;
      out.iteration(r) = it;
      for (std::size_t j = 0; j < p; ++j) out.values(r, static_cast<Eigen::Index>(j)) = v[j];
      ++r;
    }
  out.config.num_chains = out.num_chains;
  return out;
}

PosteriorDraws combine_chains(const std::vector<PosteriorDraws>& parts) {
  if (parts.empty()) throw DataError("no draws to combine");
  PosteriorDraws out = parts.front();
  Eigen::Index total = 0;
  int chains = 0;
  for (const auto& part : parts) {
    if (part.names != out.names) throw SchemaError("draws files have mismatched parameter columns");
    if (part.draws_per_chain != out.draws_per_chain) throw DataError("draws files have unequal chain lengths");
    total += part.values.rows();
    chains += part.num_chains;
  }
  out.values.resize(total, static_cast<Eigen::Index>(out.names.size()));
  out.chain.resize(total);
  out.iteration.resize(total);
  Eigen::Index r = 0;
  int chain_base = 0;
  for (const auto& part : parts) {
    out.values.middleRows(r, part.values.rows()) = part.values;
    out.iteration.segment(r, part.values.rows()) = part.iteration;
    for (Eigen::Index k = 0; k < part.values.rows(); ++k)
      out.chain(r + k) = chain_base + static_cast<int>(k / part.draws_per_chain);
    r += part.values.rows();
    chain_base += part.num_chains;
  }
  out.num_chains = chains;
  out.config.num_chains = chains;
  return out;
}

}  // namespace ordqr
