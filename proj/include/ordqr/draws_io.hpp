#ifndef ORDQR_DRAWS_IO_HPP
#define ORDQR_DRAWS_IO_HPP

#include <filesystem>

#include "ordqr/gibbs.hpp"

namespace ordqr {

/// CSV with header chain,iteration,<parameter names>; one row per retained
/// draw, round-trip precision.
void write_draws_csv(const PosteriorDraws& draws, const std::filesystem::path& path);

/// Sidecar JSON: theta, priors, sampler config, seed, software version.
void write_draws_metadata(const PosteriorDraws& draws, const std::filesystem::path& path);

/// Reads a draws CSV. Rows are regrouped by the chain column; every chain
/// must have the same length. Sampler metadata is not restored.
PosteriorDraws read_draws_csv(const std::filesystem::path& path);

/// Stacks chains from several files; parameter columns must match exactly.
/// Chains are renumbered in file order.
PosteriorDraws combine_chains(const std::vector<PosteriorDraws>& parts);

/// Round-trip decimal formatting used by every CSV writer.
std::string format_double(double x);

}  // namespace ordqr

#endif  // ORDQR_DRAWS_IO_HPP
