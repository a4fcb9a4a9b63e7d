#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "augpe/core.hpp"
#include "augpe/rng.hpp"

namespace augpe::vote {

/// Per-synthetic-sample private vote counts: raw, Gaussian-noised, and
/// (optionally) normalized to a probability vector.
struct VoteHistogram {
  std::vector<std::uint64_t> raw_counts;
  std::vector<double> noisy_counts;
  std::optional<std::vector<double>> probabilities;

  std::size_t size() const { return raw_counts.size(); }
};

/// Each private row votes for its nearest synthetic row (squared L2, ties to
/// the lowest index): raw_counts[i] = number of private rows nearest to i.
/// Exactly one vote per private row.
VoteHistogram nn_histogram(const EmbeddingMatrix& e_syn, const EmbeddingMatrix& e_pri);

/// noisy_counts[i] = raw_counts[i] + N(0, sigma^2), i.i.d. from `rng`,
/// sequentially over bins. sigma = 0 copies the raw counts exactly.
VoteHistogram add_noise(VoteHistogram hist, double sigma, Rng& rng);

/// Clamps negative noisy counts to zero and normalizes to sum 1. If
/// everything clamps to zero, falls back to the uniform distribution.
VoteHistogram to_probabilities(VoteHistogram hist);

}  // namespace augpe::vote
