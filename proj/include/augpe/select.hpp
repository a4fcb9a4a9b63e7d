#pragma once

#include <functional>

#include "augpe/core.hpp"
#include "augpe/rng.hpp"
#include "augpe/vote.hpp"

namespace augpe::select {

/// Indices of the n_syn largest noisy counts, ties broken by lower index,
/// returned in ascending original-index order (no duplicates).
std::vector<std::size_t> rank_select_indices(const vote::VoteHistogram& hist, std::size_t n_syn);

/// Top-n_syn samples by noisy count. Reads noisy_counts directly (not the
/// clamped probabilities) so ordering information below zero survives.
Population rank_select(const vote::VoteHistogram& hist, const Population& population,
                       std::size_t n_syn);

/// n_syn i.i.d. index draws (with replacement) weighted by probabilities.
std::vector<std::size_t> probability_select_indices(const vote::VoteHistogram& hist,
                                                    std::size_t n_syn, Rng& rng);

/// n_syn draws with replacement from the population, weighted by the
/// histogram's probability vector. Duplicates allowed; this is the original
/// resampling behavior whose redundancy rank selection removes.
Population probability_select(const vote::VoteHistogram& hist, const Population& population,
                              std::size_t n_syn, Rng& rng);

/// Produces one variation of `sample`; `sample_index` and `round` address
/// the sample's own random streams.
using VariationFn =
    std::function<Sample(const Sample& sample, std::size_t sample_index, std::uint32_t round)>;

/// selected ++ (L-1 variation rounds of every selected sample). Layout:
/// all originals first in original order, then round 1 in original order,
/// then round 2, and so on — fixed regardless of completion order. A failed
/// variation falls back to the unvaried original (population size is a
/// structural invariant) and is logged. Variation calls run concurrently,
/// bounded by `concurrency`.
Population expand_population(const Population& selected, const VariationFn& variation_fn,
                             std::uint32_t big_l, std::uint32_t concurrency = 1);

}  // namespace augpe::select
