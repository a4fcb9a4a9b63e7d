#include "augpe/select.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>

namespace augpe::select {

std::vector<std::size_t> rank_select_indices(const vote::VoteHistogram& hist, std::size_t n_syn) {
  if (hist.noisy_counts.empty()) throw DomainError("rank_select: noisy counts missing");
  if (n_syn > hist.noisy_counts.size())
    throw DomainError("rank_select: n_syn (" + std::to_string(n_syn) +
                      ") exceeds population size (" + std::to_string(hist.noisy_counts.size()) +
                      ")");
  std::vector<std::size_t> order(hist.noisy_counts.size());
  std::iota(order.begin(), order.end(), 0);
  // Largest count first; equal counts keep the lower index first.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return hist.noisy_counts[a] > hist.noisy_counts[b];
  });
  order.resize(n_syn);
  std::sort(order.begin(), order.end());
  return order;
}

Population rank_select(const vote::VoteHistogram& hist, const Population& population,
                       std::size_t n_syn) {
  if (hist.noisy_counts.size() != population.size())
    throw DomainError("rank_select: histogram size != population size");
  return population.subset(rank_select_indices(hist, n_syn));
}

std::vector<std::size_t> probability_select_indices(const vote::VoteHistogram& hist,
                                                    std::size_t n_syn, Rng& rng) {
  if (!hist.probabilities) throw DomainError("probability_select: probabilities missing");
  const auto& p = *hist.probabilities;
  std::vector<double> cdf(p.size());
  std::partial_sum(p.begin(), p.end(), cdf.begin());
  const double total = cdf.back();

  std::vector<std::size_t> draws(n_syn);
  for (std::size_t i = 0; i < n_syn; ++i) {
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    draws[i] = std::min<std::size_t>(it - cdf.begin(), p.size() - 1);
  }
  return draws;
}

Population probability_select(const vote::VoteHistogram& hist, const Population& population,
                              std::size_t n_syn, Rng& rng) {
  if (hist.probabilities && hist.probabilities->size() != population.size())
    throw DomainError("probability_select: histogram size != population size");
  return population.subset(probability_select_indices(hist, n_syn, rng));
}

Population expand_population(const Population& selected, const VariationFn& variation_fn,
                             std::uint32_t big_l, std::uint32_t concurrency) {
  if (big_l < 1) throw DomainError("expand_population: big_l must be >= 1");
  const std::size_t n = selected.size();
  Population out;
  out.samples.resize(n * big_l);
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = selected.samples[i];
  if (big_l == 1) return out;

  const std::size_t jobs = n * (big_l - 1);
  const int threads = static_cast<int>(std::max<std::uint32_t>(1, concurrency));
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t job = 0; job < jobs; ++job) {
    const std::uint32_t round = static_cast<std::uint32_t>(job / n) + 1;
    const std::size_t idx = job % n;
    Sample result;
    try {
      result = variation_fn(selected.samples[idx], idx, round);
    } catch (const std::exception& e) {
#pragma omp critical(augpe_expand_log)
      std::cerr << "[augpe] variation failed for sample " << idx << " round " << round << ": "
                << e.what() << "; keeping the original\n";
      result = selected.samples[idx];
    }
    out.samples[round * n + idx] = std::move(result);
  }
  return out;
}

}  // namespace augpe::select
