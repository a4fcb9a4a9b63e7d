#include "augpe/vote.hpp"

#include "augpe/kernels.hpp"

namespace augpe::vote {

VoteHistogram nn_histogram(const EmbeddingMatrix& e_syn, const EmbeddingMatrix& e_pri) {
  if (e_syn.empty()) throw DomainError("nn_histogram: synthetic embeddings must be non-empty");
  if (e_pri.empty()) throw DomainError("nn_histogram: private embeddings must be non-empty");
  VoteHistogram hist;
  hist.raw_counts = kernels::nearest_tally_omp(e_pri, e_syn);
  return hist;
}

VoteHistogram add_noise(VoteHistogram hist, double sigma, Rng& rng) {
  if (hist.raw_counts.empty()) throw DomainError("add_noise: raw counts missing");
  if (sigma < 0.0) throw DomainError("add_noise: sigma must be >= 0");
  hist.noisy_counts.resize(hist.raw_counts.size());
  for (std::size_t i = 0; i < hist.raw_counts.size(); ++i) {
    const double raw = static_cast<double>(hist.raw_counts[i]);
    hist.noisy_counts[i] = sigma == 0.0 ? raw : raw + sigma * rng.gaussian();
  }
  return hist;
}

VoteHistogram to_probabilities(VoteHistogram hist) {
  if (hist.noisy_counts.empty()) throw DomainError("to_probabilities: noisy counts missing");
  std::vector<double> p(hist.noisy_counts.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = hist.noisy_counts[i] > 0.0 ? hist.noisy_counts[i] : 0.0;
    total += p[i];
  }
  if (total > 0.0) {
    for (auto& v : p) v /= total;
  } else {
    const double uniform = 1.0 / static_cast<double>(p.size());
    for (auto& v : p) v = uniform;
  }
  hist.probabilities = std::move(p);
  return hist;
}

}  // namespace augpe::vote
