#pragma once

#include <cstdint>
#include <tuple>
#include <utility>
#include <vector>

#include "augpe/core.hpp"
#include "augpe/rng.hpp"

namespace augpe::metrics {

struct LengthStats {
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;
};

LengthStats length_stats(const Population& population);

/// Embedding-distribution similarity report between a real and a synthetic
/// corpus. f1 is the harmonic mean of precision and recall (0 when either
/// vanishes).
struct MetricsReport {
  double fid = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double kl_div = 0.0;
  double tv_div = 0.0;
  LengthStats real_lengths;
  LengthStats synthetic_lengths;
};

/// Frechet distance between Gaussian fits of the two embedding sets:
/// ||mu_a - mu_b||^2 + tr(Sa + Sb - 2 (Sa Sb)^{1/2}). The matrix square root
/// is taken by eigendecomposition of the symmetrized product with eigenvalues
/// clamped at zero; 1e-6 * I is added to both covariances for stability.
/// Result clamped at zero.
double fid(const EmbeddingMatrix& e_a, const EmbeddingMatrix& e_b);

/// k-NN manifold estimates: precision = fraction of synthetic points lying
/// within distance of some real point's k-th-NN radius; recall has the roles
/// swapped. Both sets must be larger than k.
std::tuple<double, double, double> precision_recall_f1(const EmbeddingMatrix& e_real,
                                                       const EmbeddingMatrix& e_syn,
                                                       std::uint32_t k = 5);

/// Cluster-histogram divergence estimates: k-means (fixed 50 Lloyd
/// iterations, seeded greedy init) on the union, per-corpus assignment
/// distributions with add-one smoothing, then KL(real || syn) and
/// TV = 0.5 * sum |p - q|.
std::pair<double, double> kl_tv_divergence(const EmbeddingMatrix& e_real,
                                           const EmbeddingMatrix& e_syn, std::uint32_t n_clusters,
                                           Rng& rng);

/// Word-count histogram with fixed-width bins starting at 0. Only occupied
/// bins are emitted, in ascending order.
std::vector<std::pair<std::uint32_t, std::uint64_t>> length_histogram(const Population& population,
                                                                      std::uint32_t bin_width);

}  // namespace augpe::metrics
