#pragma once

#include <span>

#include "augpe/core.hpp"
#include "augpe/embed.hpp"
#include "augpe/mock_vocab.hpp"

namespace augpe::mockworld {

/// Deterministic synthetic universe: a constant vocabulary split into
/// topical clusters, from which private corpora are drawn. Together with the
/// mock LLM and the mock embedder this forms a closed deterministic system.
struct MockUniverse {
  std::uint32_t vocab_size = 1000;
  std::uint32_t n_topics = 3;
  double within_topic_bias = 0.8;
  std::uint64_t seed = 0;
};

/// n samples; each picks a topic by `topic_mix`, then draws tokens mostly
/// from that topic's cluster (within_topic_bias), with length
/// max(5, round(N(mean_len, std_len^2))). Samples are labeled "t<topic>".
PrivateDataset sample_private_corpus(const MockUniverse& universe, std::size_t n,
                                     std::span<const double> topic_mix, double mean_len,
                                     double std_len);

/// Minimum embedding distance (L2) from `sample` to any sample of `dataset`,
/// computed through the same embedding machinery the engine uses.
double oracle_distance(const Sample& sample, const PrivateDataset& dataset,
                       embed::EmbeddingProvider& embedder);

}  // namespace augpe::mockworld
