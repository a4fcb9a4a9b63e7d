#include "augpe/mockworld.hpp"

#include <cmath>

#include "augpe/kernels.hpp"
#include "augpe/rng.hpp"

namespace augpe::mockworld {

PrivateDataset sample_private_corpus(const MockUniverse& universe, std::size_t n,
                                     std::span<const double> topic_mix, double mean_len,
                                     double std_len) {
  if (n < 1) throw DomainError("sample_private_corpus: n must be >= 1");
  if (topic_mix.size() != universe.n_topics)
    throw DomainError("sample_private_corpus: topic_mix length must equal n_topics");
  double mix_total = 0.0;
  for (double w : topic_mix) {
    if (w < 0.0) throw DomainError("sample_private_corpus: topic_mix weights must be >= 0");
    mix_total += w;
  }
  if (!(mix_total > 0.0)) throw DomainError("sample_private_corpus: topic_mix sums to zero");

  const MockVocabulary vocab(universe.vocab_size, universe.n_topics);
  std::vector<std::string> label_set;
  for (std::uint32_t t = 0; t < universe.n_topics; ++t) label_set.push_back("t" + std::to_string(t));

  std::vector<Sample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(StreamKey{universe.seed, 0, 0, i, StreamPurpose::kCorpus, 0});

    std::uint32_t topic = universe.n_topics - 1;
    double u = rng.uniform() * mix_total;
    for (std::uint32_t t = 0; t < universe.n_topics; ++t) {
      if (u < topic_mix[t]) {
        topic = t;
        break;
      }
      u -= topic_mix[t];
    }

    const std::size_t len = static_cast<std::size_t>(
        std::max(5.0, std::round(rng.gaussian(mean_len, std_len))));
    std::string text;
    for (std::size_t w = 0; w < len; ++w) {
      const auto& source = rng.uniform() < universe.within_topic_bias
                               ? vocab.cluster_words(topic)
                               : vocab.words();
      if (w) text += ' ';
      text += source[rng.uniform_int(source.size())];
    }
    samples.emplace_back(std::move(text), label_set[topic]);
  }
  return PrivateDataset::from_samples(std::move(samples), std::move(label_set));
}

double oracle_distance(const Sample& sample, const PrivateDataset& dataset,
                       embed::EmbeddingProvider& embedder) {
  const EmbeddingMatrix e_sample = embedder.embed_batch({sample.text()});
  EmbeddingMatrix e_pri;
  {
    std::vector<std::string> texts;
    for (const auto& s : dataset.samples()) texts.push_back(s.text());
    e_pri = embedder.embed_batch(texts);
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < e_pri.rows(); ++i) {
    best = std::min(best, kernels::squared_distance(e_sample.row_span(0), e_pri.row_span(i)));
  }
  return std::sqrt(best);
}

}  // namespace augpe::mockworld
