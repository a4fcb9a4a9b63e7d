#include "augpe/mock_vocab.hpp"

#include <set>

#include "augpe/common.hpp"
#include "augpe/rng.hpp"

namespace augpe {

namespace {

constexpr std::uint64_t kVocabSalt = 0x7c15f2ab90d3e847ULL;

const char* const kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"};
const char* const kVowels[] = {"a", "e", "i", "o", "u"};

std::string make_word(Rng& rng) {
  const int syllables = 2 + static_cast<int>(rng.uniform_int(2));
  std::string w;
  for (int s = 0; s < syllables; ++s) {
    w += kOnsets[rng.uniform_int(std::size(kOnsets))];
    w += kVowels[rng.uniform_int(std::size(kVowels))];
  }
  return w;
}

}  // namespace

std::uint32_t MockVocabulary::cluster_of_token(std::string_view token, std::uint32_t n_clusters) {
  return static_cast<std::uint32_t>(stable_hash(token) % n_clusters);
}

std::uint32_t MockVocabulary::cluster_of(std::string_view token) const {
  return cluster_of_token(token, n_clusters_);
}

MockVocabulary::MockVocabulary(std::uint32_t vocab_size, std::uint32_t n_clusters)
    : n_clusters_(n_clusters), by_cluster_(n_clusters) {
  if (vocab_size < 2) throw DomainError("MockVocabulary: vocab_size must be >= 2");
  if (n_clusters < 1 || n_clusters > vocab_size)
    throw DomainError("MockVocabulary: n_clusters must lie in [1, vocab_size]");

  // Per-cluster targets differ by at most one.
  std::vector<std::uint32_t> target(n_clusters, vocab_size / n_clusters);
  for (std::uint32_t c = 0; c < vocab_size % n_clusters; ++c) ++target[c];

  Rng rng(kVocabSalt);
  std::set<std::string> seen;
  std::uint32_t filled = 0;
  while (filled < vocab_size) {
    std::string w = make_word(rng);
    if (!seen.insert(w).second) continue;
    const std::uint32_t c = cluster_of(w);
    if (by_cluster_[c].size() >= target[c]) continue;  // rejection fill per cluster
    by_cluster_[c].push_back(std::move(w));
    ++filled;
  }
  for (const auto& bucket : by_cluster_)
    for (const auto& w : bucket) words_.push_back(w);
}

}  // namespace augpe
