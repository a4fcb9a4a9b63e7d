#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace augpe {

/// Constant-seeded synthetic vocabulary partitioned into topical clusters of
/// near-equal size. Shared by the mock LLM backend and the mock universe so
/// both agree on which words belong to which topic. The cluster of ANY token
/// string (vocabulary word or not) is stable_hash(token) % n_clusters — the
/// same rule the mock embedder uses, which is what aligns mock-world topics
/// with embedding geometry.
class MockVocabulary {
 public:
  MockVocabulary(std::uint32_t vocab_size, std::uint32_t n_clusters);

  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::string>& cluster_words(std::uint32_t cluster) const {
    return by_cluster_.at(cluster);
  }
  std::uint32_t n_clusters() const { return n_clusters_; }

  std::uint32_t cluster_of(std::string_view token) const;
  static std::uint32_t cluster_of_token(std::string_view token, std::uint32_t n_clusters);

 private:
  std::uint32_t n_clusters_;
  std::vector<std::string> words_;
  std::vector<std::vector<std::string>> by_cluster_;
};

}  // namespace augpe
