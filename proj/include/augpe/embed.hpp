#pragma once

#include <memory>
#include <string>
#include <vector>

#include "augpe/core.hpp"

namespace augpe::embed {

/// Text embedding model Phi. Implementations are thread-safe for concurrent
/// embed_batch calls.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  /// One row per input text, order preserving, shape (n, dimension()).
  /// Rows are unit-L2-normalized when normalize() is true.
  virtual EmbeddingMatrix embed_batch(const std::vector<std::string>& texts) = 0;

  virtual std::uint32_t dimension() const = 0;
  virtual bool normalize() const = 0;
  virtual std::string id() const = 0;
};

std::unique_ptr<EmbeddingProvider> make_provider(const EmbedConfig& cfg);

/// Deterministic offline embedder: a fixed constant-seeded random projection
/// of the whitespace-token histogram. Projection columns are correlated
/// within pseudo-topics (token direction = topic center + beta * noise,
/// topic = stable hash of the token mod `clusters`) and a sqrt-scale length
/// feature is appended, so topical and length similarity of texts show up as
/// embedding proximity. Pure function of the text: no run seed involved.
class MockHashEmbedder : public EmbeddingProvider {
 public:
  explicit MockHashEmbedder(const EmbedConfig& cfg);

  EmbeddingMatrix embed_batch(const std::vector<std::string>& texts) override;
  std::uint32_t dimension() const override { return dim_; }
  bool normalize() const override { return normalize_; }
  std::string id() const override;

 private:
  void embed_one(const std::string& text, double* out) const;

  std::uint32_t dim_;
  bool normalize_;
  std::uint32_t clusters_;
  double beta_;
  double length_weight_;
  std::vector<double> centers_;     // clusters_ x dim_
  std::vector<double> length_dir_;  // dim_
};

/// OpenAI-compatible /embeddings client. Splits inputs into batches,
/// re-sorts responses by their "index" field, and validates dimensions.
class HttpEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(const EmbedConfig& cfg);

  EmbeddingMatrix embed_batch(const std::vector<std::string>& texts) override;
  std::uint32_t dimension() const override { return cfg_.dimension; }
  bool normalize() const override { return cfg_.normalize; }
  std::string id() const override;

  /// Wire body for one batch; exposed for the golden-format test.
  static std::string request_body_json(const std::string& model,
                                       const std::vector<std::string>& inputs);

 private:
  EmbedConfig cfg_;
};

/// Element-wise mean of K matrices of identical shape (the lookahead
/// embedding). Rows are re-normalized when `renormalize`; a zero row after
/// averaging raises DomainError. `base` supplies the expected shape.
EmbeddingMatrix mean_embedding(const std::vector<EmbeddingMatrix>& matrices,
                               const EmbeddingMatrix& base, bool renormalize);

/// For each query row, the index of the nearest key row (squared L2, ties to
/// the lowest index). Exact brute force, parallel over query rows.
std::vector<std::size_t> pairwise_nearest(const EmbeddingMatrix& queries,
                                          const EmbeddingMatrix& keys);

}  // namespace augpe::embed
