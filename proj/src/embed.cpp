#include "augpe/embed.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "augpe/kernels.hpp"
#include "augpe/rng.hpp"
#include "http_client.hpp"

namespace augpe::embed {

using nlohmann::json;

namespace {

// Constant namespace seeds for the mock embedder. Fixed forever: embeddings
// are a pure function of the text, never of the run seed.
constexpr std::uint64_t kCenterSalt = 0x9d1f38a2c4e0b711ULL;
constexpr std::uint64_t kTokenSalt = 0x5b7e92d10fa6c833ULL;
constexpr std::uint64_t kLengthSalt = 0x3fa84d92e671bc55ULL;

std::vector<std::string_view> split_tokens(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

}  // namespace

MockHashEmbedder::MockHashEmbedder(const EmbedConfig& cfg)
    : dim_(cfg.dimension),
      normalize_(cfg.normalize),
      clusters_(std::max<std::uint32_t>(1, cfg.mock_clusters)),
      beta_(cfg.mock_beta),
      length_weight_(cfg.mock_length_weight) {
  centers_.resize(static_cast<std::size_t>(clusters_) * dim_);
  for (std::uint32_t c = 0; c < clusters_; ++c) {
    Rng rng(splitmix64(kCenterSalt ^ c));
    for (std::uint32_t j = 0; j < dim_; ++j) centers_[c * dim_ + j] = rng.gaussian();
  }
  length_dir_.resize(dim_);
  Rng rng(kLengthSalt);
  double ss = 0.0;
  for (std::uint32_t j = 0; j < dim_; ++j) {
    length_dir_[j] = rng.gaussian();
    ss += length_dir_[j] * length_dir_[j];
  }
  for (std::uint32_t j = 0; j < dim_; ++j) length_dir_[j] /= std::sqrt(ss);
}

void MockHashEmbedder::embed_one(const std::string& text, double* out) const {
  std::fill(out, out + dim_, 0.0);
  const auto tokens = split_tokens(text);
  for (const auto tok : tokens) {
    const std::uint64_t h = stable_hash(tok);
    const std::uint32_t cluster = static_cast<std::uint32_t>(h % clusters_);
    const double* center = centers_.data() + static_cast<std::size_t>(cluster) * dim_;
    Rng noise(splitmix64(kTokenSalt ^ h));
    for (std::uint32_t j = 0; j < dim_; ++j) out[j] += center[j] + beta_ * noise.gaussian();
  }
  // Unit topic part, then a sqrt-scale length feature on a fixed direction
  // so nearest-neighbor voting sees text length as well as topic.
  double ss = 0.0;
  for (std::uint32_t j = 0; j < dim_; ++j) ss += out[j] * out[j];
  if (ss > 0.0) {
    const double inv = 1.0 / std::sqrt(ss);
    for (std::uint32_t j = 0; j < dim_; ++j) out[j] *= inv;
  }
  const double n = static_cast<double>(tokens.size());
  const double length_feature = std::sqrt(n / 100.0);
  for (std::uint32_t j = 0; j < dim_; ++j)
    out[j] += length_weight_ * length_feature * length_dir_[j];
}

EmbeddingMatrix MockHashEmbedder::embed_batch(const std::vector<std::string>& texts) {
  if (texts.empty()) throw DomainError("embed_batch: texts must be non-empty");
  EmbeddingMatrix m(texts.size(), dim_);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < texts.size(); ++i) {
    embed_one(texts[i], m.row(i));
  }
  if (normalize_) m.l2_normalize_rows();
  m.check_finite();
  return m;
}

std::string MockHashEmbedder::id() const {
  std::ostringstream oss;
  oss << "mock_hash(dim=" << dim_ << ",clusters=" << clusters_ << ",beta=" << beta_
      << ",length_weight=" << length_weight_ << ")";
  return oss.str();
}

HttpEmbeddingProvider::HttpEmbeddingProvider(const EmbedConfig& cfg) : cfg_(cfg) {}

std::string HttpEmbeddingProvider::request_body_json(const std::string& model,
                                                     const std::vector<std::string>& inputs) {
  json body;
  body["model"] = model;
  body["input"] = inputs;
  return body.dump();
}

EmbeddingMatrix HttpEmbeddingProvider::embed_batch(const std::vector<std::string>& texts) {
  if (texts.empty()) throw DomainError("embed_batch: texts must be non-empty");
  EmbeddingMatrix m(texts.size(), cfg_.dimension);

  detail::RetryPolicy policy{cfg_.max_retries, cfg_.backoff_base_s, cfg_.timeout_s};
  for (std::size_t start = 0; start < texts.size(); start += cfg_.batch_size) {
    const std::size_t end = std::min(texts.size(), start + cfg_.batch_size);
    const std::vector<std::string> batch(texts.begin() + start, texts.begin() + end);
    const std::string what =
        "embeddings batch [" + std::to_string(start) + ", " + std::to_string(end) + ")";

    Rng jitter(splitmix64(stable_hash(batch.front()) ^ start));
    std::string response;
    try {
      response = detail::post_json_with_retry(cfg_.endpoint, "/embeddings",
                                              request_body_json(cfg_.model, batch), {}, policy,
                                              jitter, what);
    } catch (const BackendError& e) {
      throw BackendError(std::string(e.what()) + " (failed indices " + std::to_string(start) +
                         ".." + std::to_string(end - 1) + ")");
    }

    json j = json::parse(response, nullptr, false);
    if (j.is_discarded() || !j.contains("data") || !j["data"].is_array())
      throw ProtocolError(what + ": response has no \"data\" array");
    const auto& data = j["data"];
    if (data.size() != batch.size())
      throw ProtocolError(what + ": expected " + std::to_string(batch.size()) +
                          " embeddings, got " + std::to_string(data.size()));

    std::vector<bool> filled(batch.size(), false);
    for (const auto& item : data) {
      if (!item.is_object() || !item.contains("index") || !item.contains("embedding"))
        throw ProtocolError(what + ": malformed data item");
      const std::size_t idx = item["index"].get<std::size_t>();
      if (idx >= batch.size()) throw ProtocolError(what + ": index out of range");
      const auto& vec = item["embedding"];
      if (!vec.is_array() || vec.size() != cfg_.dimension)
        throw ProtocolError(what + ": embedding dimension " + std::to_string(vec.size()) +
                            " != configured " + std::to_string(cfg_.dimension));
      double* row = m.row(start + idx);
      for (std::size_t c = 0; c < cfg_.dimension; ++c) row[c] = vec[c].get<double>();
      filled[idx] = true;
    }
    for (std::size_t i = 0; i < filled.size(); ++i)
      if (!filled[i]) throw ProtocolError(what + ": missing embedding for index " + std::to_string(i));
  }

  if (cfg_.normalize) m.l2_normalize_rows();
  m.check_finite();
  return m;
}

std::string HttpEmbeddingProvider::id() const {
  return "http_api(model=" + cfg_.model + ",dim=" + std::to_string(cfg_.dimension) + ")";
}

std::unique_ptr<EmbeddingProvider> make_provider(const EmbedConfig& cfg) {
  switch (cfg.kind) {
    case EmbedConfig::Kind::kMockHash:
      return std::make_unique<MockHashEmbedder>(cfg);
    case EmbedConfig::Kind::kHttpApi:
      return std::make_unique<HttpEmbeddingProvider>(cfg);
  }
  throw ConfigError("unknown embedding provider kind");
}

EmbeddingMatrix mean_embedding(const std::vector<EmbeddingMatrix>& matrices,
                               const EmbeddingMatrix& base, bool renormalize) {
  if (matrices.empty()) throw DomainError("mean_embedding: need at least one matrix (K >= 1)");
  for (const auto& m : matrices) {
    if (m.rows() != base.rows() || m.cols() != base.cols())
      throw DomainError("mean_embedding: shape mismatch with base");
  }
  EmbeddingMatrix out(base.rows(), base.cols());
  const double inv_k = 1.0 / static_cast<double>(matrices.size());
  for (const auto& m : matrices) {
    for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += m.data()[i];
  }
  for (auto& v : out.data()) v *= inv_k;
  if (renormalize) out.l2_normalize_rows();
  out.check_finite();
  return out;
}

std::vector<std::size_t> pairwise_nearest(const EmbeddingMatrix& queries,
                                          const EmbeddingMatrix& keys) {
  return kernels::nearest_key_omp(queries, keys);
}

}  // namespace augpe::embed
