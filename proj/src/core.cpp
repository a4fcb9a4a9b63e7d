#include "augpe/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace augpe {

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  bool in_token = false;
  for (unsigned char c : text) {
    if (is_space(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++n;
    }
  }
  return n;
}

Sample::Sample(std::string text, std::optional<std::string> label, std::uint32_t origin_iteration)
    : text_(std::move(text)),
      label_(std::move(label)),
      word_count_(augpe::word_count(text_)),
      origin_iteration_(origin_iteration) {}

void Sample::set_text(std::string text) {
  text_ = std::move(text);
  word_count_ = augpe::word_count(text_);
}

PrivateDataset PrivateDataset::from_samples(std::vector<Sample> samples,
                                            std::vector<std::string> label_set) {
  if (samples.empty()) throw DomainError("PrivateDataset: at least one sample required");
  if (label_set.empty()) {
    std::set<std::string> seen;
    for (const auto& s : samples) {
      if (s.label() && seen.insert(*s.label()).second) label_set.push_back(*s.label());
    }
  } else {
    std::set<std::string> declared(label_set.begin(), label_set.end());
    if (declared.size() != label_set.size())
      throw DomainError("PrivateDataset: duplicate labels in label_set");
    for (const auto& s : samples) {
      if (s.label() && !declared.count(*s.label()))
        throw DomainError("PrivateDataset: sample label '" + *s.label() +
                          "' not in declared label_set");
    }
  }
  PrivateDataset d;
  d.samples_ = std::move(samples);
  d.label_set_ = std::move(label_set);
  return d;
}

void EmbeddingMatrix::l2_normalize_rows() {
  for (std::size_t i = 0; i < rows_; ++i) {
    double* r = row(i);
    double ss = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) ss += r[j] * r[j];
    const double norm = std::sqrt(ss);
    if (!(norm > 0.0))
      throw DomainError("EmbeddingMatrix: zero-norm row " + std::to_string(i) +
                        " cannot be normalized");
    for (std::size_t j = 0; j < cols_; ++j) r[j] /= norm;
  }
  normalized_ = true;
}

void EmbeddingMatrix::check_finite() const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i]))
      throw DomainError("EmbeddingMatrix: non-finite entry at flat index " + std::to_string(i));
  }
}

EmbeddingMatrix EmbeddingMatrix::subset(std::span<const std::size_t> indices) const {
  EmbeddingMatrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) throw DomainError("EmbeddingMatrix::subset: index out of range");
    std::copy(row(indices[i]), row(indices[i]) + cols_, out.row(i));
  }
  out.normalized_ = normalized_;
  return out;
}

std::vector<std::string> Population::texts() const {
  std::vector<std::string> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.text());
  return out;
}

Population Population::subset(std::span<const std::size_t> indices) const {
  Population out;
  out.samples.reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx >= samples.size()) throw DomainError("Population::subset: index out of range");
    out.samples.push_back(samples[idx]);
  }
  if (embeddings) out.embeddings = embeddings->subset(indices);
  return out;
}

void Population::validate() const {
  if (embeddings) {
    if (embeddings->rows() != samples.size())
      throw DomainError("Population: embedding rows (" + std::to_string(embeddings->rows()) +
                        ") != sample count (" + std::to_string(samples.size()) + ")");
    embeddings->check_finite();
  }
}

void RunConfig::validate() const {
  std::vector<std::string> problems;
  auto require = [&](bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
  };

  require(n_syn >= 1, "n_syn must be >= 1");
  require(big_l >= 1, "big_l must be >= 1");
  require(iterations >= 1, "iterations must be >= 1");
  require(epsilon > 0.0, "epsilon must be > 0 (use \"inf\" for no privacy)");
  if (delta) require(*delta > 0.0 && *delta < 1.0, "delta must lie in (0, 1)");
  if (sigma_override) require(*sigma_override >= 0.0, "sigma_override must be >= 0");
  require(temperature > 0.0, "temperature must be > 0");
  require(concurrency >= 1, "concurrency must be >= 1");

  require(length_policy.min_word >= 1, "length_policy.min_word must be >= 1");
  require(length_policy.w2t_ratio > 0.0, "length_policy.w2t_ratio must be > 0");
  require(length_policy.sigma_word >= 0.0, "length_policy.sigma_word must be >= 0");
  if (length_policy.fixed_max_token)
    require(*length_policy.fixed_max_token >= 1, "length_policy.fixed_max_token must be >= 1");

  require(variation_spec.mask_prob >= 0.0 && variation_spec.mask_prob <= 1.0,
          "variation_spec.mask_prob must lie in [0, 1]");
  require(variation_spec.num_shots <= variation_spec.demonstrations.size(),
          "variation_spec.num_shots exceeds the number of demonstrations");
  require(!variation_spec.mask_char.empty(), "variation_spec.mask_char must be non-empty");

  require(random_max_token >= 1, "random_max_token must be >= 1");
  if (word_directive_random_api)
    require(prompts.random_template.find("{word_count}") != std::string::npos,
            "word_directive_random_api requires {word_count} in random_template");
  if (variation_spec.method == VariationMethod::kParaphrase)
    require(prompts.paraphrase_template.find("{input}") != std::string::npos,
            "paraphrase_template must contain {input}");
  else
    require(prompts.fill_template.find("{masked_input}") != std::string::npos,
            "fill_template must contain {masked_input}");

  require(embedding.dimension >= 1, "embedding.dimension must be >= 1");
  require(embedding.batch_size >= 1, "embedding.batch_size must be >= 1");
  require(llm.vocab_size >= 2, "llm.vocab_size must be >= 2");
  require(llm.n_clusters >= 1 && llm.n_clusters <= llm.vocab_size,
          "llm.n_clusters must lie in [1, vocab_size]");
  require(llm.mutation_rate >= 0.0 && llm.mutation_rate <= 1.0,
          "llm.mutation_rate must lie in [0, 1]");
  require(llm.within_cluster_bias >= 0.0 && llm.within_cluster_bias <= 1.0,
          "llm.within_cluster_bias must lie in [0, 1]");
  require(expanded_pool ? k_lookahead > 0 : true, "expanded_pool requires k_lookahead > 0");

  if (!problems.empty()) {
    std::ostringstream oss;
    oss << "invalid configuration (" << problems.size() << " problem"
        << (problems.size() == 1 ? "" : "s") << "):";
    for (const auto& p : problems) oss << "\n  - " << p;
    throw ConfigError(oss.str());
  }
}

const std::vector<std::string>& RunConfig::pool_for(
    const std::optional<std::string>& label) const {
  static const std::vector<std::string> kEmpty;
  if (label) {
    auto it = pseudo_class_pools.find(*label);
    if (it != pseudo_class_pools.end()) return it->second;
  }
  auto it = pseudo_class_pools.find("");
  return it != pseudo_class_pools.end() ? it->second : kEmpty;
}

}  // namespace augpe
