#pragma once

#include <atomic>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "augpe/common.hpp"

namespace augpe {

/// Number of maximal whitespace-delimited token runs in `text`.
/// Text is opaque UTF-8; whitespace is the ASCII set (space, \t, \n, \r, \f, \v).
std::size_t word_count(std::string_view text);

/// One text record with an optional class label. `word_count()` is kept in
/// sync with the text on every mutation.
class Sample {
 public:
  Sample() = default;
  explicit Sample(std::string text, std::optional<std::string> label = std::nullopt,
                  std::uint32_t origin_iteration = 0);

  const std::string& text() const { return text_; }
  void set_text(std::string text);

  const std::optional<std::string>& label() const { return label_; }
  void set_label(std::optional<std::string> label) { label_ = std::move(label); }

  std::size_t word_count() const { return word_count_; }

  std::uint32_t origin_iteration() const { return origin_iteration_; }
  void set_origin_iteration(std::uint32_t it) { origin_iteration_ = it; }

 private:
  std::string text_;
  std::optional<std::string> label_;
  std::size_t word_count_ = 0;
  std::uint32_t origin_iteration_ = 0;
};

/// The private corpus. Read access to the samples goes through `samples()`,
/// which counts accesses so tests can assert how often the engine touches
/// private data.
class PrivateDataset {
 public:
  /// Validates: at least one sample; every label present in `label_set`.
  /// An empty `label_set` is derived from the samples (first-appearance order).
  static PrivateDataset from_samples(std::vector<Sample> samples,
                                     std::vector<std::string> label_set = {});

  const std::vector<Sample>& samples() const {
    accesses_->fetch_add(1, std::memory_order_relaxed);
    return samples_;
  }
  const std::vector<std::string>& label_set() const { return label_set_; }
  std::size_t size() const { return samples_.size(); }
  std::uint64_t access_count() const { return accesses_->load(std::memory_order_relaxed); }

 private:
  PrivateDataset() : accesses_(std::make_shared<std::atomic<std::uint64_t>>(0)) {}
  std::vector<Sample> samples_;
  std::vector<std::string> label_set_;
  std::shared_ptr<std::atomic<std::uint64_t>> accesses_;
};

/// Dense row-major (n, d) matrix of embeddings.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t cols)
      : data_(rows * cols, 0.0), rows_(rows), cols_(cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }
  std::span<const double> row_span(std::size_t i) const { return {row(i), cols_}; }

  double& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool normalized() const { return normalized_; }
  void set_normalized(bool v) { normalized_ = v; }

  /// Scales every row to unit L2 norm; throws DomainError on a zero row.
  void l2_normalize_rows();

  /// Throws DomainError if any entry is NaN or infinite.
  void check_finite() const;

  /// Rows picked by `indices`, in the given order.
  EmbeddingMatrix subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<double> data_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  bool normalized_ = false;
};

/// An ordered synthetic sample set with its (optional) embedding matrix,
/// aligned index-for-index with the samples.
struct Population {
  std::vector<Sample> samples;
  std::optional<EmbeddingMatrix> embeddings;

  std::size_t size() const { return samples.size(); }

  std::vector<std::string> texts() const;

  /// Keeps sample/embedding alignment across any reorder or filter.
  Population subset(std::span<const std::size_t> indices) const;

  /// Throws DomainError when the embedding row count disagrees with the
  /// sample count or any embedding entry is non-finite.
  void validate() const;
};

enum class SelectionMode { kRank, kProbability };
enum class VariationMethod { kParaphrase, kFillInBlanks };
enum class DeltaLogBase { kLn, kLog10 };

/// Adaptive length targeting for the variation prompts. When
/// `fixed_max_token` is set, adaptation is disabled entirely.
struct LengthPolicy {
  double sigma_word = 0.0;
  std::uint32_t min_word = 1;
  double w2t_ratio = 1.3;
  std::optional<std::uint32_t> fixed_max_token;
};

/// How VARIATION_API rewrites a sample.
struct VariationSpec {
  VariationMethod method = VariationMethod::kParaphrase;
  double mask_prob = 0.5;  // used only by fill-in-the-blanks
  std::uint32_t num_shots = 0;
  std::vector<std::pair<std::string, std::string>> demonstrations;
  std::vector<std::string> tone_pool;
  std::string mask_char = "_";
};

/// Prompt templates. Placeholders: random prompts may reference {label},
/// {keyword} and {word_count}; variation prompts {input}/{masked_input},
/// {tone} and {word_count}. Missing values are substituted with "" and the
/// surrounding whitespace is tidied.
struct PromptTemplates {
  std::string random_template =
      "Please write one text sample of type {label} about the keyword {keyword}:";
  std::string paraphrase_template =
      "Please rephrase the below sentences{tone} with {word_count} words:\n{input}";
  std::string fill_template =
      "Please fill in the blanks for the below sentences{tone} with {word_count} "
      "words:\n{masked_input}";
};

/// LLM backend selection and parameters.
struct LlmConfig {
  enum class Kind { kMock, kOpenAiHttp };
  Kind kind = Kind::kMock;

  // http
  std::string endpoint = "https://api.openai.com/v1";
  std::string model = "gpt-3.5-turbo";
  double timeout_s = 120.0;
  int max_retries = 5;
  double backoff_base_s = 1.0;
  std::map<std::string, std::string> extra_headers;

  // mock
  double mutation_rate = 0.4;
  std::uint32_t vocab_size = 1000;
  std::uint32_t n_clusters = 3;
  double within_cluster_bias = 0.9;
};

/// Embedding provider selection and parameters.
struct EmbedConfig {
  enum class Kind { kMockHash, kHttpApi };
  Kind kind = Kind::kMockHash;
  std::uint32_t dimension = 64;
  bool normalize = true;

  // http
  std::string endpoint = "https://api.openai.com/v1";
  std::string model = "text-embedding-3-small";
  std::uint32_t batch_size = 64;
  double timeout_s = 120.0;
  int max_retries = 5;
  double backoff_base_s = 1.0;

  // mock
  std::uint32_t mock_clusters = 3;
  double mock_beta = 0.25;
  double mock_length_weight = 1.0;
};

/// All algorithm hyperparameters for one run.
struct RunConfig {
  std::uint32_t n_syn = 0;          // N_syn
  std::uint32_t big_l = 1;          // L
  std::uint32_t k_lookahead = 0;    // K
  std::uint32_t iterations = 1;     // T
  SelectionMode selection_mode = SelectionMode::kRank;

  double epsilon = std::numeric_limits<double>::infinity();
  std::optional<double> delta;      // nullopt = auto: 1/(N_priv * log N_priv)
  DeltaLogBase delta_log_base = DeltaLogBase::kLn;
  std::optional<double> sigma_override;

  double temperature = 1.2;
  LengthPolicy length_policy;
  VariationSpec variation_spec;
  PromptTemplates prompts;

  bool conditional = false;
  std::uint32_t min_tokens_filter = 0;
  std::uint64_t seed = 0;
  std::uint32_t concurrency = 4;

  std::uint32_t random_max_token = 128;
  bool word_directive_random_api = false;
  bool expanded_pool = false;          // vote over S_t plus its K variations
  bool checkpoint_raw_counts = false;  // debug only; raw counts are private

  /// Keyword pools for the pseudo-class prompts. Key "" applies to
  /// unconditional runs and to labels without their own pool.
  std::map<std::string, std::vector<std::string>> pseudo_class_pools;

  LlmConfig llm;
  EmbedConfig embedding;

  /// Throws ConfigError listing every problem found.
  void validate() const;

  const std::vector<std::string>& pool_for(const std::optional<std::string>& label) const;
};

}  // namespace augpe
