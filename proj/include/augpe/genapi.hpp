#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "augpe/core.hpp"
#include "augpe/mock_vocab.hpp"
#include "augpe/rng.hpp"

namespace augpe::genapi {

/// Chat-completion backend. Implementations are thread-safe; every call
/// carries its own stream key, so there is no shared random state.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;

  /// One completion for the prompt. Throws BackendError after the retry
  /// budget, ProtocolError on malformed responses.
  virtual std::string chat_complete(const std::string& prompt, double temperature,
                                    std::uint32_t max_token, const StreamKey& key) = 0;

  virtual std::string id() const = 0;
};

std::unique_ptr<LlmBackend> make_backend(const LlmConfig& cfg);

/// Wire body for one chat-completion request. Golden-tested byte-for-byte.
std::string chat_request_body(const std::string& model, const std::string& prompt,
                              double temperature, std::uint32_t max_tokens);

/// Replaces {placeholder} occurrences with the given values (missing values
/// become "") and tidies the leftover whitespace. Guarantees no '{' residue
/// for the known placeholders.
std::string instantiate_template(
    std::string templ, const std::vector<std::pair<std::string, std::string>>& values);

/// Masks exactly round(p * word_count(text)) whitespace tokens, chosen
/// uniformly without replacement, each replaced by `mask_char`. Unmasked
/// tokens are preserved verbatim and in order; output is single-space joined.
std::string mask_tokens(std::string_view text, double p, const std::string& mask_char, Rng& rng);

struct TargetLength {
  std::uint32_t targeted_word = 0;
  std::uint32_t max_token = 0;
};

/// targeted_word = max(round(original_word + N(0, sigma_word^2)), min_word);
/// max_token = floor(targeted_word * w2t_ratio). With fixed_max_token set,
/// returns (original_word, fixed_max_token) and draws nothing.
TargetLength target_length(std::uint32_t original_word, const LengthPolicy& policy, Rng& rng);

/// The prompt a variation call would send, plus its length targets.
/// Deterministic given the rng state; exposed for prompt-content tests.
struct VariationPrompt {
  std::string prompt;
  TargetLength length;
};
VariationPrompt build_variation_prompt(const std::string& input_text, const VariationSpec& spec,
                                       const LengthPolicy& policy, const PromptTemplates& prompts,
                                       Rng& rng);

/// RANDOM_API: n samples from label/keyword-conditioned prompts. Each slot
/// draws one keyword uniformly (with replacement) from the pool; no private
/// text is ever involved. `scope` and `iteration` address the random streams.
std::vector<Sample> random_api(std::size_t n, const std::optional<std::string>& label,
                               const std::vector<std::string>& pseudo_class_pool,
                               const RunConfig& cfg, LlmBackend& backend, std::uint64_t scope,
                               std::uint32_t iteration);

/// VARIATION_API: one variation of `sample` (paraphrase or fill-in-the-
/// blanks per the spec), with tone sampling and adaptive length targeting.
/// `base_key` addresses this (sample, round)'s streams. An empty completion
/// is a failure (BackendError).
Sample variation_api(const Sample& sample, const VariationSpec& spec, const LengthPolicy& policy,
                     const RunConfig& cfg, LlmBackend& backend, const StreamKey& base_key);

/// Offline deterministic LLM. Variation = replace exactly
/// round(mutation_rate * n) tokens; with probability `within_cluster_bias` a
/// replacement is drawn from the majority topical cluster of three random
/// context tokens (keeping rewrites coherent with the text's dominant
/// theme), otherwise from the full vocabulary. Mask tokens ("_") are always
/// filled. Honors a trailing "with N words" directive by truncating or
/// padding. Prompts without an input payload produce fresh random text.
class MockLlmBackend : public LlmBackend {
 public:
  explicit MockLlmBackend(const LlmConfig& cfg);

  std::string chat_complete(const std::string& prompt, double temperature,
                            std::uint32_t max_token, const StreamKey& key) override;
  std::string id() const override;

  const MockVocabulary& vocabulary() const { return vocab_; }

 private:
  LlmConfig cfg_;
  MockVocabulary vocab_;
};

/// OpenAI-compatible /chat/completions client with retry + backoff.
class HttpLlmBackend : public LlmBackend {
 public:
  explicit HttpLlmBackend(const LlmConfig& cfg);

  std::string chat_complete(const std::string& prompt, double temperature,
                            std::uint32_t max_token, const StreamKey& key) override;
  std::string id() const override;

 private:
  LlmConfig cfg_;
};

}  // namespace augpe::genapi
