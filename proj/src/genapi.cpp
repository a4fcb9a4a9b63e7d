#include "augpe/genapi.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "http_client.hpp"

namespace augpe::genapi {

using nlohmann::json;

namespace {

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

// round-half-up of p*n
std::size_t mask_count(double p, std::size_t n) {
  return static_cast<std::size_t>(std::floor(p * static_cast<double>(n) + 0.5));
}

/// First k entries of a seeded uniform permutation of [0, n).
std::vector<std::size_t> choose_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k && i < n; ++i) {
    const std::size_t j = i + rng.uniform_int(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(std::min(k, n));
  return idx;
}

}  // namespace

std::string chat_request_body(const std::string& model, const std::string& prompt,
                              double temperature, std::uint32_t max_tokens) {
  json body;
  body["model"] = model;
  body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
  body["temperature"] = temperature;
  body["max_tokens"] = max_tokens;
  body["n"] = 1;
  return body.dump();
}

std::string instantiate_template(
    std::string templ, const std::vector<std::pair<std::string, std::string>>& values) {
  for (const auto& [key, value] : values) {
    const std::string needle = "{" + key + "}";
    std::size_t pos = 0;
    while ((pos = templ.find(needle, pos)) != std::string::npos) {
      templ.replace(pos, needle.size(), value);
      pos += value.size();
    }
  }
  // Tidy whitespace left behind by empty substitutions.
  std::string out;
  out.reserve(templ.size());
  for (char c : templ) {
    if (c == ' ') {
      if (out.empty() || out.back() == ' ' || out.back() == '\n') continue;
      out += c;
    } else if (c == ':' || c == '.' || c == ',' || c == ';' || c == '!' || c == '?') {
      if (!out.empty() && out.back() == ' ') out.pop_back();
      out += c;
    } else if (c == '\n') {
      if (!out.empty() && out.back() == ' ') out.pop_back();
      out += c;
    } else {
      out += c;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string mask_tokens(std::string_view text, double p, const std::string& mask_char, Rng& rng) {
  if (p < 0.0 || p > 1.0) throw DomainError("mask_tokens: p must lie in [0, 1]");
  auto tokens = split_tokens(text);
  if (tokens.empty()) return "";
  const std::size_t k = mask_count(p, tokens.size());
  for (std::size_t pos : choose_without_replacement(tokens.size(), k, rng)) {
    tokens[pos] = mask_char;
  }
  return join_tokens(tokens);
}

TargetLength target_length(std::uint32_t original_word, const LengthPolicy& policy, Rng& rng) {
  if (policy.fixed_max_token) {
    return {original_word, *policy.fixed_max_token};
  }
  const double g = policy.sigma_word > 0.0 ? rng.gaussian(0.0, policy.sigma_word) : 0.0;
  const double target = std::round(static_cast<double>(original_word) + g);
  const std::uint32_t targeted_word =
      static_cast<std::uint32_t>(std::max<double>(target, policy.min_word));
  const std::uint32_t max_token =
      std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::floor(
                                     static_cast<double>(targeted_word) * policy.w2t_ratio)));
  return {targeted_word, max_token};
}

VariationPrompt build_variation_prompt(const std::string& input_text, const VariationSpec& spec,
                                       const LengthPolicy& policy, const PromptTemplates& prompts,
                                       Rng& rng) {
  // Fixed draw order: length noise, tone, mask positions.
  VariationPrompt out;
  out.length = target_length(static_cast<std::uint32_t>(word_count(input_text)), policy, rng);

  std::string tone;
  if (!spec.tone_pool.empty()) {
    tone = " " + spec.tone_pool[rng.uniform_int(spec.tone_pool.size())];
  }

  // The input text is substituted last so tokens inside it can never be
  // mistaken for template placeholders.
  std::string body;
  if (spec.method == VariationMethod::kParaphrase) {
    body = instantiate_template(prompts.paraphrase_template,
                                {{"tone", tone},
                                 {"word_count", std::to_string(out.length.targeted_word)},
                                 {"input", input_text}});
  } else {
    const std::string masked = mask_tokens(input_text, spec.mask_prob, spec.mask_char, rng);
    body = instantiate_template(prompts.fill_template,
                                {{"tone", tone},
                                 {"word_count", std::to_string(out.length.targeted_word)},
                                 {"masked_input", masked}});
  }

  std::string demos;
  for (std::uint32_t s = 0; s < spec.num_shots && s < spec.demonstrations.size(); ++s) {
    demos += "Example input:\n" + spec.demonstrations[s].first + "\nExample output:\n" +
             spec.demonstrations[s].second + "\n\n";
  }
  out.prompt = demos + body;
  return out;
}

std::vector<Sample> random_api(std::size_t n, const std::optional<std::string>& label,
                               const std::vector<std::string>& pseudo_class_pool,
                               const RunConfig& cfg, LlmBackend& backend, std::uint64_t scope,
                               std::uint32_t iteration) {
  if (n < 1) throw DomainError("random_api: n must be >= 1");

  std::optional<std::string> word_value;
  if (cfg.word_directive_random_api) {
    word_value = std::to_string(std::max<std::uint32_t>(
        1, static_cast<std::uint32_t>(std::floor(static_cast<double>(cfg.random_max_token) /
                                                 cfg.length_policy.w2t_ratio))));
  }

  std::vector<Sample> out(n);
  std::vector<std::string> failures;
  const int threads = static_cast<int>(std::max<std::uint32_t>(1, cfg.concurrency));
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t i = 0; i < n; ++i) {
    StreamKey key{cfg.seed, scope, iteration, i, StreamPurpose::kRandomInit, 0};
    Rng rng(key);
    std::string keyword;
    if (!pseudo_class_pool.empty())
      keyword = pseudo_class_pool[rng.uniform_int(pseudo_class_pool.size())];

    const std::string prompt = instantiate_template(
        cfg.prompts.random_template, {{"label", label.value_or("")},
                                      {"keyword", keyword},
                                      {"word_count", word_value.value_or("")}});
    try {
      std::string text = backend.chat_complete(prompt, cfg.temperature, cfg.random_max_token,
                                               key.with_purpose(StreamPurpose::kBackend));
      if (text.empty()) throw BackendError("empty completion");
      out[i] = Sample(std::move(text), label, iteration);
    } catch (const std::exception& e) {
#pragma omp critical(augpe_random_api_errors)
      failures.push_back("slot " + std::to_string(i) + ": " + e.what());
    }
  }
  if (!failures.empty()) {
    std::ostringstream oss;
    oss << "random_api: " << failures.size() << "/" << n << " generations failed:";
    for (const auto& f : failures) oss << "\n  " << f;
    throw BackendError(oss.str());
  }
  return out;
}

Sample variation_api(const Sample& sample, const VariationSpec& spec, const LengthPolicy& policy,
                     const RunConfig& cfg, LlmBackend& backend, const StreamKey& base_key) {
  Rng rng(base_key.with_purpose(StreamPurpose::kVariation));
  const VariationPrompt vp = build_variation_prompt(sample.text(), spec, policy, cfg.prompts, rng);

  std::string text = backend.chat_complete(vp.prompt, cfg.temperature, vp.length.max_token,
                                           base_key.with_purpose(StreamPurpose::kBackend));
  if (text.empty()) throw BackendError("variation_api: empty completion");
  return Sample(std::move(text), sample.label(), static_cast<std::uint32_t>(base_key.iteration));
}

// ---------------------------------------------------------------------------
// Mock backend
// ---------------------------------------------------------------------------

namespace {

bool is_blank_token(const std::string& tok) {
  return !tok.empty() && tok.find_first_not_of('_') == std::string::npos;
}

/// Last "with <digits> words" directive in the prompt, if any.
std::optional<std::uint32_t> parse_word_directive(const std::string& prompt) {
  std::optional<std::uint32_t> result;
  std::size_t pos = 0;
  while ((pos = prompt.find("with ", pos)) != std::string::npos) {
    std::size_t p = pos + 5;
    std::uint64_t value = 0;
    bool any = false;
    while (p < prompt.size() && std::isdigit(static_cast<unsigned char>(prompt[p]))) {
      value = value * 10 + (prompt[p] - '0');
      any = true;
      ++p;
    }
    if (any && prompt.compare(p, 6, " words") == 0 && value > 0 && value < (1u << 20)) {
      result = static_cast<std::uint32_t>(value);
    }
    pos += 5;
  }
  return result;
}

std::string extract_payload(const std::string& prompt) {
  const std::size_t pos = prompt.rfind(":\n");
  if (pos == std::string::npos) return "";
  return prompt.substr(pos + 2);
}

}  // namespace

MockLlmBackend::MockLlmBackend(const LlmConfig& cfg)
    : cfg_(cfg), vocab_(cfg.vocab_size, cfg.n_clusters) {}

std::string MockLlmBackend::chat_complete(const std::string& prompt, double /*temperature*/,
                                          std::uint32_t max_token, const StreamKey& key) {
  Rng rng(key);
  const std::optional<std::uint32_t> directive = parse_word_directive(prompt);
  std::vector<std::string> tokens = split_tokens(extract_payload(prompt));

  if (tokens.empty()) {
    // Fresh random text: uniform over the vocabulary, bounded by the token
    // budget (about 1.3 tokens per word).
    const std::uint32_t budget_words =
        std::max<std::uint32_t>(10, static_cast<std::uint32_t>(max_token / 1.3));
    const std::uint32_t n =
        directive ? *directive : 10 + static_cast<std::uint32_t>(rng.uniform_int(
                                          std::max<std::uint32_t>(1, budget_words - 10 + 1)));
    std::vector<std::string> out(n);
    for (auto& t : out) t = vocab_.words()[rng.uniform_int(vocab_.words().size())];
    return join_tokens(out);
  }

  // Variation: fill every blank, and mutate exactly round(r * n_kept) of the
  // remaining tokens. Replacements lean to the cluster of a random context
  // token so the text's dominant topic can reinforce itself.
  std::vector<std::size_t> context;  // non-blank original positions
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (!is_blank_token(tokens[i])) context.push_back(i);

  const std::vector<std::string> original = tokens;
  std::vector<bool> rewrite(tokens.size(), false);
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (is_blank_token(tokens[i])) rewrite[i] = true;

  const std::size_t n_mutate = mask_count(cfg_.mutation_rate, context.size());
  for (std::size_t pick : choose_without_replacement(context.size(), n_mutate, rng))
    rewrite[context[pick]] = true;

  // Majority cluster of three random context tokens (ties: first drawn).
  // Above the plurality threshold this reinforces the text's dominant topic,
  // the way a model's rewrite keeps drifting toward the text's theme.
  auto context_cluster = [&]() {
    std::uint32_t c[3];
    for (auto& v : c) v = vocab_.cluster_of(original[context[rng.uniform_int(context.size())]]);
    if (c[1] == c[2]) return c[1];
    return c[0];
  };

  auto draw_replacement = [&](bool must_differ, const std::string& orig) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      std::string candidate;
      if (!context.empty() && rng.uniform() < cfg_.within_cluster_bias) {
        const auto& cluster = vocab_.cluster_words(context_cluster());
        candidate = cluster[rng.uniform_int(cluster.size())];
      } else {
        candidate = vocab_.words()[rng.uniform_int(vocab_.words().size())];
      }
      if (!must_differ || candidate != orig) return candidate;
    }
    // Vocabulary has >= 2 words, so a differing word always exists.
    for (const auto& w : vocab_.words())
      if (w != orig) return w;
    return vocab_.words().front();
  };

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (rewrite[i]) tokens[i] = draw_replacement(!is_blank_token(original[i]), original[i]);
  }

  if (directive) {
    const std::uint32_t n = *directive;
    if (tokens.size() > n) {
      tokens.resize(n);
    } else {
      while (tokens.size() < n) tokens.push_back(tokens[rng.uniform_int(tokens.size())]);
    }
  }
  return join_tokens(tokens);
}

std::string MockLlmBackend::id() const {
  std::ostringstream oss;
  oss << "mock(vocab=" << cfg_.vocab_size << ",clusters=" << cfg_.n_clusters
      << ",mutation_rate=" << cfg_.mutation_rate << ",bias=" << cfg_.within_cluster_bias << ")";
  return oss.str();
}

// ---------------------------------------------------------------------------
// HTTP backend
// ---------------------------------------------------------------------------

HttpLlmBackend::HttpLlmBackend(const LlmConfig& cfg) : cfg_(cfg) {}

std::string HttpLlmBackend::chat_complete(const std::string& prompt, double temperature,
                                          std::uint32_t max_token, const StreamKey& key) {
  detail::RetryPolicy policy{cfg_.max_retries, cfg_.backoff_base_s, cfg_.timeout_s};
  Rng jitter(key.with_purpose(StreamPurpose::kRetry));
  const std::string response = detail::post_json_with_retry(
      cfg_.endpoint, "/chat/completions",
      chat_request_body(cfg_.model, prompt, temperature, max_token), cfg_.extra_headers, policy,
      jitter, "chat completion");

  json j = json::parse(response, nullptr, false);
  if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() ||
      j["choices"].empty() || !j["choices"][0].contains("message") ||
      !j["choices"][0]["message"].contains("content") ||
      !j["choices"][0]["message"]["content"].is_string()) {
    throw ProtocolError("chat completion: response has no choices[0].message.content");
  }
  return j["choices"][0]["message"]["content"].get<std::string>();
}

std::string HttpLlmBackend::id() const {
  return "openai_compatible_http(model=" + cfg_.model + ",endpoint=" + cfg_.endpoint + ")";
}

std::unique_ptr<LlmBackend> make_backend(const LlmConfig& cfg) {
  switch (cfg.kind) {
    case LlmConfig::Kind::kMock:
      return std::make_unique<MockLlmBackend>(cfg);
    case LlmConfig::Kind::kOpenAiHttp:
      return std::make_unique<HttpLlmBackend>(cfg);
  }
  throw ConfigError("unknown llm backend kind");
}

}  // namespace augpe::genapi
