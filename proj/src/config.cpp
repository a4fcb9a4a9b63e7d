#include "augpe/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace augpe::config {

using nlohmann::json;

namespace {

class Reader {
 public:
  explicit Reader(std::vector<std::string>& problems) : problems_(problems) {}

  void check_keys(const json& j, const std::string& where, const std::set<std::string>& known) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!known.count(it.key()))
        problems_.push_back("unknown key \"" + where + it.key() + "\"");
    }
  }

  template <typename T>
  void get(const json& j, const std::string& where, const std::string& key, T& out) {
    if (!j.contains(key)) return;
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception&) {
      problems_.push_back("key \"" + where + key + "\" has the wrong type");
    }
  }

  void note(const std::string& msg) { problems_.push_back(msg); }

 private:
  std::vector<std::string>& problems_;
};

}  // namespace

RunConfig from_json(const json& j) {
  std::vector<std::string> problems;
  Reader r(problems);
  RunConfig cfg;

  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  r.check_keys(j, "",
               {"n_syn", "big_l", "k_lookahead", "iterations", "selection_mode", "epsilon",
                "delta", "delta_log_base", "sigma_override", "temperature", "length_policy",
                "variation_spec", "prompts", "conditional", "min_tokens_filter", "seed",
                "concurrency", "random_max_token", "word_directive_random_api", "expanded_pool",
                "checkpoint_raw_counts", "pseudo_class_pools", "llm", "embedding"});

  if (!j.contains("n_syn")) r.note("missing required key \"n_syn\"");
  r.get(j, "", "n_syn", cfg.n_syn);
  r.get(j, "", "big_l", cfg.big_l);
  r.get(j, "", "k_lookahead", cfg.k_lookahead);
  r.get(j, "", "iterations", cfg.iterations);

  if (j.contains("selection_mode")) {
    const std::string mode = j["selection_mode"].is_string() ? j["selection_mode"].get<std::string>() : "";
    if (mode == "rank")
      cfg.selection_mode = SelectionMode::kRank;
    else if (mode == "probability")
      cfg.selection_mode = SelectionMode::kProbability;
    else
      r.note("\"selection_mode\" must be \"rank\" or \"probability\"");
  }

  if (j.contains("epsilon")) {
    if (j["epsilon"].is_string() && (j["epsilon"] == "inf" || j["epsilon"] == "infinity"))
      cfg.epsilon = std::numeric_limits<double>::infinity();
    else if (j["epsilon"].is_number())
      cfg.epsilon = j["epsilon"].get<double>();
    else
      r.note("\"epsilon\" must be a number or \"inf\"");
  }
  if (j.contains("delta")) {
    if (j["delta"].is_string() && j["delta"] == "auto")
      cfg.delta.reset();
    else if (j["delta"].is_number())
      cfg.delta = j["delta"].get<double>();
    else
      r.note("\"delta\" must be a number or \"auto\"");
  }
  if (j.contains("delta_log_base")) {
    const std::string base =
        j["delta_log_base"].is_string() ? j["delta_log_base"].get<std::string>() : "";
    if (base == "ln")
      cfg.delta_log_base = DeltaLogBase::kLn;
    else if (base == "log10")
      cfg.delta_log_base = DeltaLogBase::kLog10;
    else
      r.note("\"delta_log_base\" must be \"ln\" or \"log10\"");
  }
  if (j.contains("sigma_override")) {
    double v = 0;
    r.get(j, "", "sigma_override", v);
    cfg.sigma_override = v;
  }

  r.get(j, "", "temperature", cfg.temperature);
  r.get(j, "", "conditional", cfg.conditional);
  r.get(j, "", "min_tokens_filter", cfg.min_tokens_filter);
  r.get(j, "", "seed", cfg.seed);
  r.get(j, "", "concurrency", cfg.concurrency);
  r.get(j, "", "random_max_token", cfg.random_max_token);
  r.get(j, "", "word_directive_random_api", cfg.word_directive_random_api);
  r.get(j, "", "expanded_pool", cfg.expanded_pool);
  r.get(j, "", "checkpoint_raw_counts", cfg.checkpoint_raw_counts);

  if (j.contains("length_policy")) {
    const auto& lp = j["length_policy"];
    r.check_keys(lp, "length_policy.", {"sigma_word", "min_word", "w2t_ratio", "fixed_max_token"});
    r.get(lp, "length_policy.", "sigma_word", cfg.length_policy.sigma_word);
    r.get(lp, "length_policy.", "min_word", cfg.length_policy.min_word);
    r.get(lp, "length_policy.", "w2t_ratio", cfg.length_policy.w2t_ratio);
    if (lp.contains("fixed_max_token")) {
      if (lp["fixed_max_token"].is_null()) {
        cfg.length_policy.fixed_max_token.reset();
      } else {
        std::uint32_t v = 0;
        r.get(lp, "length_policy.", "fixed_max_token", v);
        cfg.length_policy.fixed_max_token = v;
      }
    }
  }

  if (j.contains("variation_spec")) {
    const auto& vs = j["variation_spec"];
    r.check_keys(vs, "variation_spec.",
                 {"method", "mask_prob", "num_shots", "demonstrations", "tone_pool", "mask_char"});
    if (vs.contains("method")) {
      const std::string m = vs["method"].is_string() ? vs["method"].get<std::string>() : "";
      if (m == "paraphrase")
        cfg.variation_spec.method = VariationMethod::kParaphrase;
      else if (m == "fill_in_blanks")
        cfg.variation_spec.method = VariationMethod::kFillInBlanks;
      else
        r.note("\"variation_spec.method\" must be \"paraphrase\" or \"fill_in_blanks\"");
    }
    r.get(vs, "variation_spec.", "mask_prob", cfg.variation_spec.mask_prob);
    r.get(vs, "variation_spec.", "num_shots", cfg.variation_spec.num_shots);
    r.get(vs, "variation_spec.", "tone_pool", cfg.variation_spec.tone_pool);
    r.get(vs, "variation_spec.", "mask_char", cfg.variation_spec.mask_char);
    if (vs.contains("demonstrations")) {
      cfg.variation_spec.demonstrations.clear();
      if (!vs["demonstrations"].is_array()) {
        r.note("\"variation_spec.demonstrations\" must be an array of [input, output] pairs");
      } else {
        for (const auto& d : vs["demonstrations"]) {
          if (d.is_array() && d.size() == 2 && d[0].is_string() && d[1].is_string())
            cfg.variation_spec.demonstrations.emplace_back(d[0].get<std::string>(),
                                                           d[1].get<std::string>());
          else
            r.note("\"variation_spec.demonstrations\" entries must be [input, output] pairs");
        }
      }
    }
  }

  if (j.contains("prompts")) {
    const auto& p = j["prompts"];
    r.check_keys(p, "prompts.", {"random_template", "paraphrase_template", "fill_template"});
    r.get(p, "prompts.", "random_template", cfg.prompts.random_template);
    r.get(p, "prompts.", "paraphrase_template", cfg.prompts.paraphrase_template);
    r.get(p, "prompts.", "fill_template", cfg.prompts.fill_template);
  }

  if (j.contains("pseudo_class_pools")) {
    const auto& pools = j["pseudo_class_pools"];
    cfg.pseudo_class_pools.clear();
    if (pools.is_array()) {
      std::vector<std::string> flat;
      r.get(j, "", "pseudo_class_pools", flat);
      cfg.pseudo_class_pools[""] = std::move(flat);
    } else if (pools.is_object()) {
      for (auto it = pools.begin(); it != pools.end(); ++it) {
        if (it.value().is_array()) {
          cfg.pseudo_class_pools[it.key()] = it.value().get<std::vector<std::string>>();
        } else {
          r.note("\"pseudo_class_pools." + it.key() + "\" must be an array of keywords");
        }
      }
    } else {
      r.note("\"pseudo_class_pools\" must be an array or an object of arrays");
    }
  }

  if (j.contains("llm")) {
    const auto& l = j["llm"];
    r.check_keys(l, "llm.",
                 {"kind", "endpoint", "model", "timeout_s", "max_retries", "backoff_base_s",
                  "extra_headers", "mutation_rate", "vocab_size", "n_clusters",
                  "within_cluster_bias"});
    if (l.contains("kind")) {
      const std::string k = l["kind"].is_string() ? l["kind"].get<std::string>() : "";
      if (k == "mock")
        cfg.llm.kind = LlmConfig::Kind::kMock;
      else if (k == "openai_compatible_http")
        cfg.llm.kind = LlmConfig::Kind::kOpenAiHttp;
      else
        r.note("\"llm.kind\" must be \"mock\" or \"openai_compatible_http\"");
    }
    r.get(l, "llm.", "endpoint", cfg.llm.endpoint);
    r.get(l, "llm.", "model", cfg.llm.model);
    r.get(l, "llm.", "timeout_s", cfg.llm.timeout_s);
    r.get(l, "llm.", "max_retries", cfg.llm.max_retries);
    r.get(l, "llm.", "backoff_base_s", cfg.llm.backoff_base_s);
    if (l.contains("extra_headers")) {
      if (l["extra_headers"].is_object()) {
        cfg.llm.extra_headers.clear();
        for (auto it = l["extra_headers"].begin(); it != l["extra_headers"].end(); ++it)
          cfg.llm.extra_headers[it.key()] = it.value().get<std::string>();
      } else {
        r.note("\"llm.extra_headers\" must be an object of strings");
      }
    }
    r.get(l, "llm.", "mutation_rate", cfg.llm.mutation_rate);
    r.get(l, "llm.", "vocab_size", cfg.llm.vocab_size);
    r.get(l, "llm.", "n_clusters", cfg.llm.n_clusters);
    r.get(l, "llm.", "within_cluster_bias", cfg.llm.within_cluster_bias);
  }

  if (j.contains("embedding")) {
    const auto& e = j["embedding"];
    r.check_keys(e, "embedding.",
                 {"kind", "dimension", "normalize", "endpoint", "model", "batch_size",
                  "timeout_s", "max_retries", "backoff_base_s", "mock_clusters", "mock_beta",
                  "mock_length_weight"});
    if (e.contains("kind")) {
      const std::string k = e["kind"].is_string() ? e["kind"].get<std::string>() : "";
      if (k == "mock_hash")
        cfg.embedding.kind = EmbedConfig::Kind::kMockHash;
      else if (k == "http_api")
        cfg.embedding.kind = EmbedConfig::Kind::kHttpApi;
      else
        r.note("\"embedding.kind\" must be \"mock_hash\" or \"http_api\"");
    }
    r.get(e, "embedding.", "dimension", cfg.embedding.dimension);
    r.get(e, "embedding.", "normalize", cfg.embedding.normalize);
    r.get(e, "embedding.", "endpoint", cfg.embedding.endpoint);
    r.get(e, "embedding.", "model", cfg.embedding.model);
    r.get(e, "embedding.", "batch_size", cfg.embedding.batch_size);
    r.get(e, "embedding.", "timeout_s", cfg.embedding.timeout_s);
    r.get(e, "embedding.", "max_retries", cfg.embedding.max_retries);
    r.get(e, "embedding.", "backoff_base_s", cfg.embedding.backoff_base_s);
    r.get(e, "embedding.", "mock_clusters", cfg.embedding.mock_clusters);
    r.get(e, "embedding.", "mock_beta", cfg.embedding.mock_beta);
    r.get(e, "embedding.", "mock_length_weight", cfg.embedding.mock_length_weight);
  }

  if (!problems.empty()) {
    std::ostringstream oss;
    oss << "invalid configuration (" << problems.size() << " problem"
        << (problems.size() == 1 ? "" : "s") << "):";
    for (const auto& p : problems) oss << "\n  - " << p;
    throw ConfigError(oss.str());
  }

  cfg.validate();
  return cfg;
}

RunConfig load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path.string());
  return from_json(j);
}

json to_json(const RunConfig& cfg) {
  json j;
  j["n_syn"] = cfg.n_syn;
  j["big_l"] = cfg.big_l;
  j["k_lookahead"] = cfg.k_lookahead;
  j["iterations"] = cfg.iterations;
  j["selection_mode"] = cfg.selection_mode == SelectionMode::kRank ? "rank" : "probability";
  if (std::isinf(cfg.epsilon))
    j["epsilon"] = "inf";
  else
    j["epsilon"] = cfg.epsilon;
  if (cfg.delta)
    j["delta"] = *cfg.delta;
  else
    j["delta"] = "auto";
  j["delta_log_base"] = cfg.delta_log_base == DeltaLogBase::kLn ? "ln" : "log10";
  if (cfg.sigma_override) j["sigma_override"] = *cfg.sigma_override;
  j["temperature"] = cfg.temperature;
  j["conditional"] = cfg.conditional;
  j["min_tokens_filter"] = cfg.min_tokens_filter;
  j["seed"] = cfg.seed;
  j["concurrency"] = cfg.concurrency;
  j["random_max_token"] = cfg.random_max_token;
  j["word_directive_random_api"] = cfg.word_directive_random_api;
  j["expanded_pool"] = cfg.expanded_pool;
  j["checkpoint_raw_counts"] = cfg.checkpoint_raw_counts;

  j["length_policy"] = {{"sigma_word", cfg.length_policy.sigma_word},
                        {"min_word", cfg.length_policy.min_word},
                        {"w2t_ratio", cfg.length_policy.w2t_ratio}};
  if (cfg.length_policy.fixed_max_token)
    j["length_policy"]["fixed_max_token"] = *cfg.length_policy.fixed_max_token;

  json demos = json::array();
  for (const auto& [in, out] : cfg.variation_spec.demonstrations)
    demos.push_back(json::array({in, out}));
  j["variation_spec"] = {
      {"method",
       cfg.variation_spec.method == VariationMethod::kParaphrase ? "paraphrase" : "fill_in_blanks"},
      {"mask_prob", cfg.variation_spec.mask_prob},
      {"num_shots", cfg.variation_spec.num_shots},
      {"demonstrations", demos},
      {"tone_pool", cfg.variation_spec.tone_pool},
      {"mask_char", cfg.variation_spec.mask_char}};

  j["prompts"] = {{"random_template", cfg.prompts.random_template},
                  {"paraphrase_template", cfg.prompts.paraphrase_template},
                  {"fill_template", cfg.prompts.fill_template}};

  json pools = json::object();
  for (const auto& [label, pool] : cfg.pseudo_class_pools) pools[label] = pool;
  j["pseudo_class_pools"] = pools;

  j["llm"] = {{"kind", cfg.llm.kind == LlmConfig::Kind::kMock ? "mock" : "openai_compatible_http"},
              {"endpoint", cfg.llm.endpoint},
              {"model", cfg.llm.model},
              {"timeout_s", cfg.llm.timeout_s},
              {"max_retries", cfg.llm.max_retries},
              {"backoff_base_s", cfg.llm.backoff_base_s},
              {"extra_headers", cfg.llm.extra_headers},
              {"mutation_rate", cfg.llm.mutation_rate},
              {"vocab_size", cfg.llm.vocab_size},
              {"n_clusters", cfg.llm.n_clusters},
              {"within_cluster_bias", cfg.llm.within_cluster_bias}};

  j["embedding"] = {{"kind", cfg.embedding.kind == EmbedConfig::Kind::kMockHash ? "mock_hash"
                                                                                : "http_api"},
                    {"dimension", cfg.embedding.dimension},
                    {"normalize", cfg.embedding.normalize},
                    {"endpoint", cfg.embedding.endpoint},
                    {"model", cfg.embedding.model},
                    {"batch_size", cfg.embedding.batch_size},
                    {"timeout_s", cfg.embedding.timeout_s},
                    {"max_retries", cfg.embedding.max_retries},
                    {"backoff_base_s", cfg.embedding.backoff_base_s},
                    {"mock_clusters", cfg.embedding.mock_clusters},
                    {"mock_beta", cfg.embedding.mock_beta},
                    {"mock_length_weight", cfg.embedding.mock_length_weight}};
  return j;
}

}  // namespace augpe::config
