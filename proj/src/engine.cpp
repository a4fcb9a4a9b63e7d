#include "augpe/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>

#include <json.hpp>

#include "augpe/config.hpp"
#include "augpe/jsonl.hpp"
#include "augpe/select.hpp"

namespace augpe::engine {

using nlohmann::json;

namespace {

void log_line(const std::string& msg) { std::cerr << "[augpe] " << msg << "\n"; }

std::string checkpoint_name(std::uint32_t t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "iter_%04u.json", t);
  return buf;
}

struct Checkpoint {
  std::uint32_t iteration = 0;
  Population population;  // the voted pool of the iteration
  std::vector<double> noisy_counts;
  std::vector<std::size_t> selected_indices;
};

void write_checkpoint(const std::filesystem::path& run_dir, const RunConfig& cfg,
                      const RunOptions& opts, std::uint32_t t, const Population& pool,
                      const vote::VoteHistogram& hist,
                      const std::vector<std::size_t>& selected) {
  json j;
  j["iteration"] = t;
  if (opts.label) j["label"] = *opts.label;
  json texts = json::array();
  json origins = json::array();
  for (const auto& s : pool.samples) {
    texts.push_back(s.text());
    origins.push_back(s.origin_iteration());
  }
  j["population"] = std::move(texts);
  j["origins"] = std::move(origins);
  j["noisy_counts"] = hist.noisy_counts;
  j["selected_indices"] = selected;
  if (cfg.checkpoint_raw_counts) {
    log_line("WARNING: writing raw private vote counts into the checkpoint "
             "(checkpoint_raw_counts is a debug flag; raw counts are pre-noise "
             "private intermediates)");
    j["raw_counts"] = hist.raw_counts;
  }
  j["rng_state_key"] = "seed=" + std::to_string(cfg.seed) + ",scope=" +
                       std::to_string(opts.scope) + ",iteration=" + std::to_string(t);

  std::ofstream out(run_dir / checkpoint_name(t), std::ios::binary);
  if (!out) throw DomainError("cannot write checkpoint in " + run_dir.string());
  out << j.dump(2) << "\n";
}

std::optional<Checkpoint> load_latest_checkpoint(const std::filesystem::path& run_dir,
                                                 const RunConfig& cfg,
                                                 const RunOptions& opts) {
  std::optional<std::uint32_t> latest;
  for (std::uint32_t t = 0; t < cfg.iterations; ++t) {
    if (std::filesystem::exists(run_dir / checkpoint_name(t))) latest = t;
  }
  if (!latest) return std::nullopt;

  std::ifstream in(run_dir / checkpoint_name(*latest));
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded())
    throw DomainError("corrupt checkpoint: " + (run_dir / checkpoint_name(*latest)).string());

  Checkpoint cp;
  cp.iteration = j.at("iteration").get<std::uint32_t>();
  const auto& texts = j.at("population");
  const auto& origins = j.at("origins");
  for (std::size_t i = 0; i < texts.size(); ++i) {
    cp.population.samples.emplace_back(texts[i].get<std::string>(), opts.label,
                                       origins[i].get<std::uint32_t>());
  }
  cp.noisy_counts = j.at("noisy_counts").get<std::vector<double>>();
  cp.selected_indices = j.at("selected_indices").get<std::vector<std::size_t>>();
  return cp;
}

void write_manifest(const std::filesystem::path& run_dir, const RunConfig& cfg,
                    const privacy::PrivacySpec& spec, std::size_t n_private,
                    genapi::LlmBackend& llm, embed::EmbeddingProvider& embedder, bool completed,
                    const json& extra) {
  json j;
  j["config"] = config::to_json(cfg);
  j["sigma"] = spec.sigma;
  j["effective_sigma"] = spec.sigma / std::sqrt(static_cast<double>(spec.iterations));
  j["epsilon"] = std::isinf(spec.epsilon) ? json("inf") : json(spec.epsilon);
  j["delta"] = spec.delta;
  j["iterations"] = spec.iterations;
  j["sensitivity"] = spec.sensitivity;
  j["n_private"] = n_private;
  j["seed"] = cfg.seed;
  j["llm_backend"] = llm.id();
  j["embedding_provider"] = embedder.id();
  j["completed"] = completed;
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();

  std::ofstream out(run_dir / "manifest.json", std::ios::binary);
  if (!out) throw DomainError("cannot write manifest in " + run_dir.string());
  out << j.dump(2) << "\n";
}

/// One variation of every sample, keyed (seed, scope, iteration, index,
/// purpose, round); used for the lookahead branch and the original-PE step.
Population vary_all(const Population& base, const RunConfig& cfg, genapi::LlmBackend& llm,
                    std::uint64_t scope, std::uint32_t iteration, StreamPurpose purpose,
                    std::uint32_t round) {
  Population out;
  out.samples.resize(base.size());
  const int threads = static_cast<int>(std::max<std::uint32_t>(1, cfg.concurrency));
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t i = 0; i < base.size(); ++i) {
    StreamKey key{cfg.seed, scope, iteration, i, purpose, round};
    try {
      out.samples[i] = genapi::variation_api(base.samples[i], cfg.variation_spec,
                                             cfg.length_policy, cfg, llm, key);
    } catch (const std::exception& e) {
#pragma omp critical(augpe_vary_all_log)
      log_line("variation failed for sample " + std::to_string(i) + " round " +
               std::to_string(round) + ": " + e.what() + "; keeping the original");
      out.samples[i] = base.samples[i];
    }
  }
  return out;
}

Population expand_next(const Population& selected, const RunConfig& cfg, genapi::LlmBackend& llm,
                       std::uint64_t scope, std::uint32_t iteration) {
  return select::expand_population(
      selected,
      [&](const Sample& s, std::size_t index, std::uint32_t round) {
        StreamKey key{cfg.seed, scope, iteration, index, StreamPurpose::kVariation, round};
        return genapi::variation_api(s, cfg.variation_spec, cfg.length_policy, cfg, llm, key);
      },
      cfg.big_l, cfg.concurrency);
}

std::string sanitize_label(const std::string& label) {
  std::string out;
  for (char c : label) out += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out;
}

}  // namespace

bool run_completed(const std::filesystem::path& run_dir) {
  std::ifstream in(run_dir / "manifest.json");
  if (!in) return false;
  json j = json::parse(in, nullptr, false);
  return !j.is_discarded() && j.value("completed", false);
}

Population filter_short(const Population& population, std::uint32_t min_tokens) {
  if (min_tokens == 0) return population;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < population.size(); ++i) {
    if (population.samples[i].word_count() >= min_tokens) keep.push_back(i);
  }
  if (keep.empty() && !population.samples.empty())
    log_line("WARNING: min_tokens_filter=" + std::to_string(min_tokens) +
             " removed every sample");
  return population.subset(keep);
}

std::vector<std::uint32_t> allocate_per_class(const std::vector<std::size_t>& class_counts,
                                              std::uint32_t n_syn) {
  const double total = static_cast<double>(
      std::accumulate(class_counts.begin(), class_counts.end(), std::size_t{0}));
  if (!(total > 0.0)) throw DomainError("allocate_per_class: no private samples");

  std::vector<std::uint32_t> alloc(class_counts.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;  // (-fraction, index)
  std::uint32_t assigned = 0;
  for (std::size_t c = 0; c < class_counts.size(); ++c) {
    if (class_counts[c] == 0) continue;
    const double quota = n_syn * static_cast<double>(class_counts[c]) / total;
    alloc[c] = static_cast<std::uint32_t>(std::floor(quota));
    assigned += alloc[c];
    remainders.emplace_back(-(quota - std::floor(quota)), c);
  }
  std::sort(remainders.begin(), remainders.end());  // largest remainder first, ties by index
  for (const auto& [neg_frac, c] : remainders) {
    if (assigned >= n_syn) break;
    ++alloc[c];
    ++assigned;
  }
  for (std::size_t c = 0; c < class_counts.size(); ++c) {
    if (class_counts[c] > 0 && alloc[c] == 0) alloc[c] = 1;
  }
  return alloc;
}

Population run(const RunConfig& cfg, const PrivateDataset& private_data,
               genapi::LlmBackend& llm, embed::EmbeddingProvider& embedder,
               const RunOptions& options) {
  cfg.validate();
  if (cfg.selection_mode == SelectionMode::kProbability && cfg.k_lookahead == 0)
    log_line("note: probability selection with K=0 departs from the original-PE pairing "
             "(K>0, L=1)");
  if (cfg.selection_mode == SelectionMode::kRank && cfg.k_lookahead > 0 && !cfg.expanded_pool)
    log_line("note: rank selection with K>0 votes on mean embeddings of S_t");
  if (cfg.selection_mode == SelectionMode::kProbability && cfg.big_l > 1)
    log_line("note: probability selection ignores L after initialization");

  const privacy::PrivacySpec spec =
      options.privacy ? *options.privacy : privacy::resolve(cfg, private_data.size());

  if (options.run_dir) std::filesystem::create_directories(*options.run_dir);

  // The only read of the private texts: embed once, before the loop.
  EmbeddingMatrix e_pri;
  {
    std::vector<std::string> texts;
    texts.reserve(private_data.size());
    for (const auto& s : private_data.samples()) texts.push_back(s.text());
    e_pri = embedder.embed_batch(texts);
  }

  if (options.run_dir)
    write_manifest(*options.run_dir, cfg, spec, private_data.size(), llm, embedder, false,
                   json::object());

  // Resume: rebuild S_{t+1} from the latest checkpoint's selection and the
  // keyed variation streams, which replay identically.
  Population current;  // S_t
  std::uint32_t start_iteration = 0;
  Population selected;
  bool have_selected = false;

  std::optional<Checkpoint> cp;
  if (options.resume && options.run_dir) cp = load_latest_checkpoint(*options.run_dir, cfg, options);
  if (cp) {
    log_line("resuming from iteration " + std::to_string(cp->iteration));
    selected = cp->population.subset(cp->selected_indices);
    have_selected = true;
    start_iteration = cp->iteration + 1;
    if (start_iteration < cfg.iterations) {
      current = cfg.selection_mode == SelectionMode::kRank
                    ? expand_next(selected, cfg, llm, options.scope, cp->iteration)
                    : vary_all(selected, cfg, llm, options.scope, cp->iteration,
                               StreamPurpose::kVariation, 1);
    }
  } else {
    current.samples = genapi::random_api(static_cast<std::size_t>(cfg.big_l) * cfg.n_syn,
                                         options.label, cfg.pool_for(options.label), cfg, llm,
                                         options.scope, 0);
  }

  for (std::uint32_t t = start_iteration; t < cfg.iterations; ++t) {
    // Voting embeddings: self-embedding for K=0, mean over K lookahead
    // variations for K>0, or self-embeddings of the expanded pool.
    Population pool = current;
    EmbeddingMatrix e_vote;
    if (cfg.k_lookahead == 0) {
      e_vote = embedder.embed_batch(pool.texts());
    } else if (cfg.expanded_pool) {
      for (std::uint32_t k = 1; k <= cfg.k_lookahead; ++k) {
        Population varied = vary_all(current, cfg, llm, options.scope, t,
                                     StreamPurpose::kLookahead, k);
        pool.samples.insert(pool.samples.end(), varied.samples.begin(), varied.samples.end());
      }
      e_vote = embedder.embed_batch(pool.texts());
    } else {
      std::vector<EmbeddingMatrix> mats;
      mats.reserve(cfg.k_lookahead);
      for (std::uint32_t k = 1; k <= cfg.k_lookahead; ++k) {
        Population varied = vary_all(current, cfg, llm, options.scope, t,
                                     StreamPurpose::kLookahead, k);
        mats.push_back(embedder.embed_batch(varied.texts()));
      }
      e_vote = embed::mean_embedding(mats, mats.front(), embedder.normalize());
    }

    vote::VoteHistogram hist = vote::nn_histogram(e_vote, e_pri);
    Rng noise_rng(StreamKey{cfg.seed, options.scope, t, 0, StreamPurpose::kVoteNoise, 0});
    hist = vote::add_noise(std::move(hist), spec.sigma, noise_rng);

    std::vector<std::size_t> sel_idx;
    if (cfg.selection_mode == SelectionMode::kRank) {
      sel_idx = select::rank_select_indices(hist, cfg.n_syn);
    } else {
      hist = vote::to_probabilities(std::move(hist));
      Rng sel_rng(StreamKey{cfg.seed, options.scope, t, 0, StreamPurpose::kSelection, 0});
      sel_idx = select::probability_select_indices(hist, cfg.n_syn, sel_rng);
    }
    selected = pool.subset(sel_idx);
    have_selected = true;

    if (options.observer) {
      options.observer(IterationInfo{t, pool, hist, sel_idx, selected});
    }
    if (options.run_dir) write_checkpoint(*options.run_dir, cfg, options, t, pool, hist, sel_idx);

    if (t + 1 < cfg.iterations) {
      current = cfg.selection_mode == SelectionMode::kRank
                    ? expand_next(selected, cfg, llm, options.scope, t)
                    : vary_all(selected, cfg, llm, options.scope, t,
                               StreamPurpose::kVariation, 1);
    }
  }

  if (!have_selected) throw DomainError("run: no iteration executed");
  Population output = filter_short(selected, cfg.min_tokens_filter);

  if (options.run_dir) {
    jsonl::write_samples(*options.run_dir / "synthetic.jsonl", output.samples);
    write_manifest(*options.run_dir, cfg, spec, private_data.size(), llm, embedder, true,
                   json::object());
  }
  return output;
}

Population run_conditional(const RunConfig& cfg, const PrivateDataset& private_data,
                           genapi::LlmBackend& llm, embed::EmbeddingProvider& embedder,
                           const RunOptions& options) {
  cfg.validate();
  if (!cfg.conditional) throw ConfigError("run_conditional: cfg.conditional must be true");
  const auto& labels = private_data.label_set();
  if (labels.empty())
    throw DomainError("run_conditional: private data has no labels");

  // Partition by label, preserving order within each class.
  std::vector<std::vector<Sample>> partitions(labels.size());
  for (const auto& s : private_data.samples()) {
    for (std::size_t c = 0; c < labels.size(); ++c) {
      if (s.label() && *s.label() == labels[c]) {
        partitions[c].push_back(s);
        break;
      }
    }
  }

  std::vector<std::size_t> counts(labels.size());
  for (std::size_t c = 0; c < labels.size(); ++c) counts[c] = partitions[c].size();
  const std::vector<std::uint32_t> alloc = allocate_per_class(counts, cfg.n_syn);

  // One noise multiplier for every class: the classes are disjoint, so the
  // mechanisms compose in parallel and the total cost equals one class's.
  const privacy::PrivacySpec spec =
      options.privacy ? *options.privacy : privacy::resolve(cfg, private_data.size());

  Population combined;
  json allocation = json::object();
  for (std::size_t c = 0; c < labels.size(); ++c) {
    if (counts[c] == 0) {
      log_line("WARNING: class '" + labels[c] + "' has no private samples; skipped");
      continue;
    }
    allocation[labels[c]] = alloc[c];

    RunConfig class_cfg = cfg;
    class_cfg.n_syn = alloc[c];

    RunOptions class_opts;
    class_opts.label = labels[c];
    class_opts.scope = splitmix64(stable_hash(labels[c]));
    class_opts.privacy = spec;
    class_opts.resume = options.resume;
    class_opts.observer = options.observer;
    if (options.run_dir)
      class_opts.run_dir = *options.run_dir / ("class_" + sanitize_label(labels[c]));

    Population part = run(class_cfg, PrivateDataset::from_samples(partitions[c], {labels[c]}),
                          llm, embedder, class_opts);
    combined.samples.insert(combined.samples.end(), part.samples.begin(), part.samples.end());
  }

  if (options.run_dir) {
    jsonl::write_samples(*options.run_dir / "synthetic.jsonl", combined.samples);
    json extra;
    extra["class_allocation"] = allocation;
    extra["privacy_composition"] =
        "parallel across disjoint classes; adaptive Gaussian composition across iterations";
    write_manifest(*options.run_dir, cfg, spec, private_data.size(), llm, embedder, true, extra);
  }
  return combined;
}

}  // namespace augpe::engine
