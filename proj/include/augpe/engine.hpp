#pragma once

#include <filesystem>
#include <functional>
#include <optional>

#include "augpe/core.hpp"
#include "augpe/embed.hpp"
#include "augpe/genapi.hpp"
#include "augpe/privacy.hpp"
#include "augpe/vote.hpp"

namespace augpe::engine {

/// Snapshot handed to the observer after each iteration's selection.
/// `population` is the voted pool of the iteration; `selected` is S_t'.
struct IterationInfo {
  std::uint32_t iteration = 0;
  const Population& population;
  const vote::VoteHistogram& histogram;
  const std::vector<std::size_t>& selected_indices;
  const Population& selected;
};

struct RunOptions {
  /// Enables per-iteration checkpoints, manifest and synthetic.jsonl.
  std::optional<std::filesystem::path> run_dir;
  /// Continue from the latest checkpoint in run_dir instead of starting over.
  bool resume = false;
  /// Class label for conditional sub-runs; also conditions the prompts.
  std::optional<std::string> label;
  /// Random-stream scope separating conditional sub-runs.
  std::uint64_t scope = 0;
  /// Pre-resolved noise parameters (shared across classes); resolved from
  /// the config when absent.
  std::optional<privacy::PrivacySpec> privacy;
  /// Called once per iteration, after selection.
  std::function<void(const IterationInfo&)> observer;
};

/// Runs the full generate -> vote -> select -> vary loop and returns the
/// final selected set, filtered by cfg.min_tokens_filter. Population sizes
/// are structural: |S_0| = L * n_syn and every rank-mode population keeps
/// that size; the selected set always has n_syn samples.
Population run(const RunConfig& cfg, const PrivateDataset& private_data,
               genapi::LlmBackend& llm, embed::EmbeddingProvider& embedder,
               const RunOptions& options = {});

/// Per-class decomposition: partitions the private data by label, allocates
/// n_syn proportionally (largest remainder, minimum 1 per non-empty class),
/// and runs each class with the same noise multiplier. Disjoint classes
/// compose in parallel, so the total privacy cost equals one class's cost.
Population run_conditional(const RunConfig& cfg, const PrivateDataset& private_data,
                           genapi::LlmBackend& llm, embed::EmbeddingProvider& embedder,
                           const RunOptions& options = {});

/// Drops samples with word_count < min_tokens, preserving order.
Population filter_short(const Population& population, std::uint32_t min_tokens);

/// Largest-remainder allocation of n_syn across class counts, with a
/// minimum of 1 for every class that has at least one sample. May exceed
/// n_syn when many classes hit the minimum.
std::vector<std::uint32_t> allocate_per_class(const std::vector<std::size_t>& class_counts,
                                              std::uint32_t n_syn);

/// True when run_dir holds a completed run (manifest says so).
bool run_completed(const std::filesystem::path& run_dir);

}  // namespace augpe::engine
