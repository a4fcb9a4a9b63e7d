#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "augpe/config.hpp"
#include "augpe/engine.hpp"
#include "augpe/jsonl.hpp"
#include "augpe/metrics.hpp"
#include "augpe/mockworld.hpp"
#include "augpe/privacy.hpp"

namespace {

using augpe::DeltaLogBase;
using augpe::Population;
using augpe::Rng;
using augpe::Sample;
using augpe::StreamKey;
using augpe::StreamPurpose;
using nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitBackend = 3;
constexpr int kExitInternal = 4;

void apply_env_endpoint(augpe::RunConfig& cfg) {
  if (const char* base = std::getenv("AUGPE_API_BASE"); base && *base) {
    cfg.llm.endpoint = base;
    cfg.embedding.endpoint = base;
  }
}

Population subsample(const Population& p, std::size_t limit, Rng& rng) {
  if (p.size() <= limit) return p;
  std::vector<std::size_t> idx(p.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = 0; i < limit; ++i) {
    const std::size_t j = i + rng.uniform_int(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(limit);
  std::sort(idx.begin(), idx.end());
  return p.subset(idx);
}

void write_length_csv(const std::filesystem::path& path, const Population& p,
                      std::uint32_t bin_width) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw augpe::ConfigError("cannot write " + path.string());
  out << "bin_start,count\n";
  for (const auto& [start, count] : augpe::metrics::length_histogram(p, bin_width))
    out << start << "," << count << "\n";
}

int cmd_calibrate(double epsilon, std::optional<double> delta, std::optional<std::uint64_t> n_priv,
                  std::uint32_t iterations, const std::string& log_base) {
  const DeltaLogBase base = log_base == "log10" ? DeltaLogBase::kLog10 : DeltaLogBase::kLn;
  if (delta.has_value() == n_priv.has_value())
    throw augpe::ConfigError("calibrate: pass exactly one of --delta / --n-priv");
  const double resolved_delta =
      delta ? *delta : augpe::privacy::default_delta(*n_priv, base);

  double sigma = 0.0;
  if (!std::isinf(epsilon)) sigma = augpe::privacy::calibrate_sigma(epsilon, resolved_delta, iterations);

  json out;
  out["sigma"] = sigma;
  out["epsilon"] = std::isinf(epsilon) ? json("inf") : json(epsilon);
  out["delta"] = resolved_delta;
  out["iterations"] = iterations;
  out["effective_sigma"] = sigma / std::sqrt(static_cast<double>(iterations));
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& data_path,
            const std::string& out_dir, bool resume) {
  if (!std::filesystem::exists(config_path))
    throw augpe::ConfigError("config file not found: " + config_path);
  if (!std::filesystem::exists(data_path))
    throw augpe::ConfigError("data file not found: " + data_path);

  augpe::RunConfig cfg = augpe::config::load_file(config_path);
  apply_env_endpoint(cfg);

  if (resume && augpe::engine::run_completed(out_dir)) {
    std::cerr << "[augpe] run already completed in " << out_dir << "; nothing to do\n";
    return 0;
  }

  const augpe::PrivateDataset data = augpe::jsonl::read_dataset(data_path);
  auto llm = augpe::genapi::make_backend(cfg.llm);
  auto embedder = augpe::embed::make_provider(cfg.embedding);

  augpe::engine::RunOptions opts;
  opts.run_dir = std::filesystem::path(out_dir);
  opts.resume = resume;

  const Population out = cfg.conditional
                             ? augpe::engine::run_conditional(cfg, data, *llm, *embedder, opts)
                             : augpe::engine::run(cfg, data, *llm, *embedder, opts);
  std::cerr << "[augpe] wrote " << out.size() << " synthetic samples to " << out_dir
            << "/synthetic.jsonl\n";
  return 0;
}

int cmd_evaluate(const std::string& real_path, const std::string& synthetic_path,
                 const std::string& config_path, std::uint32_t k, std::uint32_t clusters,
                 std::size_t subsample_limit, std::uint32_t bin_width, std::uint64_t seed,
                 const std::string& csv_prefix) {
  if (!std::filesystem::exists(real_path))
    throw augpe::ConfigError("real dataset not found: " + real_path);
  if (!std::filesystem::exists(synthetic_path))
    throw augpe::ConfigError("synthetic dataset not found: " + synthetic_path);

  augpe::EmbedConfig embed_cfg;
  if (!config_path.empty()) {
    augpe::RunConfig cfg = augpe::config::load_file(config_path);
    apply_env_endpoint(cfg);
    embed_cfg = cfg.embedding;
  }

  Population real{augpe::jsonl::read_samples(real_path), std::nullopt};
  Population syn{augpe::jsonl::read_samples(synthetic_path), std::nullopt};
  if (real.samples.empty()) throw augpe::ConfigError("real dataset is empty: " + real_path);
  if (syn.samples.empty())
    throw augpe::ConfigError("synthetic dataset is empty: " + synthetic_path);

  Rng sub_rng(StreamKey{seed, 0, 0, 0, StreamPurpose::kMetrics, 0});
  const Population real_s = subsample(real, subsample_limit, sub_rng);
  const Population syn_s = subsample(syn, subsample_limit, sub_rng);

  auto embedder = augpe::embed::make_provider(embed_cfg);
  const augpe::EmbeddingMatrix e_real = embedder->embed_batch(real_s.texts());
  const augpe::EmbeddingMatrix e_syn = embedder->embed_batch(syn_s.texts());

  augpe::metrics::MetricsReport report;
  report.fid = augpe::metrics::fid(e_real, e_syn);
  std::tie(report.precision, report.recall, report.f1) =
      augpe::metrics::precision_recall_f1(e_real, e_syn, k);
  Rng kl_rng(StreamKey{seed, 0, 0, 0, StreamPurpose::kMetrics, 1});
  std::tie(report.kl_div, report.tv_div) =
      augpe::metrics::kl_tv_divergence(e_real, e_syn, clusters, kl_rng);
  report.real_lengths = augpe::metrics::length_stats(real_s);
  report.synthetic_lengths = augpe::metrics::length_stats(syn_s);

  json out;
  out["fid"] = report.fid;
  out["precision"] = report.precision;
  out["recall"] = report.recall;
  out["f1"] = report.f1;
  out["kl_div"] = report.kl_div;
  out["tv_div"] = report.tv_div;
  out["length_stats"] = {{"real",
                          {{"mean", report.real_lengths.mean},
                           {"median", report.real_lengths.median},
                           {"p95", report.real_lengths.p95}}},
                         {"synthetic",
                          {{"mean", report.synthetic_lengths.mean},
                           {"median", report.synthetic_lengths.median},
                           {"p95", report.synthetic_lengths.p95}}}};
  std::cout << out.dump(2) << "\n";

  if (!csv_prefix.empty()) {
    write_length_csv(csv_prefix + "_real_lengths.csv", real, bin_width);
    write_length_csv(csv_prefix + "_synthetic_lengths.csv", syn, bin_width);
  }
  return 0;
}

int cmd_lengths(const std::string& data_path, std::uint32_t bin_width) {
  if (!std::filesystem::exists(data_path))
    throw augpe::ConfigError("data file not found: " + data_path);
  Population p{augpe::jsonl::read_samples(data_path), std::nullopt};
  std::cout << "bin_start,count\n";
  for (const auto& [start, count] : augpe::metrics::length_histogram(p, bin_width))
    std::cout << start << "," << count << "\n";
  return 0;
}

int cmd_mockgen(const std::string& out_path, std::size_t n, std::uint32_t topics,
                const std::vector<double>& mix, double mean_len, double std_len,
                std::uint64_t seed, std::uint32_t vocab_size) {
  augpe::mockworld::MockUniverse universe;
  universe.vocab_size = vocab_size;
  universe.n_topics = topics;
  universe.seed = seed;
  std::vector<double> topic_mix = mix;
  if (topic_mix.empty()) topic_mix.assign(topics, 1.0 / topics);
  const augpe::PrivateDataset data =
      augpe::mockworld::sample_private_corpus(universe, n, topic_mix, mean_len, std_len);
  augpe::jsonl::write_samples(out_path, data.samples());
  std::cerr << "[augpe] wrote " << n << " mock private samples to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private synthetic text via API-only private evolution"};
  app.require_subcommand(1);

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Calibrate the Gaussian noise multiplier");
  std::string cal_epsilon;
  std::optional<double> cal_delta;
  std::optional<std::uint64_t> cal_npriv;
  std::uint32_t cal_iterations = 10;
  std::string cal_base = "ln";
  cal->add_option("--epsilon", cal_epsilon, "Target epsilon (number or \"inf\")")->required();
  cal->add_option("--delta", cal_delta, "Target delta");
  cal->add_option("--n-priv", cal_npriv, "Private corpus size; delta = 1/(N log N)");
  cal->add_option("--iterations", cal_iterations, "Number of composed iterations T");
  cal->add_option("--delta-log-base", cal_base, "ln or log10")
      ->check(CLI::IsMember({"ln", "log10"}));

  // run
  auto* run = app.add_subcommand("run", "Run the synthesis loop");
  std::string run_config, run_data, run_out;
  bool run_resume = false;
  run->add_option("--config", run_config, "Run configuration JSON")->required();
  run->add_option("--data", run_data, "Private dataset (JSON Lines)")->required();
  run->add_option("--out", run_out, "Output/checkpoint directory")->required();
  run->add_flag("--resume", run_resume, "Continue from the latest checkpoint");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Embedding-distribution metrics");
  std::string eval_real, eval_syn, eval_config, eval_csv;
  std::uint32_t eval_k = 5, eval_clusters = 20, eval_bin = 10;
  std::size_t eval_subsample = 5000;
  std::uint64_t eval_seed = 0;
  eval->add_option("--real", eval_real, "Real dataset (JSON Lines)")->required();
  eval->add_option("--synthetic", eval_syn, "Synthetic dataset (JSON Lines)")->required();
  eval->add_option("--config", eval_config, "Run config supplying the embedding section");
  eval->add_option("--k", eval_k, "k for the k-NN precision/recall estimate");
  eval->add_option("--clusters", eval_clusters, "Clusters for the KL/TV estimate");
  eval->add_option("--subsample", eval_subsample, "Row cap per side (seeded)");
  eval->add_option("--bin-width", eval_bin, "Length histogram bin width");
  eval->add_option("--seed", eval_seed, "Seed for subsampling and clustering");
  eval->add_option("--lengths-csv", eval_csv, "Prefix for length histogram CSVs");

  // lengths
  auto* len = app.add_subcommand("lengths", "Word-count histogram as CSV");
  std::string len_data;
  std::uint32_t len_bin = 10;
  len->add_option("--data", len_data, "Dataset (JSON Lines)")->required();
  len->add_option("--bin-width", len_bin, "Bin width");

  // mockgen (hidden helper)
  auto* mock = app.add_subcommand("mockgen", "Write a mock private corpus");
  mock->group("");  // hidden
  std::string mock_out;
  std::size_t mock_n = 1000;
  std::uint32_t mock_topics = 3, mock_vocab = 1000;
  std::vector<double> mock_mix;
  double mock_mean = 120.0, mock_std = 30.0;
  std::uint64_t mock_seed = 0;
  mock->add_option("--out", mock_out, "Output JSONL path")->required();
  mock->add_option("--n", mock_n, "Number of samples");
  mock->add_option("--topics", mock_topics, "Number of topics");
  mock->add_option("--mix", mock_mix, "Topic mixture weights");
  mock->add_option("--mean-len", mock_mean, "Mean word count");
  mock->add_option("--std-len", mock_std, "Word count standard deviation");
  mock->add_option("--seed", mock_seed, "Corpus seed");
  mock->add_option("--vocab-size", mock_vocab, "Vocabulary size");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cal->parsed()) {
      double eps;
      if (cal_epsilon == "inf" || cal_epsilon == "infinity") {
        eps = std::numeric_limits<double>::infinity();
      } else {
        try {
          eps = std::stod(cal_epsilon);
        } catch (...) {
          throw augpe::ConfigError("calibrate: --epsilon must be a number or \"inf\"");
        }
      }
      if (!(eps > 0.0)) throw augpe::ConfigError("calibrate: --epsilon must be > 0");
      return cmd_calibrate(eps, cal_delta, cal_npriv, cal_iterations, cal_base);
    }
    if (run->parsed()) return cmd_run(run_config, run_data, run_out, run_resume);
    if (eval->parsed())
      return cmd_evaluate(eval_real, eval_syn, eval_config, eval_k, eval_clusters, eval_subsample,
                          eval_bin, eval_seed, eval_csv);
    if (len->parsed()) return cmd_lengths(len_data, len_bin);
    if (mock->parsed())
      return cmd_mockgen(mock_out, mock_n, mock_topics, mock_mix, mock_mean, mock_std, mock_seed,
                         mock_vocab);
  } catch (const augpe::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const augpe::BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const augpe::ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
