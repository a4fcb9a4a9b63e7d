// Acceptance suite: every criterion runs at its pinned tolerance and prints
// one PASS/FAIL line. Exit status is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "augpe/config.hpp"
#include "augpe/engine.hpp"
#include "augpe/genapi.hpp"
#include "augpe/kernels.hpp"
#include "augpe/metrics.hpp"
#include "augpe/mockworld.hpp"
#include "augpe/privacy.hpp"
#include "augpe/select.hpp"
#include "augpe/vote.hpp"

using namespace augpe;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& name, const std::function<bool()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  std::string error;
  try {
    ok = body();
  } catch (const std::exception& e) {
    error = e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("[%s] criterion %d: %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", number, name.c_str(),
              seconds, error.empty() ? "" : " error: ", error.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

bool approx_within(double value, double target, double rel_tol) {
  return std::abs(value - target) <= rel_tol * std::abs(target);
}

// --------------------------------------------------------------------------
// 1. Privacy calibration against the published noise multipliers.
// --------------------------------------------------------------------------
bool calibration_vs_published() {
  struct Row {
    const char* dataset;
    std::size_t n_priv;
    double sigmas[3];  // for eps = 1, 2, 4
    double tol;
  };
  const Row rows[] = {
      {"OpenReview", 8396, {11.60, 6.22, 3.38}, 0.02},
      {"PubMed", 75316, {13.26, 7.01, 3.75}, 0.02},
      {"Yelp", 1900000, {15.34, 8.03, 4.24}, 0.05},  // corpus size approximate
  };
  const double eps[] = {1.0, 2.0, 4.0};

  bool ln_ok = true, log10_ok = true;
  for (const auto& row : rows) {
    for (int i = 0; i < 3; ++i) {
      const double s_ln =
          privacy::calibrate_sigma(eps[i], privacy::default_delta(row.n_priv), 10);
      const double s_10 = privacy::calibrate_sigma(
          eps[i], privacy::default_delta(row.n_priv, DeltaLogBase::kLog10), 10);
      if (!approx_within(s_ln, row.sigmas[i], row.tol)) ln_ok = false;
      if (!approx_within(s_10, row.sigmas[i], row.tol)) log10_ok = false;
    }
  }
  std::printf("       delta log base: ln %s all tolerances, log10 %s\n",
              ln_ok ? "satisfies" : "VIOLATES", log10_ok ? "satisfies" : "violates");
  return ln_ok || log10_ok;
}

// --------------------------------------------------------------------------
// 2. Accountant vs numerical-integration oracle; composition identity.
// --------------------------------------------------------------------------
double oracle_delta(double sigma, double epsilon) {
  const double x_star = 0.5 - epsilon * sigma * sigma;
  const double lo = x_star - 40.0 * sigma;
  const int n = 100000;
  const double h = (x_star - lo) / n;
  const double inv_norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
  auto integrand = [&](double x) {
    const double p0 = inv_norm * std::exp(-x * x / (2.0 * sigma * sigma));
    const double p1 = inv_norm * std::exp(-(x - 1.0) * (x - 1.0) / (2.0 * sigma * sigma));
    const double v = p0 - std::exp(epsilon) * p1;
    return v > 0.0 ? v : 0.0;
  };
  double acc = integrand(lo) + integrand(x_star);
  for (int i = 1; i < n; ++i) acc += integrand(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

bool accountant_oracle_equivalence() {
  // 200-point grid: 20 sigmas x 10 epsilons
  for (int si = 0; si < 20; ++si) {
    const double sigma = 0.25 + 0.75 * si;
    for (int ei = 0; ei < 10; ++ei) {
      const double eps = 0.5 * ei;
      if (std::abs(privacy::gaussian_delta(sigma, eps) - oracle_delta(sigma, eps)) > 1e-6)
        return false;
    }
  }
  // composition identity to 1e-12 relative
  Rng rng(2024);
  for (int i = 0; i < 500; ++i) {
    const double sigma = 0.5 + 25.0 * rng.uniform();
    const std::uint32_t t = 1 + static_cast<std::uint32_t>(rng.uniform_int(64));
    const double eps = 5.0 * rng.uniform();
    const double lhs = privacy::composed_delta(sigma, t, eps);
    const double rhs = privacy::gaussian_delta(sigma / std::sqrt(static_cast<double>(t)), eps);
    if (std::abs(lhs - rhs) > 1e-12 * std::max(rhs, 1e-300)) return false;
  }
  return true;
}

// --------------------------------------------------------------------------
// 3. Sensitivity-1 invariant of the raw vote histogram.
// --------------------------------------------------------------------------
EmbeddingMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  EmbeddingMatrix m(rows, cols);
  Rng rng(seed);
  for (auto& v : m.data()) v = rng.gaussian();
  return m;
}

bool sensitivity_invariant() {
  Rng seeder(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n_syn = 2 + seeder.uniform_int(30);
    const std::size_t n_pri = 5 + seeder.uniform_int(100);
    const std::size_t d = 2 + seeder.uniform_int(16);
    const auto e_syn = random_matrix(n_syn, d, 10000 + trial);
    const auto e_pri = random_matrix(n_pri, d, 20000 + trial);
    const auto extra = random_matrix(1, d, 30000 + trial);

    EmbeddingMatrix grown(n_pri + 1, d);
    std::copy(e_pri.data().begin(), e_pri.data().end(), grown.data().begin());
    std::copy(extra.data().begin(), extra.data().end(), grown.data().begin() + n_pri * d);

    const auto before = vote::nn_histogram(e_syn, e_pri).raw_counts;
    const auto after = vote::nn_histogram(e_syn, grown).raw_counts;
    std::size_t changed = 0;
    for (std::size_t j = 0; j < before.size(); ++j) {
      if (before[j] != after[j]) {
        ++changed;
        if (after[j] != before[j] + 1) return false;
      }
    }
    if (changed != 1) return false;
  }
  return true;
}

// --------------------------------------------------------------------------
// 4. Voting tally vs independent brute force, up to 500x100x32.
// --------------------------------------------------------------------------
bool voting_oracle() {
  Rng seeder(13);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n_pri = 50 + seeder.uniform_int(451);  // up to 500
    const std::size_t n_syn = 10 + seeder.uniform_int(91);   // up to 100
    const std::size_t d = 4 + seeder.uniform_int(29);        // up to 32
    const auto e_pri = random_matrix(n_pri, d, 40000 + trial);
    const auto e_syn = random_matrix(n_syn, d, 50000 + trial);

    // plain O(n*m*d) tally, written independently of the kernels
    std::vector<std::uint64_t> expected(n_syn, 0);
    for (std::size_t i = 0; i < n_pri; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n_syn; ++j) {
        double dist = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          const double diff = e_pri.at(i, c) - e_syn.at(j, c);
          dist += diff * diff;
        }
        if (dist < best_d) {
          best_d = dist;
          best = j;
        }
      }
      ++expected[best];
    }
    if (vote::nn_histogram(e_syn, e_pri).raw_counts != expected) return false;
  }
  return true;
}

// --------------------------------------------------------------------------
// Shared mock-world setup for the convergence criteria.
// --------------------------------------------------------------------------
RunConfig convergence_cfg(std::uint64_t seed) {
  RunConfig cfg;
  cfg.n_syn = 50;
  cfg.big_l = 4;
  cfg.k_lookahead = 0;
  cfg.iterations = 5;
  cfg.sigma_override = 0.0;
  cfg.seed = seed;
  cfg.concurrency = 4;
  cfg.length_policy = {20.0, 10, 1.2, std::nullopt};
  cfg.random_max_token = 512;
  cfg.embedding.dimension = 64;
  return cfg;
}

PrivateDataset convergence_corpus() {
  mockworld::MockUniverse universe;
  universe.seed = 77;
  return mockworld::sample_private_corpus(universe, 1000, std::vector<double>{0.5, 0.3, 0.2},
                                          120.0, 30.0);
}

// 5. FID convergence, noiseless and with the calibrated eps=4 noise.
bool fid_convergence() {
  const auto data = convergence_corpus();
  EmbedConfig ecfg;
  ecfg.dimension = 64;
  auto embedder = embed::make_provider(ecfg);

  EmbeddingMatrix e_pri;
  {
    std::vector<std::string> texts;
    for (const auto& s : data.samples()) texts.push_back(s.text());
    e_pri = embedder->embed_batch(texts);
  }

  auto one_run = [&](std::uint64_t seed, std::optional<double> sigma, double& initial,
                     double& final_fid) {
    RunConfig cfg = convergence_cfg(seed);
    if (sigma) {
      cfg.sigma_override = *sigma;
    }
    auto llm = genapi::make_backend(cfg.llm);
    engine::RunOptions opts;
    bool first = true;
    opts.observer = [&](const engine::IterationInfo& info) {
      if (first) {
        initial = metrics::fid(e_pri, embedder->embed_batch(info.population.texts()));
        first = false;
      }
    };
    const Population out = engine::run(cfg, data, *llm, *embedder, opts);
    final_fid = metrics::fid(e_pri, embedder->embed_batch(out.texts()));
  };

  int noiseless_wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    double initial = 0.0, final_fid = 0.0;
    one_run(seed, std::nullopt, initial, final_fid);
    if (final_fid < 0.5 * initial) ++noiseless_wins;
  }

  const double sigma = privacy::calibrate_sigma(4.0, privacy::default_delta(1000), 5);
  int noisy_wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    double initial = 0.0, final_fid = 0.0;
    one_run(100 + seed, sigma, initial, final_fid);
    if (final_fid < initial) ++noisy_wins;
  }
  std::printf("       noiseless halved FID in %d/10 seeds; eps=4 improved FID in %d/10\n",
              noiseless_wins, noisy_wins);
  return noiseless_wins >= 9 && noisy_wins >= 8;
}

// 6. Rank selection beats probability resampling on distinct-sample count.
bool rank_vs_probability() {
  mockworld::MockUniverse universe;
  universe.seed = 33;
  const auto data = mockworld::sample_private_corpus(universe, 400,
                                                     std::vector<double>{0.4, 0.4, 0.2}, 80.0,
                                                     20.0);
  EmbedConfig ecfg;
  ecfg.dimension = 48;
  auto embedder = embed::make_provider(ecfg);
  EmbeddingMatrix e_pri;
  {
    std::vector<std::string> texts;
    for (const auto& s : data.samples()) texts.push_back(s.text());
    e_pri = embedder->embed_batch(texts);
  }

  LlmConfig lcfg;
  genapi::MockLlmBackend llm(lcfg);
  RunConfig cfg = convergence_cfg(1);
  cfg.n_syn = 50;

  int strictly_more = 0;
  for (int trial = 0; trial < 100; ++trial) {
    // fresh candidate pool per trial
    cfg.seed = 5000 + trial;
    const auto candidates =
        genapi::random_api(200, std::nullopt, {}, cfg, llm, 0, 0);
    Population pool;
    pool.samples = candidates;
    const auto e_pool = embedder->embed_batch(pool.texts());

    auto hist = vote::nn_histogram(e_pool, e_pri);
    Rng noise_rng(StreamKey{cfg.seed, 0, 0, 0, StreamPurpose::kVoteNoise, 0});
    hist = vote::add_noise(std::move(hist), 2.0, noise_rng);
    hist = vote::to_probabilities(std::move(hist));

    const auto ranked = select::rank_select_indices(hist, 50);
    Rng sel_rng(StreamKey{cfg.seed, 0, 0, 0, StreamPurpose::kSelection, 0});
    const auto drawn = select::probability_select_indices(hist, 50, sel_rng);

    const std::size_t dr = std::set<std::size_t>(ranked.begin(), ranked.end()).size();
    const std::size_t dp = std::set<std::size_t>(drawn.begin(), drawn.end()).size();
    if (dr < dp) return false;  // must hold in every trial
    if (dr > dp) ++strictly_more;
  }
  std::printf("       rank strictly more distinct in %d/100 trials\n", strictly_more);
  return strictly_more >= 80;
}

// 7. One-sample convergence.
bool one_sample_convergence() {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    mockworld::MockUniverse universe;
    universe.seed = 900 + seed;
    const auto data = mockworld::sample_private_corpus(universe, 1,
                                                       std::vector<double>{1.0, 0.0, 0.0}, 120.0,
                                                       10.0);
    RunConfig cfg;
    cfg.n_syn = 1;
    cfg.big_l = 8;
    cfg.iterations = 10;
    cfg.sigma_override = 0.0;
    cfg.seed = seed;
    cfg.length_policy = {20.0, 10, 1.2, std::nullopt};
    cfg.random_max_token = 256;
    cfg.embedding.dimension = 64;

    auto llm = genapi::make_backend(cfg.llm);
    auto embedder = embed::make_provider(cfg.embedding);

    std::vector<double> distances;
    engine::RunOptions opts;
    opts.observer = [&](const engine::IterationInfo& info) {
      distances.push_back(
          mockworld::oracle_distance(info.selected.samples[0], data, *embedder));
    };
    engine::run(cfg, data, *llm, *embedder, opts);
    if (distances.back() <= 0.5 * distances.front()) ++wins;
  }
  std::printf("       distance halved in %d/10 seeds\n", wins);
  return wins >= 9;
}

// 8. Adaptive length targeting in the mock world.
bool adaptive_length() {
  mockworld::MockUniverse universe;
  universe.seed = 555;
  const auto data = mockworld::sample_private_corpus(universe, 600,
                                                     std::vector<double>{0.5, 0.3, 0.2}, 120.0,
                                                     30.0);
  RunConfig cfg = convergence_cfg(3);
  cfg.n_syn = 40;
  cfg.big_l = 4;
  cfg.iterations = 5;
  cfg.length_policy = {20.0, 10, 1.2, std::nullopt};

  auto llm = genapi::make_backend(cfg.llm);
  auto embedder = embed::make_provider(cfg.embedding);
  const Population out = engine::run(cfg, data, *llm, *embedder, {});

  double mean = 0.0;
  std::size_t min_words = SIZE_MAX;
  for (const auto& s : out.samples) {
    mean += static_cast<double>(s.word_count());
    min_words = std::min(min_words, s.word_count());
  }
  mean /= static_cast<double>(out.size());
  std::printf("       synthetic mean word count %.1f (target 120 +/- 15%%), min %zu\n", mean,
              min_words);
  return std::abs(mean - 120.0) <= 0.15 * 120.0 && min_words >= 10;
}

// 9. Determinism and wire format.
bool determinism_and_wire_format() {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "augpe_acceptance";
  fs::remove_all(base);
  fs::create_directories(base);

  RunConfig cfg;
  cfg.n_syn = 4;
  cfg.big_l = 2;
  cfg.iterations = 3;
  cfg.sigma_override = 1.0;
  cfg.seed = 42;
  cfg.length_policy = {10.0, 5, 1.3, std::nullopt};
  cfg.llm.vocab_size = 400;
  cfg.embedding.dimension = 32;

  mockworld::MockUniverse universe;
  universe.vocab_size = 400;
  universe.seed = 4;
  const auto data = mockworld::sample_private_corpus(universe, 100,
                                                     std::vector<double>{0.6, 0.2, 0.2}, 50.0,
                                                     10.0);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  };

  for (const char* name : {"a", "b"}) {
    auto llm = genapi::make_backend(cfg.llm);
    auto embedder = embed::make_provider(cfg.embedding);
    engine::RunOptions opts;
    opts.run_dir = base / name;
    engine::run(cfg, data, *llm, *embedder, opts);
  }
  for (const char* file : {"synthetic.jsonl", "iter_0000.json", "iter_0001.json",
                           "iter_0002.json", "manifest.json"}) {
    if (slurp(base / "a" / file) != slurp(base / "b" / file)) {
      std::printf("       mismatch in %s\n", file);
      return false;
    }
  }

  // golden chat-completion request body, byte for byte
  const std::string body = genapi::chat_request_body(
      "gpt-3.5-turbo", "Please rephrase the below sentences:\nhello", 1.4, 128);
  std::ifstream golden(std::string(AUGPE_TEST_DIR) + "/golden/chat_request.json");
  if (!golden.good()) {
    std::printf("       golden fixture missing\n");
    return false;
  }
  std::string expected{std::istreambuf_iterator<char>(golden),
                       std::istreambuf_iterator<char>()};
  while (!expected.empty() && (expected.back() == '\n' || expected.back() == '\r'))
    expected.pop_back();
  if (body != expected) {
    std::printf("       wire body differs from fixture\n");
    return false;
  }
  return true;
}

}  // namespace

int main() {
  std::printf("augpe acceptance suite\n");
  criterion(1, "privacy calibration reproduces published noise multipliers",
            calibration_vs_published);
  criterion(2, "accountant matches integration oracle; composition identity",
            accountant_oracle_equivalence);
  criterion(3, "vote histogram sensitivity is exactly 1", sensitivity_invariant);
  criterion(4, "nn voting matches brute-force tally", voting_oracle);
  criterion(5, "mock-world FID convergence (noiseless and eps=4)", fid_convergence);
  criterion(6, "rank selection beats probability resampling on distinct count",
            rank_vs_probability);
  criterion(7, "one-private-sample convergence", one_sample_convergence);
  criterion(8, "adaptive text length converges to the private mean", adaptive_length);
  criterion(9, "bitwise determinism and golden wire format", determinism_and_wire_format);

  if (g_failures == 0)
    std::printf("all 9 criteria passed\n");
  else
    std::printf("%d criteria FAILED\n", g_failures);
  return g_failures;
}
