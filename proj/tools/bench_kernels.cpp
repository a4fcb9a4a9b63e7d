// Compares the OpenMP kernels against their serial references and reports
// speedups. Also cross-checks that both flavors produce identical results.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include <omp.h>

#include "augpe/kernels.hpp"
#include "augpe/rng.hpp"

using augpe::EmbeddingMatrix;
using augpe::Rng;

namespace {

EmbeddingMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  EmbeddingMatrix m(rows, cols);
  Rng rng(seed);
  for (auto& v : m.data()) v = rng.gaussian();
  return m;
}

double time_of(const std::function<void()>& fn, int repeats) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void report(const std::string& name, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-28s serial %9.2f ms   omp %9.2f ms   speedup %5.2fx   results %s\n",
              name.c_str(), serial_ms, parallel_ms, serial_ms / parallel_ms,
              identical ? "identical" : "DIFFER");
}

}  // namespace

int main() {
  std::printf("augpe kernel benchmark (%d OpenMP threads)\n\n", omp_get_max_threads());

  {
    const auto queries = random_matrix(20000, 64, 1);
    const auto keys = random_matrix(400, 64, 2);
    const auto serial = augpe::kernels::nearest_key_serial(queries, keys);
    const auto parallel = augpe::kernels::nearest_key_omp(queries, keys);
    report("nearest_key 20000x400x64",
           time_of([&] { augpe::kernels::nearest_key_serial(queries, keys); }, 3),
           time_of([&] { augpe::kernels::nearest_key_omp(queries, keys); }, 3),
           serial == parallel);
  }
  {
    const auto queries = random_matrix(20000, 64, 3);
    const auto keys = random_matrix(400, 64, 4);
    const auto serial = augpe::kernels::nearest_tally_serial(queries, keys);
    const auto parallel = augpe::kernels::nearest_tally_omp(queries, keys);
    report("nearest_tally 20000x400x64",
           time_of([&] { augpe::kernels::nearest_tally_serial(queries, keys); }, 3),
           time_of([&] { augpe::kernels::nearest_tally_omp(queries, keys); }, 3),
           serial == parallel);
  }
  {
    const auto m = random_matrix(20000, 128, 5);
    const auto mu_s = augpe::kernels::col_mean_serial(m);
    const auto mu_p = augpe::kernels::col_mean_omp(m);
    const auto cov_s = augpe::kernels::covariance_serial(m, mu_s);
    const auto cov_p = augpe::kernels::covariance_omp(m, mu_p);
    report("covariance 20000x128",
           time_of([&] { augpe::kernels::covariance_serial(m, mu_s); }, 3),
           time_of([&] { augpe::kernels::covariance_omp(m, mu_s); }, 3),
           mu_s == mu_p && cov_s.data() == cov_p.data());
  }
  return 0;
}
