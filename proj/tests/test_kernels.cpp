#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "augpe/kernels.hpp"
#include "augpe/rng.hpp"

using namespace augpe;

namespace {

EmbeddingMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  EmbeddingMatrix m(rows, cols);
  Rng rng(seed);
  for (auto& v : m.data()) v = rng.gaussian();
  return m;
}

}  // namespace

TEST_CASE("parallel kernels are bitwise equal to their serial references") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Rng rng(seed + 100);
    const std::size_t nq = 1 + rng.uniform_int(300);
    const std::size_t nk = 1 + rng.uniform_int(80);
    const std::size_t d = 1 + rng.uniform_int(48);
    const auto q = random_matrix(nq, d, seed * 2 + 1);
    const auto k = random_matrix(nk, d, seed * 2 + 2);

    CHECK(kernels::nearest_key_omp(q, k) == kernels::nearest_key_serial(q, k));
    CHECK(kernels::nearest_tally_omp(q, k) == kernels::nearest_tally_serial(q, k));

    const auto mu_p = kernels::col_mean_omp(q);
    const auto mu_s = kernels::col_mean_serial(q);
    CHECK(mu_p == mu_s);
    if (nq >= 2) {
      CHECK(kernels::covariance_omp(q, mu_p).data() == kernels::covariance_serial(q, mu_s).data());
    }
  }
}

TEST_CASE("nearest_key breaks ties toward the lowest index") {
  EmbeddingMatrix keys(3, 2);
  keys.at(0, 0) = 1.0;
  keys.at(1, 0) = 1.0;  // duplicate of key 0
  keys.at(2, 0) = 5.0;
  EmbeddingMatrix q(1, 2);
  q.at(0, 0) = 1.0;
  CHECK(kernels::nearest_key_omp(q, keys) == std::vector<std::size_t>{0});
  CHECK(kernels::nearest_key_serial(q, keys) == std::vector<std::size_t>{0});
}

TEST_CASE("nearest_tally counts every query exactly once") {
  const auto q = random_matrix(157, 8, 5);
  const auto k = random_matrix(13, 8, 6);
  const auto tally = kernels::nearest_tally_omp(q, k);
  std::uint64_t total = 0;
  for (auto c : tally) total += c;
  CHECK(total == q.rows());
}

TEST_CASE("covariance is symmetric and matches the two-point formula") {
  EmbeddingMatrix m(2, 2);
  m.at(0, 0) = 0.0;
  m.at(0, 1) = 2.0;
  m.at(1, 0) = 4.0;
  m.at(1, 1) = 6.0;
  const auto mu = kernels::col_mean_serial(m);
  CHECK(mu[0] == doctest::Approx(2.0));
  CHECK(mu[1] == doctest::Approx(4.0));
  const auto cov = kernels::covariance_serial(m, mu);
  // single dof: cov = outer(diff, diff)/1 with diff = (2, 2)
  CHECK(cov.at(0, 0) == doctest::Approx(8.0));
  CHECK(cov.at(0, 1) == doctest::Approx(8.0));
  CHECK(cov.at(1, 0) == doctest::Approx(cov.at(0, 1)));

  CHECK_THROWS_AS(kernels::covariance_serial(random_matrix(1, 3, 7), std::vector<double>(3, 0.0)),
                  DomainError);
}

TEST_CASE("shape errors") {
  const auto q = random_matrix(3, 4, 8);
  const auto k = random_matrix(2, 5, 9);
  CHECK_THROWS_AS(kernels::nearest_key_omp(q, k), DomainError);
  CHECK_THROWS_AS(kernels::nearest_key_omp(q, EmbeddingMatrix{}), DomainError);
}
