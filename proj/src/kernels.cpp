#include "augpe/kernels.hpp"

#include <omp.h>

#include <limits>

namespace augpe::kernels {

namespace {

void check_shapes(const EmbeddingMatrix& queries, const EmbeddingMatrix& keys) {
  if (keys.empty()) throw DomainError("nearest_key: keys must be non-empty");
  if (queries.cols() != keys.cols())
    throw DomainError("nearest_key: dimension mismatch (" + std::to_string(queries.cols()) +
                      " vs " + std::to_string(keys.cols()) + ")");
}

std::size_t nearest_one(const double* q, const EmbeddingMatrix& keys) {
  const std::size_t d = keys.cols();
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < keys.rows(); ++j) {
    const double* k = keys.row(j);
    double dist = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = q[c] - k[c];
      dist += diff * diff;
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = j;
    }
  }
  return best;
}

}  // namespace

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double dist = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double diff = a[c] - b[c];
    dist += diff * diff;
  }
  return dist;
}

std::vector<std::size_t> nearest_key_omp(const EmbeddingMatrix& queries,
                                         const EmbeddingMatrix& keys) {
  check_shapes(queries, keys);
  std::vector<std::size_t> out(queries.rows());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    out[i] = nearest_one(queries.row(i), keys);
  }
  return out;
}

std::vector<std::size_t> nearest_key_serial(const EmbeddingMatrix& queries,
                                            const EmbeddingMatrix& keys) {
  check_shapes(queries, keys);
  std::vector<std::size_t> out(queries.rows());
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    out[i] = nearest_one(queries.row(i), keys);
  }
  return out;
}

std::vector<std::uint64_t> nearest_tally_omp(const EmbeddingMatrix& queries,
                                             const EmbeddingMatrix& keys) {
  check_shapes(queries, keys);
  const std::size_t n_keys = keys.rows();
  std::vector<std::vector<std::uint64_t>> local;
#pragma omp parallel
  {
    const int nt = omp_get_num_threads();
    const int tid = omp_get_thread_num();
#pragma omp single
    local.assign(nt, std::vector<std::uint64_t>(n_keys, 0));
    std::vector<std::uint64_t>& mine = local[tid];
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < queries.rows(); ++i) {
      ++mine[nearest_one(queries.row(i), keys)];
    }
  }
  std::vector<std::uint64_t> counts(n_keys, 0);
  for (const auto& t : local)
    for (std::size_t j = 0; j < n_keys; ++j) counts[j] += t[j];
  return counts;
}

std::vector<std::uint64_t> nearest_tally_serial(const EmbeddingMatrix& queries,
                                                const EmbeddingMatrix& keys) {
  check_shapes(queries, keys);
  std::vector<std::uint64_t> counts(keys.rows(), 0);
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    ++counts[nearest_one(queries.row(i), keys)];
  }
  return counts;
}

std::vector<double> col_mean_omp(const EmbeddingMatrix& m) {
  if (m.rows() == 0) throw DomainError("col_mean: empty matrix");
  std::vector<double> mu(m.cols(), 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) acc += m.at(i, j);
    mu[j] = acc / static_cast<double>(m.rows());
  }
  return mu;
}

std::vector<double> col_mean_serial(const EmbeddingMatrix& m) {
  if (m.rows() == 0) throw DomainError("col_mean: empty matrix");
  std::vector<double> mu(m.cols(), 0.0);
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) acc += m.at(i, j);
    mu[j] = acc / static_cast<double>(m.rows());
  }
  return mu;
}

namespace {

double cov_entry(const EmbeddingMatrix& m, std::span<const double> mean, std::size_t j,
                 std::size_t k) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    acc += (m.at(i, j) - mean[j]) * (m.at(i, k) - mean[k]);
  return acc / static_cast<double>(m.rows() - 1);
}

}  // namespace

EmbeddingMatrix covariance_omp(const EmbeddingMatrix& m, std::span<const double> mean) {
  if (m.rows() < 2) throw DomainError("covariance: need at least 2 rows");
  if (mean.size() != m.cols()) throw DomainError("covariance: mean size mismatch");
  const std::size_t d = m.cols();
  EmbeddingMatrix cov(d, d);
#pragma omp parallel for schedule(static)
  for (std::size_t f = 0; f < d * d; ++f) {
    const std::size_t j = f / d;
    const std::size_t k = f % d;
    if (k < j) continue;  // symmetric; fill upper triangle and mirror below
    cov.at(j, k) = cov_entry(m, mean, j, k);
  }
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = 0; k < j; ++k) cov.at(j, k) = cov.at(k, j);
  return cov;
}

EmbeddingMatrix covariance_serial(const EmbeddingMatrix& m, std::span<const double> mean) {
  if (m.rows() < 2) throw DomainError("covariance: need at least 2 rows");
  if (mean.size() != m.cols()) throw DomainError("covariance: mean size mismatch");
  const std::size_t d = m.cols();
  EmbeddingMatrix cov(d, d);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = j; k < d; ++k) cov.at(j, k) = cov_entry(m, mean, j, k);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = 0; k < j; ++k) cov.at(j, k) = cov.at(k, j);
  return cov;
}

}  // namespace augpe::kernels
