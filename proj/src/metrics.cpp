#include "augpe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "augpe/kernels.hpp"

namespace augpe::metrics {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd to_eigen(const EmbeddingMatrix& m) {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(m.data().data(), m.rows(), m.cols());
}

/// PSD square root with eigenvalue clamping at zero.
MatrixXd psd_sqrt(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()));
  VectorXd vals = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

LengthStats length_stats(const Population& population) {
  LengthStats out;
  if (population.samples.empty()) return out;
  std::vector<double> lens;
  lens.reserve(population.size());
  double total = 0.0;
  for (const auto& s : population.samples) {
    lens.push_back(static_cast<double>(s.word_count()));
    total += lens.back();
  }
  std::sort(lens.begin(), lens.end());
  out.mean = total / static_cast<double>(lens.size());
  out.median = lens[lens.size() / 2];
  out.p95 = lens[std::min(lens.size() - 1,
                          static_cast<std::size_t>(0.95 * static_cast<double>(lens.size())))];
  return out;
}

double fid(const EmbeddingMatrix& e_a, const EmbeddingMatrix& e_b) {
  if (e_a.cols() != e_b.cols()) throw DomainError("fid: dimension mismatch");
  const std::size_t d = e_a.cols();

  const std::vector<double> mu_a = kernels::col_mean_omp(e_a);
  const std::vector<double> mu_b = kernels::col_mean_omp(e_b);
  EmbeddingMatrix cov_a = kernels::covariance_omp(e_a, mu_a);
  EmbeddingMatrix cov_b = kernels::covariance_omp(e_b, mu_b);
  for (std::size_t j = 0; j < d; ++j) {
    cov_a.at(j, j) += 1e-6;
    cov_b.at(j, j) += 1e-6;
  }

  double mean_term = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double diff = mu_a[j] - mu_b[j];
    mean_term += diff * diff;
  }

  const MatrixXd sa = to_eigen(cov_a);
  const MatrixXd sb = to_eigen(cov_b);
  const MatrixXd root_a = psd_sqrt(sa);
  const MatrixXd inner = root_a * sb * root_a;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (inner + inner.transpose()));
  const double trace_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

  const double value = mean_term + sa.trace() + sb.trace() - 2.0 * trace_sqrt;
  return std::max(0.0, value);
}

std::tuple<double, double, double> precision_recall_f1(const EmbeddingMatrix& e_real,
                                                       const EmbeddingMatrix& e_syn,
                                                       std::uint32_t k) {
  if (e_real.cols() != e_syn.cols()) throw DomainError("precision_recall_f1: dimension mismatch");
  if (k < 1) throw DomainError("precision_recall_f1: k must be >= 1");
  if (e_real.rows() <= k || e_syn.rows() <= k)
    throw DomainError("precision_recall_f1: both sets must be larger than k");

  // Squared radius of the k-th nearest neighbor within one set (self excluded).
  auto knn_radii = [k](const EmbeddingMatrix& m) {
    std::vector<double> radii(m.rows());
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < m.rows(); ++i) {
      std::vector<double> dists;
      dists.reserve(m.rows() - 1);
      for (std::size_t j = 0; j < m.rows(); ++j) {
        if (j == i) continue;
        dists.push_back(kernels::squared_distance(m.row_span(i), m.row_span(j)));
      }
      std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
      radii[i] = dists[k - 1];
    }
    return radii;
  };

  // Fraction of `points` lying within some reference point's radius.
  auto coverage = [](const EmbeddingMatrix& points, const EmbeddingMatrix& reference,
                     const std::vector<double>& radii) {
    std::size_t covered = 0;
#pragma omp parallel for schedule(static) reduction(+ : covered)
    for (std::size_t i = 0; i < points.rows(); ++i) {
      for (std::size_t j = 0; j < reference.rows(); ++j) {
        if (kernels::squared_distance(points.row_span(i), reference.row_span(j)) <= radii[j]) {
          ++covered;
          break;
        }
      }
    }
    return static_cast<double>(covered) / static_cast<double>(points.rows());
  };

  const double precision = coverage(e_syn, e_real, knn_radii(e_real));
  const double recall = coverage(e_real, e_syn, knn_radii(e_syn));
  const double f1 = (precision > 0.0 && recall > 0.0)
                        ? 2.0 * precision * recall / (precision + recall)
                        : 0.0;
  return {precision, recall, f1};
}

std::pair<double, double> kl_tv_divergence(const EmbeddingMatrix& e_real,
                                           const EmbeddingMatrix& e_syn, std::uint32_t n_clusters,
                                           Rng& rng) {
  if (e_real.cols() != e_syn.cols()) throw DomainError("kl_tv_divergence: dimension mismatch");
  if (n_clusters < 1) throw DomainError("kl_tv_divergence: n_clusters must be >= 1");
  const std::size_t n_real = e_real.rows();
  const std::size_t n_syn = e_syn.rows();
  const std::size_t n = n_real + n_syn;
  if (n < n_clusters) throw DomainError("kl_tv_divergence: fewer points than clusters");
  const std::size_t d = e_real.cols();

  EmbeddingMatrix all(n, d);
  std::copy(e_real.data().begin(), e_real.data().end(), all.data().begin());
  std::copy(e_syn.data().begin(), e_syn.data().end(), all.data().begin() + n_real * d);

  // Greedy seeded init: next center maximizes expected spread (kmeans++).
  EmbeddingMatrix centers(n_clusters, d);
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  {
    const std::size_t first = rng.uniform_int(n);
    std::copy(all.row(first), all.row(first) + d, centers.row(0));
    for (std::uint32_t c = 1; c < n_clusters; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        min_dist[i] = std::min(min_dist[i], kernels::squared_distance(
                                                all.row_span(i), centers.row_span(c - 1)));
        total += min_dist[i];
      }
      std::size_t pick = n - 1;
      if (total > 0.0) {
        double u = rng.uniform() * total;
        for (std::size_t i = 0; i < n; ++i) {
          if (u < min_dist[i]) {
            pick = i;
            break;
          }
          u -= min_dist[i];
        }
      } else {
        pick = rng.uniform_int(n);
      }
      std::copy(all.row(pick), all.row(pick) + d, centers.row(c));
    }
  }

  std::vector<std::size_t> assignment(n, 0);
  for (int iter = 0; iter < 50; ++iter) {
    assignment = kernels::nearest_key_omp(all, centers);
    EmbeddingMatrix next(n_clusters, d);
    std::vector<std::size_t> sizes(n_clusters, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++sizes[assignment[i]];
      const double* src = all.row(i);
      double* dst = next.row(assignment[i]);
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
    for (std::uint32_t c = 0; c < n_clusters; ++c) {
      if (sizes[c] == 0) {
        std::copy(centers.row(c), centers.row(c) + d, next.row(c));  // keep empty cluster
      } else {
        double* dst = next.row(c);
        for (std::size_t j = 0; j < d; ++j) dst[j] /= static_cast<double>(sizes[c]);
      }
    }
    centers = std::move(next);
  }
  assignment = kernels::nearest_key_omp(all, centers);

  // Add-one smoothed assignment distributions per corpus.
  std::vector<double> p(n_clusters, 1.0), q(n_clusters, 1.0);
  for (std::size_t i = 0; i < n_real; ++i) p[assignment[i]] += 1.0;
  for (std::size_t i = n_real; i < n; ++i) q[assignment[i]] += 1.0;
  const double p_total = static_cast<double>(n_real + n_clusters);
  const double q_total = static_cast<double>(n_syn + n_clusters);

  double kl = 0.0;
  double tv = 0.0;
  for (std::uint32_t c = 0; c < n_clusters; ++c) {
    const double pc = p[c] / p_total;
    const double qc = q[c] / q_total;
    kl += pc * std::log(pc / qc);
    tv += std::abs(pc - qc);
  }
  return {std::max(0.0, kl), 0.5 * tv};
}

std::vector<std::pair<std::uint32_t, std::uint64_t>> length_histogram(const Population& population,
                                                                      std::uint32_t bin_width) {
  if (bin_width < 1) throw DomainError("length_histogram: bin_width must be >= 1");
  std::map<std::uint32_t, std::uint64_t> bins;
  for (const auto& s : population.samples) {
    const std::uint32_t start =
        static_cast<std::uint32_t>(s.word_count() / bin_width) * bin_width;
    ++bins[start];
  }
  return {bins.begin(), bins.end()};
}

}  // namespace augpe::metrics
