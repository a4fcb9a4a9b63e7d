#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "augpe/core.hpp"

namespace augpe::kernels {

// Data-parallel inner loops, each in an OpenMP flavor (used by the library)
// and a serial flavor (reference for tests and the benchmark tool). Both
// flavors run identical per-element code, so results are bitwise equal and
// independent of the thread count.

/// For each query row, the index of the key row with minimal squared L2
/// distance; ties resolved to the lowest index. Exact brute force.
std::vector<std::size_t> nearest_key_omp(const EmbeddingMatrix& queries,
                                         const EmbeddingMatrix& keys);
std::vector<std::size_t> nearest_key_serial(const EmbeddingMatrix& queries,
                                            const EmbeddingMatrix& keys);

/// Vote tally: counts[i] = number of query rows whose nearest key is i.
/// The parallel flavor merges per-thread tallies in thread-index order.
std::vector<std::uint64_t> nearest_tally_omp(const EmbeddingMatrix& queries,
                                             const EmbeddingMatrix& keys);
std::vector<std::uint64_t> nearest_tally_serial(const EmbeddingMatrix& queries,
                                                const EmbeddingMatrix& keys);

/// Column means of an (n, d) matrix. Parallel over columns.
std::vector<double> col_mean_omp(const EmbeddingMatrix& m);
std::vector<double> col_mean_serial(const EmbeddingMatrix& m);

/// Sample covariance (divides by n - 1) of an (n, d) matrix given its column
/// means. Parallel over the d*d output entries; each entry is a serial sum
/// over rows, so the result does not depend on scheduling.
EmbeddingMatrix covariance_omp(const EmbeddingMatrix& m, std::span<const double> mean);
EmbeddingMatrix covariance_serial(const EmbeddingMatrix& m, std::span<const double> mean);

double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace augpe::kernels
