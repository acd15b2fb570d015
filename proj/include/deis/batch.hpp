// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace deis {

/// Row-major batch of trajectories: `rows` vectors of length `dim`.
struct Batch {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> data;

  Batch() = default;
  Batch(std::size_t rows_, std::size_t dim_)
      : rows(rows_), dim(dim_), data(rows_ * dim_, 0.0) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * dim, dim}; }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * dim, dim};
  }
};

/// Purpose tags keep independent random streams apart for a shared seed.
enum class RngPurpose : std::uint64_t {
  kInitialNoise = 1,
  kMixtureDraw = 2,
  kProjection = 3,
};

/// Seed for the stream keyed by (seed, index, purpose); streams for different
/// keys are independent of evaluation order and thread count.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index,
                          RngPurpose purpose);

/// Batch of N(0, I) draws; row i comes from stream (seed, i, purpose).
Batch standard_normal_batch(std::size_t rows, std::size_t dim,
                            std::uint64_t seed,
                            RngPurpose purpose = RngPurpose::kInitialNoise);

}  // namespace deis
