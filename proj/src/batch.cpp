// SPDX-License-Identifier: Apache-2.0
#include "deis/batch.hpp"

#include <random>

namespace deis {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index,
                          RngPurpose purpose) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  return splitmix64(h ^ index);
}

Batch standard_normal_batch(std::size_t rows, std::size_t dim,
                            std::uint64_t seed, RngPurpose purpose) {
  Batch out(rows, dim);
  for (std::size_t i = 0; i < rows; ++i) {
    std::mt19937_64 rng(stream_seed(seed, i, purpose));
    std::normal_distribution<double> normal;
    for (double& v : out.row(i)) v = normal(rng);
  }
  return out;
}

}  // namespace deis
