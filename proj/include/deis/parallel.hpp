// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace deis {

/// Trajectories are processed in fixed-size chunks so that any reduction
/// done per chunk is independent of the thread count.
inline constexpr std::size_t kTrajectoryChunk = 64;

/// Runs fn(begin, end) over [0, n) in chunks of `chunk`, on up to `threads`
/// workers (0 = hardware concurrency). Exceptions from workers are rethrown
/// on the caller, lowest chunk first.
void parallel_chunks(std::size_t n, std::size_t chunk, int threads,
                     const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace deis
