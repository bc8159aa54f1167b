#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace vpflow {

/// Worker count: min(hardware, VPFLOW_THREADS) with a fallback of 1.
int worker_count();

/// Runs fn(block) for block = 0..n_blocks-1 across workers. The block
/// decomposition is fixed by the caller, never by the worker count, so any
/// reduction done per block and combined serially afterwards is bit-identical
/// for every thread configuration.
void parallel_blocks(std::size_t n_blocks, const std::function<void(std::size_t)>& fn);

/// Splits [0, n) into fixed-size chunks (independent of worker count), runs
/// fn(begin, end, chunk_index), with chunk_index < n_chunks(n, chunk).
void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

inline std::size_t n_chunks(std::size_t n, std::size_t chunk) { return (n + chunk - 1) / chunk; }

}  // namespace vpflow
