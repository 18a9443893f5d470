#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "ldcluster/random.hpp"

namespace ldc {

/// How a replicated computation is cut into blocks. Block b always draws from
/// derive_stream(seed, stream_base + b), so results do not depend on `workers`.
struct ReplicationPlan {
  std::uint64_t seed = 0;
  std::uint64_t stream_base = 0;
  int workers = 1;
  std::int64_t block_size = 4096;

  std::int64_t block_count(std::int64_t total) const { return (total + block_size - 1) / block_size; }
  std::int64_t block_length(std::int64_t total, std::int64_t b) const {
    return std::min(block_size, total - b * block_size);
  }
  RandomStream stream(std::int64_t b) const { return derive_stream(seed, stream_base + static_cast<std::uint64_t>(b)); }
};

/// Evaluates fn(b) for b in [0, n_blocks) on up to `workers` threads and
/// returns the results indexed by block. The first exception is rethrown.
template <class Fn>
auto run_blocks(std::int64_t n_blocks, int workers, Fn&& fn) -> std::vector<decltype(fn(std::int64_t{}))> {
  using Partial = decltype(fn(std::int64_t{}));
  std::vector<Partial> out(static_cast<std::size_t>(std::max<std::int64_t>(n_blocks, 0)));
  const int n_threads = static_cast<int>(std::clamp<std::int64_t>(workers, 1, std::max<std::int64_t>(n_blocks, 1)));
  if (n_threads == 1) {
    for (std::int64_t b = 0; b < n_blocks; ++b) out[static_cast<std::size_t>(b)] = fn(b);
    return out;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::int64_t b = next++; b < n_blocks; b = next++) {
      try {
        out[static_cast<std::size_t>(b)] = fn(b);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n_blocks;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace ldc
