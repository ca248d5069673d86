#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace berman {

/// Replications are grouped into fixed-size chunks keyed by chunk index. The
/// chunk size is part of the reproducibility contract only in the sense that
/// reductions run in chunk order; draws themselves are keyed per row.
inline constexpr std::size_t kChunkRows = 4096;

/// Worker count: explicit request if > 0, else $BERMAN_SCALE_WORKERS, else the
/// hardware concurrency (at least 1).
unsigned resolve_workers(int requested = 0);

/// Runs fn(chunk) for every chunk in [0, n_chunks) on up to `workers` threads.
/// The first exception thrown by any chunk is rethrown on the caller.
template <class F>
void parallel_chunks(std::size_t n_chunks, unsigned workers, F&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n_chunks, 1))));
  if (workers == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        fn(c);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_chunks);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline std::size_t chunk_count(std::size_t rows) { return (rows + kChunkRows - 1) / kChunkRows; }

struct IntegerMoments {
  std::int64_t sum = 0;
  std::int64_t sum_sq = 0;
};

/// Σ k(r) and Σ k(r)² over rows [0, rows). Integer arithmetic makes the result
/// independent of how chunks are scheduled.
template <class RowFn>
IntegerMoments sum_rows(std::size_t rows, unsigned workers, RowFn&& row) {
  const std::size_t chunks = chunk_count(rows);
  std::vector<IntegerMoments> partial(chunks);
  parallel_chunks(chunks, workers, [&](std::size_t c) {
    const std::size_t r0 = c * kChunkRows;
    const std::size_t r1 = std::min(rows, r0 + kChunkRows);
    IntegerMoments m;
    for (std::size_t r = r0; r < r1; ++r) {
      const std::int64_t k = row(r);
      m.sum += k;
      m.sum_sq += k * k;
    }
    partial[c] = m;
  });
  IntegerMoments total;
  for (const auto& m : partial) {
    total.sum += m.sum;
    total.sum_sq += m.sum_sq;
  }
  return total;
}

}  // namespace berman
