#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace koalition {

/// Worker count for the Monte-Carlo loops. 0 means "use the default":
/// $KOALITION_THREADS if set, otherwise the hardware concurrency.
struct Parallelism {
  unsigned threads = 0;

  unsigned resolve() const {
    if (threads > 0) return threads;
    if (const char* env = std::getenv("KOALITION_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
  }
};

inline constexpr std::size_t kDrawChunk = 4096;

inline std::size_t chunk_count(std::size_t n) { return (n + kDrawChunk - 1) / kDrawChunk; }

/// Splits [0, n) into contiguous chunks and calls body(chunk, begin, end) on
/// worker threads. Chunk boundaries depend on n only, never on the worker
/// count, so per-chunk partial results merge identically on any machine.
template <typename Body>
void parallel_chunks(std::size_t n, Parallelism par, Body&& body) {
  const std::size_t chunks = chunk_count(n);
  const std::size_t workers = std::min<std::size_t>(par.resolve(), chunks);
  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * kDrawChunk;
    body(c, begin, std::min(n, begin + kDrawChunk));
  };
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t c = w; c < chunks; c += workers) run_chunk(c);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace koalition
