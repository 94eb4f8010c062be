#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace nudg::parallel {

/// Splits [0, n) into `chunks` contiguous ranges and runs fn(lo, hi, acc) on
/// each, one thread per chunk. The partition depends only on (n, chunks), so
/// reducing the returned accumulators in order is deterministic.
template <class Acc, class Fn>
std::vector<Acc> chunked(std::size_t n, std::size_t chunks, Fn&& fn) {
  chunks = std::clamp<std::size_t>(chunks, 1, std::max<std::size_t>(n, 1));
  std::vector<Acc> parts(chunks);
  auto bound = [&](std::size_t c) { return n * c / chunks; };
  if (chunks == 1) {
    fn(std::size_t{0}, n, parts[0]);
    return parts;
  }
  {
    std::vector<std::jthread> workers;
    workers.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
      workers.emplace_back([&, c] { fn(bound(c), bound(c + 1), parts[c]); });
    }
  }
  return parts;
}

}  // namespace nudg::parallel
