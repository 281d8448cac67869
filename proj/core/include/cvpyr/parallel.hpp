#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace cvpyr {

/// Runs body(row) for every row in [0, rows), split into contiguous blocks
/// across `threads` workers. Each row must only write its own outputs, so the
/// result does not depend on the thread count.
template <typename Body>
void parallel_rows(int rows, int threads, Body&& body) {
  threads = std::clamp(threads, 1, std::max(rows, 1));
  if (threads == 1) {
    for (int r = 0; r < rows; ++r) body(r);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(static_cast<std::size_t>(threads));
  const int block = (rows + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int begin = t * block;
    const int end = std::min(rows, begin + block);
    if (begin >= end) break;
    workers.emplace_back([begin, end, &body] {
      for (int r = begin; r < end; ++r) body(r);
    });
  }
}

}  // namespace cvpyr
