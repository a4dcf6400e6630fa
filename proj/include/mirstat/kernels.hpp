#pragma once

// Data-parallel loops shared by the rankers and the ingestion pipeline.
// Every kernel has a serial reference next to its OpenMP twin; tests assert
// the two produce identical output and bench/ compares their speed.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mirstat/types.hpp"

namespace mirstat {

enum class Execution { serial, parallel };

namespace kernels {

/// score(i) for every i in [0, n). Each slot is written by exactly one
/// iteration so the parallel result is bit-identical to the serial one.
std::vector<double> map_scores_serial(std::size_t n, const std::function<double(std::size_t)>& score);
std::vector<double> map_scores_omp(std::size_t n, const std::function<double(std::size_t)>& score);

inline std::vector<double> map_scores(Execution exec, std::size_t n,
                                      const std::function<double(std::size_t)>& score) {
  return exec == Execution::parallel ? map_scores_omp(n, score) : map_scores_serial(n, score);
}

/// Count terms of each segment independently, then merge in segment order.
TermCounts count_segments_serial(std::span<const std::string_view> segments,
                                 const std::function<TermCounts(std::string_view)>& count);
TermCounts count_segments_omp(std::span<const std::string_view> segments,
                              const std::function<TermCounts(std::string_view)>& count);

/// body(i) for every i in [0, n); iterations must touch disjoint state.
void for_each_index_serial(std::size_t n, const std::function<void(std::size_t)>& body);
void for_each_index_omp(std::size_t n, const std::function<void(std::size_t)>& body);

inline void for_each_index(Execution exec, std::size_t n, const std::function<void(std::size_t)>& body) {
  exec == Execution::parallel ? for_each_index_omp(n, body) : for_each_index_serial(n, body);
}

int max_threads() noexcept;

}  // namespace kernels
}  // namespace mirstat
