#include "mirstat/kernels.hpp"

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mirstat::kernels {

std::vector<double> map_scores_serial(std::size_t n, const std::function<double(std::size_t)>& score) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = score(i);
  return out;
}

std::vector<double> map_scores_omp(std::size_t n, const std::function<double(std::size_t)>& score) {
  std::vector<double> out(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = score(static_cast<std::size_t>(i));
  return out;
}

void for_each_index_serial(std::size_t n, const std::function<void(std::size_t)>& body) {
  for (std::size_t i = 0; i < n; ++i) body(i);
}

void for_each_index_omp(std::size_t n, const std::function<void(std::size_t)>& body) {
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
}

namespace {

void merge_into(TermCounts& total, const TermCounts& part) {
  for (const auto& [term, n] : part) total[term] += n;
}

}  // namespace

TermCounts count_segments_serial(std::span<const std::string_view> segments,
                                 const std::function<TermCounts(std::string_view)>& count) {
  TermCounts total;
  for (auto seg : segments) merge_into(total, count(seg));
  return total;
}

TermCounts count_segments_omp(std::span<const std::string_view> segments,
                              const std::function<TermCounts(std::string_view)>& count) {
  std::vector<TermCounts> partial(segments.size());
  const auto n = static_cast<std::int64_t>(segments.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    partial[static_cast<std::size_t>(i)] = count(segments[static_cast<std::size_t>(i)]);
  }
  // Addition is order-independent; merging in segment order keeps it obvious.
  TermCounts total;
  for (const auto& part : partial) merge_into(total, part);
  return total;
}

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace mirstat::kernels
