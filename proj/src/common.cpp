#include <algorithm>
#include <cmath>

#include "mirstat/error.hpp"
#include "mirstat/types.hpp"

namespace mirstat {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::syntax: return "syntax";
    case Errc::range: return "range";
    case Errc::not_found: return "not_found";
    case Errc::io: return "io";
    case Errc::parse: return "parse";
    case Errc::version: return "version";
    case Errc::degenerate: return "degenerate";
    case Errc::not_a_dag: return "not_a_dag";
  }
  return "unknown";
}

RankedList finalize_ranking(std::vector<ScoredDoc> scored, std::size_t k) {
  std::erase_if(scored, [](const ScoredDoc& s) { return !(s.score > 0.0); });
  auto before = [](const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  };
  if (scored.size() > k) {
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(), before);
    scored.resize(k);
  } else {
    std::sort(scored.begin(), scored.end(), before);
  }
  return scored;
}

}  // namespace mirstat
