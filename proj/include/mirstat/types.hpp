#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mirstat {

using Term = std::string;
using DocId = std::string;

/// Term -> occurrence count. Ordered so iteration and serialization are deterministic.
using TermCounts = std::map<Term, std::uint32_t>;

/// Term -> real weight (query vectors, document weight vectors).
using TermWeights = std::map<Term, double>;

struct ScoredDoc {
  DocId doc_id;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

/// Descending score, ties by ascending doc id.
using RankedList = std::vector<ScoredDoc>;

/// Sort by the ranking rule, drop non-positive scores and keep the first k.
RankedList finalize_ranking(std::vector<ScoredDoc> scored, std::size_t k);

}  // namespace mirstat
