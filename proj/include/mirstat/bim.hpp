#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "mirstat/index.hpp"
#include "mirstat/kernels.hpp"

namespace mirstat {

/// Judged-relevant documents. N comes from the index.
struct RelevanceJudgments {
  std::set<DocId> relevant;
  std::uint32_t N = 0;

  std::uint32_t R() const noexcept { return static_cast<std::uint32_t>(relevant.size()); }
};

/// n = documents containing the term, r = relevant documents containing it.
struct TermRelevanceStats {
  Term term;
  std::uint32_t n = 0;
  std::uint32_t r = 0;
};

enum class Smoothing { raw, half };

struct RelevanceProbabilities {
  double p_rel = 0.0;     // P_k: term occurs in a relevant document
  double p_nonrel = 0.0;  // U_k: term occurs in a non-relevant document
};

struct TermWeight {
  double p_rel = 0.0;
  double p_nonrel = 0.0;
  double rel_odds = 0.0;     // X = P_k / (1 - P_k)
  double nonrel_odds = 0.0;  // Y = U_k / (1 - U_k)
  double odds_ratio = 0.0;   // W_k = X / Y
  double log_weight = 0.0;   // ln W_k
};

/// raw:  P_k = r/R,             U_k = (n-r)/(N-R)
/// half: P_k = (r+0.5)/(R+1),   U_k = (n-r+0.5)/(N-R+1)
RelevanceProbabilities estimate(const TermRelevanceStats& stats, const RelevanceJudgments& judgments,
                                Smoothing smoothing);

/// Requires P_k in [0, 1) and U_k in (0, 1]; otherwise the odds are infinite.
TermWeight term_weight(double p_rel, double p_nonrel);

/// Stats for one term, with r counted from the judged set.
TermRelevanceStats relevance_stats(const InvertedIndex& index, const Term& term, const RelevanceJudgments& judgments);

/// score(d) = sum of log weights of the (distinct) query terms present in d;
/// documents with score <= 0 are omitted.
RankedList rank_bim(const InvertedIndex& index, const std::vector<Term>& query_terms,
                    const RelevanceJudgments& judgments, Smoothing smoothing, std::size_t k = SIZE_MAX,
                    Execution exec = Execution::parallel);

/// Builds judgments against the index, rejecting unknown document ids.
RelevanceJudgments make_judgments(const InvertedIndex& index, const std::set<DocId>& relevant);

}  // namespace mirstat
