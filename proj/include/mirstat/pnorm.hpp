#pragma once

#include <cstdint>
#include <span>

#include "mirstat/index.hpp"
#include "mirstat/kernels.hpp"
#include "mirstat/query.hpp"

namespace mirstat {

// Extended Boolean (p-norm) soft operators. doc_weights are the document's
// normalized term weights in [0, 1]; query_weights are in (0, 1]; p >= 1.

/// 1 - [ sum (1 - wd_i)^p wq_i^p / sum wq_i^p ]^(1/p)
double eval_and(std::span<const double> doc_weights, std::span<const double> query_weights, double p);

/// [ sum wd_i^p wq_i^p / sum wq_i^p ]^(1/p)
double eval_or(std::span<const double> doc_weights, std::span<const double> query_weights, double p);

/// Recursive evaluation: terms yield doc_term_weight, groups apply the soft
/// operator over child scores. Term children use their own weight, nested
/// groups weigh 1. Unindexed terms contribute 0.
double score_pnorm(const InvertedIndex& index, const QueryNode& query, std::uint32_t doc);
double score_pnorm(const InvertedIndex& index, const QueryNode& query, std::string_view doc_id);

/// Top-k by score_pnorm, zero scores omitted.
RankedList rank_pnorm(const InvertedIndex& index, const QueryNode& query, std::size_t k,
                      Execution exec = Execution::parallel);

/// Ordinals of documents containing at least one query term, ascending.
/// Every other document scores exactly 0.
std::vector<std::uint32_t> candidate_docs(const InvertedIndex& index, const QueryNode& query);

}  // namespace mirstat
