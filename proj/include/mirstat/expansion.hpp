#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mirstat/index.hpp"
#include "mirstat/types.hpp"

namespace mirstat {

enum class QueryOrigin { user, expanded, refined };

const char* to_string(QueryOrigin o) noexcept;
QueryOrigin query_origin_from_string(std::string_view s);

/// Term -> weight. Never holds a zero weight; refined queries hold only
/// positive weights.
struct WeightedQuery {
  TermWeights weights;
  QueryOrigin origin = QueryOrigin::user;

  bool empty() const noexcept { return weights.empty(); }
  bool operator==(const WeightedQuery&) const = default;
};

// ---------------------------------------------------------------------------
// Local context analysis

/// sum over the top documents of tf(query_term, d) * tf(concept, d).
double cooccurrence_af(std::string_view concept_term, std::string_view query_term, std::span<const TermCounts> top_docs);

struct QueryTermIdf {
  Term term;
  double idf = 0.0;
};

/// prod_i [ phi + g(af(c, t_i)) * idf_c / ln(n) ]^idf(t_i), where n is the
/// number of top documents and g(af) = ln(af) for af >= 1, else 0.
/// Requires phi > 0 and at least two top documents.
double lca_belief(std::span<const QueryTermIdf> query_terms, std::string_view concept_term, double concept_idf,
                  std::span<const TermCounts> top_docs, double phi);

struct ConceptCandidate {
  std::string concept_term;
  double af = 0.0;  // summed over the query terms
  double belief = 0.0;

  bool operator==(const ConceptCandidate&) const = default;
};

struct LcaOptions {
  std::size_t m_top = 10;
  std::size_t k_concepts = 5;
  double phi = 0.1;
};

struct ExpansionResult {
  WeightedQuery query;
  std::vector<ConceptCandidate> added;  // descending belief
  std::vector<DocId> top_docs;
  bool expanded = false;  // false: no usable top documents, query returned unchanged
};

/// Retrieves the top m documents with a p-norm OR (p = 2) over the query
/// terms, scores every other term of those documents by lca_belief and
/// appends the best k_concepts with weight belief / max belief.
ExpansionResult expand_lca(const InvertedIndex& index, const WeightedQuery& query, const LcaOptions& options = {});

// ---------------------------------------------------------------------------
// Rocchio refinement

struct RocchioParams {
  double x = 1.0;
  std::optional<double> y;  // default: mean term weight over the relevant documents
  std::optional<double> z;  // default: mean term weight over the non-relevant documents
};

struct DiscardedTerm {
  Term term;
  double old_weight = 0.0;
  double new_weight = 0.0;

  bool operator==(const DiscardedTerm&) const = default;
};

struct RefineResult {
  WeightedQuery query;
  std::vector<DiscardedTerm> discarded;
  double x = 1.0;
  double y = 0.0;
  double z = 0.0;
};

/// new_w = x * old_w + y * mean_{d in RD} w_{t,d} - z * mean_{d in NRD} w_{t,d}
/// over the terms of the old query and of the relevant documents. An empty
/// set contributes 0. Terms whose new weight is <= 0 move to `discarded`.
RefineResult rocchio_refine(const WeightedQuery& old, std::span<const TermWeights> relevant,
                            std::span<const TermWeights> nonrelevant, const RocchioParams& params = {});

/// Mean over every (document, term) weight entry; 0 for no entries.
double mean_term_weight(std::span<const TermWeights> docs);

}  // namespace mirstat
