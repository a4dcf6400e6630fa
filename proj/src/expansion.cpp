#include "mirstat/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mirstat/error.hpp"
#include "mirstat/pnorm.hpp"

namespace mirstat {

namespace {

// Sums in sorted order so the result does not depend on document order.
double canonical_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

std::uint32_t count_of(const TermCounts& counts, std::string_view term) {
  auto it = counts.find(std::string(term));
  return it == counts.end() ? 0 : it->second;
}

}  // namespace

const char* to_string(QueryOrigin o) noexcept {
  switch (o) {
    case QueryOrigin::user: return "user";
    case QueryOrigin::expanded: return "expanded";
    case QueryOrigin::refined: return "refined";
  }
  return "user";
}

QueryOrigin query_origin_from_string(std::string_view s) {
  if (s == "user") return QueryOrigin::user;
  if (s == "expanded") return QueryOrigin::expanded;
  if (s == "refined") return QueryOrigin::refined;
  throw Error(Errc::parse, "unknown query origin \"" + std::string(s) + "\"");
}

double cooccurrence_af(std::string_view concept_term, std::string_view query_term, std::span<const TermCounts> top_docs) {
  double af = 0.0;
  for (const auto& doc : top_docs) {
    af += static_cast<double>(count_of(doc, query_term)) * static_cast<double>(count_of(doc, concept_term));
  }
  return af;
}

double lca_belief(std::span<const QueryTermIdf> query_terms, std::string_view concept_term, double concept_idf,
                  std::span<const TermCounts> top_docs, double phi) {
  if (top_docs.size() < 2) throw Error(Errc::invalid_argument, "insufficient top documents");
  if (!(phi > 0.0)) throw Error(Errc::invalid_argument, "phi must be positive");
  const double log_n = std::log(static_cast<double>(top_docs.size()));
  double belief = 1.0;
  for (const auto& q : query_terms) {
    const double af = cooccurrence_af(concept_term, q.term, top_docs);
    const double g = af >= 1.0 ? std::log(af) : 0.0;
    belief *= std::pow(phi + g * concept_idf / log_n, q.idf);
  }
  return belief;
}

ExpansionResult expand_lca(const InvertedIndex& index, const WeightedQuery& query, const LcaOptions& options) {
  if (options.m_top < 2) throw Error(Errc::invalid_argument, "m_top must be >= 2");
  if (options.k_concepts < 1) throw Error(Errc::invalid_argument, "k_concepts must be >= 1");
  if (!(options.phi > 0.0)) throw Error(Errc::invalid_argument, "phi must be positive");

  ExpansionResult out;
  out.query = query;
  if (query.empty()) return out;

  double max_w = 0.0;
  for (const auto& [t, w] : query.weights) max_w = std::max(max_w, w);
  std::vector<QueryNode> leaves;
  for (const auto& [t, w] : query.weights) {
    if (w > 0.0) leaves.push_back(QueryNode::leaf(t, w / max_w));
  }
  if (leaves.empty()) return out;
  const QueryNode retrieval = leaves.size() == 1 ? leaves.front() : QueryNode::any_of(std::move(leaves), 2.0);
  const auto top = rank_pnorm(index, retrieval, options.m_top);
  if (top.size() < 2) return out;

  std::vector<TermCounts> top_docs;
  std::set<Term> candidates;
  for (const auto& hit : top) {
    out.top_docs.push_back(hit.doc_id);
    const auto& counts = index.doc_terms(*index.doc_ordinal(hit.doc_id));
    top_docs.push_back(counts);
    for (const auto& [term, n] : counts) {
      if (!query.weights.contains(term)) candidates.insert(term);
    }
  }

  std::vector<QueryTermIdf> terms;
  for (const auto& [t, w] : query.weights) terms.push_back({t, index.df(t) > 0 ? index.idf(t) : 0.0});

  std::vector<ConceptCandidate> ranked;
  ranked.reserve(candidates.size());
  for (const auto& c : candidates) {
    double af = 0.0;
    for (const auto& q : terms) af += cooccurrence_af(c, q.term, top_docs);
    ranked.push_back({c, af, lca_belief(terms, c, index.idf(c), top_docs, options.phi)});
  }
  std::sort(ranked.begin(), ranked.end(), [](const ConceptCandidate& a, const ConceptCandidate& b) {
    if (a.belief != b.belief) return a.belief > b.belief;
    return a.concept_term < b.concept_term;
  });
  if (ranked.size() > options.k_concepts) ranked.resize(options.k_concepts);

  if (!ranked.empty()) {
    const double best = ranked.front().belief;
    for (const auto& c : ranked) out.query.weights[c.concept_term] = c.belief / best;
  }
  out.query.origin = QueryOrigin::expanded;
  out.added = std::move(ranked);
  out.expanded = true;
  return out;
}

double mean_term_weight(std::span<const TermWeights> docs) {
  std::vector<double> all;
  for (const auto& d : docs) {
    for (const auto& [t, w] : d) all.push_back(w);
  }
  return all.empty() ? 0.0 : canonical_sum(all) / static_cast<double>(all.size());
}

RefineResult rocchio_refine(const WeightedQuery& old, std::span<const TermWeights> relevant,
                            std::span<const TermWeights> nonrelevant, const RocchioParams& params) {
  RefineResult out;
  out.x = params.x;
  out.y = params.y.value_or(mean_term_weight(relevant));
  out.z = params.z.value_or(mean_term_weight(nonrelevant));
  if (!(out.x >= 0.0) || !(out.y >= 0.0) || !(out.z >= 0.0)) {
    throw Error(Errc::invalid_argument, "x, y and z must be non-negative");
  }

  std::set<Term> terms;
  for (const auto& [t, w] : old.weights) terms.insert(t);
  for (const auto& d : relevant) {
    for (const auto& [t, w] : d) terms.insert(t);
  }

  auto mean_for = [](std::span<const TermWeights> docs, const Term& t) {
    if (docs.empty()) return 0.0;
    std::vector<double> values;
    for (const auto& d : docs) {
      if (auto it = d.find(t); it != d.end()) values.push_back(it->second);
    }
    return canonical_sum(std::move(values)) / static_cast<double>(docs.size());
  };

  out.query.origin = QueryOrigin::refined;
  for (const auto& t : terms) {
    const auto it = old.weights.find(t);
    const double old_w = it == old.weights.end() ? 0.0 : it->second;
    const double new_w = out.x * old_w + out.y * mean_for(relevant, t) - out.z * mean_for(nonrelevant, t);
    if (new_w > 0.0) {
      out.query.weights.emplace(t, new_w);
    } else {
      out.discarded.push_back({t, old_w, new_w});
    }
  }
  return out;
}

}  // namespace mirstat
