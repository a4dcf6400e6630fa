#include "mirstat/pnorm.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mirstat/error.hpp"

namespace mirstat {

namespace {

void check_operands(std::span<const double> wd, std::span<const double> wq, double p) {
  if (wd.empty() || wd.size() != wq.size()) {
    throw Error(Errc::invalid_argument, "p-norm operands must be non-empty and of equal length");
  }
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error(Errc::invalid_argument, "p must be finite and >= 1");
  for (std::size_t i = 0; i < wd.size(); ++i) {
    if (!(wd[i] >= 0.0 && wd[i] <= 1.0)) throw Error(Errc::invalid_argument, "document weight outside [0, 1]");
    if (!(wq[i] > 0.0 && wq[i] <= 1.0)) throw Error(Errc::invalid_argument, "query weight outside (0, 1]");
  }
}

// [ sum x_i^p wq_i^p / sum wq_i^p ]^(1/p), with the query weights rescaled by
// their maximum so the denominator cannot underflow for large p.
double weighted_power_mean(std::span<const double> x, std::span<const double> wq, double p) {
  const double wmax = *std::max_element(wq.begin(), wq.end());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = wq[i] / wmax;
    num += std::pow(x[i] * w, p);
    den += std::pow(w, p);
  }
  return std::clamp(std::pow(num / den, 1.0 / p), 0.0, 1.0);
}

double score_node(const InvertedIndex& index, const QueryNode& node, std::uint32_t doc) {
  if (node.is_term()) return index.doc_term_weight(doc, node.term);
  std::vector<double> values;
  std::vector<double> weights;
  values.reserve(node.children.size());
  weights.reserve(node.children.size());
  for (const auto& child : node.children) {
    values.push_back(score_node(index, child, doc));
    weights.push_back(child.is_term() ? child.weight : 1.0);
  }
  return node.kind == QueryNode::Kind::all_of ? eval_and(values, weights, node.p) : eval_or(values, weights, node.p);
}

void collect_postings(const InvertedIndex& index, const QueryNode& node, std::set<std::uint32_t>& out) {
  if (node.is_term()) {
    for (const auto& p : index.postings(node.term)) out.insert(p.doc);
    return;
  }
  for (const auto& c : node.children) collect_postings(index, c, out);
}

}  // namespace

double eval_and(std::span<const double> doc_weights, std::span<const double> query_weights, double p) {
  check_operands(doc_weights, query_weights, p);
  std::vector<double> missing(doc_weights.size());
  std::transform(doc_weights.begin(), doc_weights.end(), missing.begin(), [](double w) { return 1.0 - w; });
  return std::clamp(1.0 - weighted_power_mean(missing, query_weights, p), 0.0, 1.0);
}

double eval_or(std::span<const double> doc_weights, std::span<const double> query_weights, double p) {
  check_operands(doc_weights, query_weights, p);
  return weighted_power_mean(doc_weights, query_weights, p);
}

double score_pnorm(const InvertedIndex& index, const QueryNode& query, std::uint32_t doc) {
  return score_node(index, query, doc);
}

double score_pnorm(const InvertedIndex& index, const QueryNode& query, std::string_view doc_id) {
  auto ord = index.doc_ordinal(doc_id);
  if (!ord) throw Error(Errc::not_found, "unknown document \"" + std::string(doc_id) + "\"");
  return score_node(index, query, *ord);
}

std::vector<std::uint32_t> candidate_docs(const InvertedIndex& index, const QueryNode& query) {
  std::set<std::uint32_t> docs;
  collect_postings(index, query, docs);
  return {docs.begin(), docs.end()};
}

RankedList rank_pnorm(const InvertedIndex& index, const QueryNode& query, std::size_t k, Execution exec) {
  if (k < 1) throw Error(Errc::invalid_argument, "k must be >= 1");
  const auto candidates = candidate_docs(index, query);
  const auto scores = kernels::map_scores(exec, candidates.size(),
                                          [&](std::size_t i) { return score_node(index, query, candidates[i]); });
  std::vector<ScoredDoc> scored;
  scored.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) scored.push_back({index.doc_id(candidates[i]), scores[i]});
  return finalize_ranking(std::move(scored), k);
}

}  // namespace mirstat
