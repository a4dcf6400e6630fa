#include "mirstat/bim.hpp"

#include <algorithm>
#include <cmath>

#include "mirstat/error.hpp"
#include "mirstat/pnorm.hpp"

namespace mirstat {

RelevanceProbabilities estimate(const TermRelevanceStats& stats, const RelevanceJudgments& judgments,
                                Smoothing smoothing) {
  const double N = judgments.N;
  const double R = judgments.R();
  const double n = stats.n;
  const double r = stats.r;
  if (judgments.R() > judgments.N || stats.n > judgments.N || stats.r > stats.n || stats.r > judgments.R()) {
    throw Error(Errc::invalid_argument, "inconsistent relevance counts for \"" + stats.term + "\"");
  }
  if (smoothing == Smoothing::half) {
    return {(r + 0.5) / (R + 1.0), (n - r + 0.5) / (N - R + 1.0)};
  }
  if (judgments.R() == 0 || judgments.R() == judgments.N) {
    throw Error(Errc::degenerate, "degenerate judgments; use smoothing");
  }
  return {r / R, (n - r) / (N - R)};
}

TermWeight term_weight(double p_rel, double p_nonrel) {
  if (!(p_rel >= 0.0 && p_rel <= 1.0) || !(p_nonrel >= 0.0 && p_nonrel <= 1.0)) {
    throw Error(Errc::invalid_argument, "probabilities must lie in [0, 1]");
  }
  if (p_nonrel == 0.0 || p_rel == 1.0) throw Error(Errc::degenerate, "infinite odds; use smoothing");
  TermWeight w;
  w.p_rel = p_rel;
  w.p_nonrel = p_nonrel;
  w.rel_odds = p_rel / (1.0 - p_rel);
  w.nonrel_odds = p_nonrel == 1.0 ? HUGE_VAL : p_nonrel / (1.0 - p_nonrel);
  // Same ratio as X / Y, written so that P_k = U_k gives exactly 1.
  w.odds_ratio = (p_rel * (1.0 - p_nonrel)) / (p_nonrel * (1.0 - p_rel));
  w.log_weight = std::log(w.odds_ratio);
  return w;
}

RelevanceJudgments make_judgments(const InvertedIndex& index, const std::set<DocId>& relevant) {
  for (const auto& id : relevant) {
    if (!index.doc_ordinal(id)) throw Error(Errc::not_found, "judged document \"" + id + "\" is not indexed");
  }
  return {relevant, static_cast<std::uint32_t>(index.N())};
}

TermRelevanceStats relevance_stats(const InvertedIndex& index, const Term& term, const RelevanceJudgments& judgments) {
  TermRelevanceStats st{term, index.df(term), 0};
  for (const auto& p : index.postings(term)) {
    if (judgments.relevant.contains(index.doc_id(p.doc))) ++st.r;
  }
  return st;
}

RankedList rank_bim(const InvertedIndex& index, const std::vector<Term>& query_terms,
                    const RelevanceJudgments& judgments, Smoothing smoothing, std::size_t k, Execution exec) {
  if (query_terms.empty()) throw Error(Errc::invalid_argument, "at least one query term is required");
  if (k < 1) throw Error(Errc::invalid_argument, "k must be >= 1");

  std::vector<Term> terms(query_terms);
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

  std::vector<std::pair<Term, double>> weighted;
  std::vector<std::uint32_t> candidates;
  for (const auto& t : terms) {
    const auto& list = index.postings(t);
    if (list.empty()) continue;  // contributes to no document
    const auto probs = estimate(relevance_stats(index, t, judgments), judgments, smoothing);
    weighted.emplace_back(t, term_weight(probs.p_rel, probs.p_nonrel).log_weight);
    for (const auto& p : list) candidates.push_back(p.doc);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  const auto scores = kernels::map_scores(exec, candidates.size(), [&](std::size_t i) {
    double s = 0.0;
    for (const auto& [t, w] : weighted) {
      if (index.tf(candidates[i], t) > 0) s += w;
    }
    return s;
  });
  std::vector<ScoredDoc> scored;
  scored.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) scored.push_back({index.doc_id(candidates[i]), scores[i]});
  return finalize_ranking(std::move(scored), k);
}

}  // namespace mirstat
