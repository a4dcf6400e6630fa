#include "mirstat/inference_net.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include <nlohmann/json.hpp>

#include "mirstat/error.hpp"

namespace mirstat {

namespace {

void check_link_matrix(const LinkMatrix& lm) {
  if (lm.parent_probs.empty() || lm.parent_probs.size() != lm.parent_weights.size()) {
    throw Error(Errc::invalid_argument, "link matrix needs equal, non-zero numbers of probabilities and weights");
  }
  for (double p : lm.parent_probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::invalid_argument, "parent probability outside [0, 1]");
  }
  for (double w : lm.parent_weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw Error(Errc::invalid_argument, "parent weight must be positive");
  }
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
  }
  return out;
}

double closed_form(std::span<const std::pair<std::size_t, double>> parents, const std::vector<double>& belief) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& [p, w] : parents) {
    num += w * belief[p];
    den += w;
  }
  return std::clamp(num / den, 0.0, 1.0);
}

// Edge weight for a term-derived concept: tf*idf, falling back to tf for a
// term present in every document. All parents of one concept share the same
// idf, so the fallback leaves beliefs unchanged.
double term_edge_weight(const InvertedIndex& index, const Term& term, std::uint32_t tf) {
  const double idf = index.idf(term);
  return idf > 0.0 ? tf * idf : static_cast<double>(tf);
}

std::size_t ensure_node(InferenceGraph& g, NetNode node) {
  if (auto existing = g.find(node.id)) return *existing;
  return g.add_node(std::move(node));
}

}  // namespace

const char* to_string(NodeKind k) noexcept {
  switch (k) {
    case NodeKind::document: return "document";
    case NodeKind::text: return "text";
    case NodeKind::concept_rep: return "concept";
    case NodeKind::query: return "query";
    case NodeKind::result: return "result";
  }
  return "document";
}

std::string document_node_id(std::string_view doc_id) { return "doc:" + std::string(doc_id); }
std::string concept_node_id(std::string_view label) { return "cr:" + std::string(label); }

std::size_t InferenceGraph::add_node(NetNode node) {
  if (by_id_.contains(node.id)) throw Error(Errc::invalid_argument, "duplicate node id \"" + node.id + "\"");
  by_id_.emplace(node.id, nodes_.size());
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

void InferenceGraph::add_edge(std::size_t parent, std::size_t child, double weight) {
  if (parent >= nodes_.size() || child >= nodes_.size()) throw Error(Errc::invalid_argument, "edge endpoint out of range");
  edges_.push_back({parent, child, weight});
}

void InferenceGraph::add_edge(std::string_view parent, std::string_view child, double weight) {
  auto p = find(parent);
  auto c = find(child);
  if (!p || !c) throw Error(Errc::invalid_argument, "edge references unknown node");
  add_edge(*p, *c, weight);
}

std::optional<std::size_t> InferenceGraph::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::vector<std::pair<std::size_t, double>>> InferenceGraph::parents() const {
  std::vector<std::vector<std::pair<std::size_t, double>>> out(nodes_.size());
  for (const auto& e : edges_) out[e.child].emplace_back(e.parent, e.weight);
  return out;
}

std::vector<std::size_t> InferenceGraph::topological_order() const {
  std::vector<std::size_t> indegree(nodes_.size(), 0);
  std::vector<std::vector<std::size_t>> children(nodes_.size());
  for (const auto& e : edges_) {
    ++indegree[e.child];
    children[e.parent].push_back(e.child);
  }
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  std::vector<std::size_t> order;
  order.reserve(nodes_.size());
  while (!ready.empty()) {
    const auto n = ready.front();
    ready.pop_front();
    order.push_back(n);
    for (auto c : children[n]) {
      if (--indegree[c] == 0) ready.push_back(c);
    }
  }
  if (order.size() != nodes_.size()) throw Error(Errc::not_a_dag, "not a DAG");
  return order;
}

void InferenceGraph::validate() const {
  std::size_t results = 0;
  std::vector<std::size_t> parent_count(nodes_.size(), 0);
  for (const auto& n : nodes_) {
    if (n.kind == NodeKind::result) ++results;
    if (n.kind == NodeKind::document && !(n.prior >= 0.0 && n.prior <= 1.0)) {
      throw Error(Errc::invalid_argument, "document prior outside [0, 1] for \"" + n.id + "\"");
    }
  }
  if (results > 1) throw Error(Errc::invalid_argument, "graph has more than one result node");
  for (const auto& e : edges_) {
    if (e.parent >= nodes_.size() || e.child >= nodes_.size()) throw Error(Errc::invalid_argument, "dangling edge");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw Error(Errc::invalid_argument, "edge weight must be positive: " + nodes_[e.parent].id + " -> " + nodes_[e.child].id);
    }
    const auto& p = nodes_[e.parent];
    const auto& c = nodes_[e.child];
    if (c.kind == NodeKind::document || static_cast<int>(p.kind) > static_cast<int>(c.kind)) {
      throw Error(Errc::invalid_argument, "edge violates layer order: " + p.id + " -> " + c.id);
    }
    ++parent_count[e.child];
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto k = nodes_[i].kind;
    if (k != NodeKind::document && k != NodeKind::query && parent_count[i] == 0) {
      throw Error(Errc::invalid_argument, "node \"" + nodes_[i].id + "\" has no parent");
    }
  }
  topological_order();
}

double eval_link_matrix_enum(const LinkMatrix& lm) {
  check_link_matrix(lm);
  const std::size_t n = lm.parent_probs.size();
  if (n > kMaxEnumeratedParents) throw Error(Errc::invalid_argument, "too many parents to enumerate; use closed form");
  double total_weight = 0.0;
  for (double w : lm.parent_weights) total_weight += w;

  double total = 0.0;
  const std::uint32_t columns = 1u << n;
  for (std::uint32_t mask = 0; mask < columns; ++mask) {
    double prob = 1.0;
    double weight = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        prob *= lm.parent_probs[i];
        weight += lm.parent_weights[i];
      } else {
        prob *= 1.0 - lm.parent_probs[i];
      }
    }
    total += prob * (weight / total_weight);
  }
  return total;
}

double eval_link_matrix_closed(const LinkMatrix& lm) {
  check_link_matrix(lm);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < lm.parent_probs.size(); ++i) {
    num += lm.parent_weights[i] * lm.parent_probs[i];
    den += lm.parent_weights[i];
  }
  return num / den;
}

InferenceGraph build_document_network(const Corpus& corpus, const InvertedIndex& index) {
  if (corpus.size() == 0) throw Error(Errc::invalid_argument, "empty corpus");
  InferenceGraph g;
  const double prior = 1.0 / static_cast<double>(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& doc = corpus.documents()[i];
    const auto doc_node = g.add_node({document_node_id(doc.id), NodeKind::document, doc.id, prior});

    std::vector<std::pair<std::size_t, Field>> texts;
    for (Field f : kFields) {
      if (corpus.field_terms(i, f).empty()) continue;
      const auto t = g.add_node({"text:" + doc.id + "#" + to_string(f), NodeKind::text, doc.id, 0.0});
      g.add_edge(doc_node, t, 1.0);
      texts.emplace_back(t, f);
    }

    if (!doc.concepts.empty()) {
      if (texts.empty()) continue;
      for (const auto& concept_label : doc.concepts) {
        const auto cr = ensure_node(g, {concept_node_id(concept_label), NodeKind::concept_rep, concept_label, 0.0});
        for (const auto& [t, f] : texts) g.add_edge(t, cr, 1.0);
      }
      continue;
    }
    for (const auto& [t, f] : texts) {
      for (const auto& [term, tf] : corpus.field_terms(i, f)) {
        const auto cr = ensure_node(g, {concept_node_id(term), NodeKind::concept_rep, term, 0.0});
        g.add_edge(t, cr, term_edge_weight(index, term, tf));
      }
    }
  }
  return g;
}

InferenceGraph build_document_network(const InvertedIndex& index) {
  if (index.N() == 0) throw Error(Errc::invalid_argument, "empty corpus");
  InferenceGraph g;
  const double prior = 1.0 / static_cast<double>(index.N());
  for (std::uint32_t i = 0; i < index.N(); ++i) {
    const auto& id = index.doc_id(i);
    const auto doc_node = g.add_node({document_node_id(id), NodeKind::document, id, prior});
    if (index.doc_terms(i).empty()) continue;
    const auto t = g.add_node({"text:" + id + "#body", NodeKind::text, id, 0.0});
    g.add_edge(doc_node, t, 1.0);
    for (const auto& [term, tf] : index.doc_terms(i)) {
      const auto cr = ensure_node(g, {concept_node_id(term), NodeKind::concept_rep, term, 0.0});
      g.add_edge(t, cr, term_edge_weight(index, term, tf));
    }
  }
  return g;
}

InferenceGraph attach_query_network(const InferenceGraph& graph, const std::vector<std::pair<Term, double>>& query) {
  if (query.empty()) throw Error(Errc::invalid_argument, "at least one query term is required");
  for (const auto& n : graph.nodes()) {
    if (n.kind == NodeKind::result || n.kind == NodeKind::query) {
      throw Error(Errc::invalid_argument, "graph already carries a query network");
    }
  }

  std::vector<std::pair<Term, double>> merged;
  for (const auto& [term, w] : query) {
    if (!(w > 0.0) || !std::isfinite(w)) throw Error(Errc::invalid_argument, "query weight must be positive");
    auto it = std::find_if(merged.begin(), merged.end(), [&](const auto& m) { return m.first == term; });
    if (it == merged.end()) merged.emplace_back(term, w);
    else it->second += w;
  }

  std::map<std::string, std::vector<std::size_t>> concepts_by_label;
  for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
    const auto& n = graph.nodes()[i];
    if (n.kind == NodeKind::concept_rep) concepts_by_label[ascii_lower(n.label)].push_back(i);
  }

  InferenceGraph g = graph;
  const auto result = g.add_node({std::string(kResultNodeId), NodeKind::result, "result", 0.0});
  for (const auto& [term, w] : merged) {
    const auto q = g.add_node({"q:" + term, NodeKind::query, term, 0.0});
    if (auto it = concepts_by_label.find(ascii_lower(term)); it != concepts_by_label.end()) {
      for (auto cr : it->second) g.add_edge(cr, q, w);
    }
    g.add_edge(q, result, w);
  }
  return g;
}

std::vector<double> evaluate_beliefs(const InferenceGraph& graph, std::span<const double> root_probs) {
  if (root_probs.size() != graph.nodes().size()) {
    throw Error(Errc::invalid_argument, "root probabilities must have one entry per node");
  }
  const auto order = graph.topological_order();
  const auto parents = graph.parents();
  std::vector<double> belief(graph.nodes().size(), 0.0);
  for (auto n : order) {
    if (graph.nodes()[n].kind == NodeKind::document) {
      belief[n] = root_probs[n];
    } else if (!parents[n].empty()) {
      belief[n] = closed_form(parents[n], belief);
    }
  }
  return belief;
}

BeliefEvaluator::BeliefEvaluator(const InferenceGraph& graph) : graph_(graph) {
  graph.validate();
  const auto& nodes = graph.nodes();
  const auto parents = graph.parents();
  std::size_t result = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].kind == NodeKind::result) {
      result = i;
      has_result_ = true;
    }
  }
  position_.assign(nodes.size(), static_cast<std::size_t>(-1));
  if (!has_result_) return;

  std::vector<bool> ancestor(nodes.size(), false);
  std::vector<std::size_t> stack{result};
  ancestor[result] = true;
  while (!stack.empty()) {
    const auto n = stack.back();
    stack.pop_back();
    for (const auto& [p, w] : parents[n]) {
      if (!ancestor[p]) {
        ancestor[p] = true;
        stack.push_back(p);
      }
    }
  }
  for (auto n : graph.topological_order()) {
    if (!ancestor[n]) continue;
    position_[n] = order_.size();
    order_.push_back(n);
    if (nodes[n].kind == NodeKind::document) candidates_.push_back(n);
  }
  local_parents_.resize(order_.size());
  for (std::size_t k = 0; k < order_.size(); ++k) {
    for (const auto& [p, w] : parents[order_[k]]) local_parents_[k].emplace_back(position_[p], w);
  }
}

double BeliefEvaluator::score(std::size_t document_node) const {
  if (!has_result_) throw Error(Errc::invalid_argument, "graph has no result node; attach a query first");
  if (document_node >= graph_.nodes().size() || graph_.nodes()[document_node].kind != NodeKind::document) {
    throw Error(Errc::invalid_argument, "not a document node");
  }
  const auto instantiated = position_[document_node];
  if (instantiated == static_cast<std::size_t>(-1)) return 0.0;
  // Every node outside order_ cannot reach the result, so it is ignored.
  std::vector<double> belief(order_.size(), 0.0);
  for (std::size_t k = 0; k < order_.size(); ++k) {
    if (graph_.nodes()[order_[k]].kind == NodeKind::document) {
      belief[k] = k == instantiated ? 1.0 : 0.0;
    } else if (!local_parents_[k].empty()) {
      belief[k] = closed_form(local_parents_[k], belief);
    }
  }
  return belief.back();
}

double BeliefEvaluator::score(std::string_view doc_id) const {
  auto n = graph_.find(document_node_id(doc_id));
  if (!n) throw Error(Errc::not_found, "unknown document \"" + std::string(doc_id) + "\"");
  return score(*n);
}

double score_inference(const InferenceGraph& graph, std::string_view doc_id) {
  return BeliefEvaluator(graph).score(doc_id);
}

RankedList rank_inference(const InferenceGraph& graph, std::size_t k, Execution exec) {
  if (k < 1) throw Error(Errc::invalid_argument, "k must be >= 1");
  if (!graph.find(kResultNodeId)) throw Error(Errc::invalid_argument, "graph has no result node; attach a query first");
  const BeliefEvaluator evaluator(graph);
  const auto& docs = evaluator.candidates();
  const auto scores = kernels::map_scores(exec, docs.size(), [&](std::size_t i) { return evaluator.score(docs[i]); });
  std::vector<ScoredDoc> scored;
  scored.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) scored.push_back({graph.nodes()[docs[i]].label, scores[i]});
  return finalize_ranking(std::move(scored), k);
}

std::string dump_graph_json(const InferenceGraph& graph) {
  const auto& nodes = graph.nodes();
  std::vector<std::size_t> idx(nodes.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return nodes[a].id < nodes[b].id; });

  nlohmann::json out;
  out["nodes"] = nlohmann::json::array();
  for (auto i : idx) {
    const auto& n = nodes[i];
    out["nodes"].push_back({{"id", n.id},
                            {"kind", to_string(n.kind)},
                            {"prior", n.kind == NodeKind::document ? nlohmann::json(n.prior) : nlohmann::json(nullptr)}});
  }
  auto edges = graph.edges();
  std::sort(edges.begin(), edges.end(), [&](const NetEdge& a, const NetEdge& b) {
    return std::tie(nodes[a.parent].id, nodes[a.child].id) < std::tie(nodes[b.parent].id, nodes[b.child].id);
  });
  out["edges"] = nlohmann::json::array();
  for (const auto& e : edges) out["edges"].push_back({nodes[e.parent].id, nodes[e.child].id, e.weight});
  return out.dump();
}

}  // namespace mirstat
