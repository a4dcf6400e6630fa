#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mirstat/corpus.hpp"
#include "mirstat/index.hpp"
#include "mirstat/kernels.hpp"

namespace mirstat {

/// Layers in evaluation order; an edge may never point to an earlier layer.
enum class NodeKind { document = 0, text = 1, concept_rep = 2, query = 3, result = 4 };

const char* to_string(NodeKind k) noexcept;

struct NetNode {
  std::string id;     // "doc:<id>", "text:<id>#<field>", "cr:<label>", "q:<term>", "result"
  NodeKind kind = NodeKind::document;
  std::string label;  // document id, concept label or query term
  double prior = 0.0; // document nodes only

  bool operator==(const NetNode&) const = default;
};

struct NetEdge {
  std::size_t parent = 0;
  std::size_t child = 0;
  double weight = 1.0;

  bool operator==(const NetEdge&) const = default;
};

std::string document_node_id(std::string_view doc_id);
std::string concept_node_id(std::string_view label);
inline constexpr std::string_view kResultNodeId = "result";

/// DAG of document, text, concept-representation, query and result nodes.
/// Built once and then only read.
class InferenceGraph {
 public:
  std::size_t add_node(NetNode node);  // throws on duplicate id
  void add_edge(std::size_t parent, std::size_t child, double weight);
  void add_edge(std::string_view parent, std::string_view child, double weight);

  const std::vector<NetNode>& nodes() const noexcept { return nodes_; }
  const std::vector<NetEdge>& edges() const noexcept { return edges_; }
  std::optional<std::size_t> find(std::string_view id) const;

  /// (parent index, weight) pairs for each node.
  std::vector<std::vector<std::pair<std::size_t, double>>> parents() const;

  /// Kahn order; throws Error(not_a_dag) on a cycle.
  std::vector<std::size_t> topological_order() const;

  /// Edge endpoints, positive weights, layer order, acyclicity, at most one
  /// result node, and a parent for every node other than documents and
  /// query nodes (an unmatched query node has none and evaluates to 0).
  void validate() const;

  bool operator==(const InferenceGraph& o) const { return nodes_ == o.nodes_ && edges_ == o.edges_; }

 private:
  std::vector<NetNode> nodes_;
  std::vector<NetEdge> edges_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// Weights and parent probabilities feeding one node.
struct LinkMatrix {
  std::vector<double> parent_probs;
  std::vector<double> parent_weights;
};

inline constexpr std::size_t kMaxEnumeratedParents = 20;

/// Sum over all 2^n parent truth assignments S of
///   prod_{i in S} p_i * prod_{i not in S} (1 - p_i) * sum_{i in S} w_i / sum w_i.
double eval_link_matrix_enum(const LinkMatrix& lm);

/// sum w_i p_i / sum w_i, the algebraic simplification of the enumeration.
double eval_link_matrix_closed(const LinkMatrix& lm);

/// Document node per document (prior 1/N); a text node per non-empty field;
/// a concept node per declared concept (edge weight 1 from each of the
/// document's text nodes) or, for documents declaring none, per indexed term
/// (edge weight tf*idf from the text nodes containing it, raw tf when idf is 0).
InferenceGraph build_document_network(const Corpus& corpus, const InvertedIndex& index);

/// Same network derived from an index alone: one body text node per document
/// and concepts taken from its indexed terms.
InferenceGraph build_document_network(const InvertedIndex& index);

/// Adds one query node per distinct term (duplicate weights summed), linked
/// from concept nodes whose label matches case-insensitively, and a single
/// result node fed by every query node. Edge weights are the query weights.
InferenceGraph attach_query_network(const InferenceGraph& graph, const std::vector<std::pair<Term, double>>& query);

/// Beliefs for every node given root probabilities. Non-root nodes take the
/// closed-form link-matrix value over their parents; parentless non-document
/// nodes are 0.
std::vector<double> evaluate_beliefs(const InferenceGraph& graph, std::span<const double> root_probs);

/// Reusable scorer: validates once, then evaluates only the ancestors of the
/// result node for each candidate document.
class BeliefEvaluator {
 public:
  explicit BeliefEvaluator(const InferenceGraph& graph);

  /// Result belief with the given document node instantiated to 1 and every
  /// other document node to 0.
  double score(std::size_t document_node) const;
  double score(std::string_view doc_id) const;

  /// Document nodes that can reach the result node.
  const std::vector<std::size_t>& candidates() const noexcept { return candidates_; }

 private:
  const InferenceGraph& graph_;
  // Ancestors of the result node in topological order; parents are stored
  // as positions in this order.
  std::vector<std::size_t> order_;
  std::vector<std::vector<std::pair<std::size_t, double>>> local_parents_;
  std::vector<std::size_t> position_;  // node -> position in order_, npos otherwise
  std::vector<std::size_t> candidates_;
  bool has_result_ = false;
};

double score_inference(const InferenceGraph& graph, std::string_view doc_id);

RankedList rank_inference(const InferenceGraph& graph, std::size_t k, Execution exec = Execution::parallel);

/// {"edges":[["parent","child",weight]...],"nodes":[{"id","kind","prior"}...]}
/// with nodes sorted by id and edges by (parent, child).
std::string dump_graph_json(const InferenceGraph& graph);

}  // namespace mirstat
