#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mirstat/inference_net.hpp"

namespace mirstat {

struct ConceptVertex {
  std::string label;
  std::string value;

  bool operator==(const ConceptVertex&) const = default;
};

/// Concept layer of an inference graph. Labels are unique; every edge runs
/// from the lexicographically smaller label to the larger one.
struct ConceptGraph {
  std::vector<ConceptVertex> vertices;
  std::vector<std::pair<std::string, std::string>> edges;

  void validate() const;
};

/// Vertices are the concept nodes, valued by the sum of their incoming
/// evidence weights; edges join concepts reachable from a common document.
ConceptGraph concept_graph_from_inference(const InferenceGraph& graph);

struct OwlDocument {
  std::string text;  // RDF/XML
  std::size_t class_count = 0;
};

/// Lowercase, runs of non-alphanumerics become one hyphen, no leading or
/// trailing hyphen. Empty for labels with no alphanumerics.
std::string slugify(std::string_view label);

/// One owl:Class plus a datatype property per concept, one Relationship
/// class per edge (labelled with the concatenated concept labels) and a
/// Result class when the graph has leaf concepts. Deterministic.
OwlDocument export_owl(const ConceptGraph& graph);

}  // namespace mirstat
