#include "mirstat/ontology.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include "mirstat/error.hpp"

namespace mirstat {

namespace {

constexpr std::string_view kConceptNs = "urn:mir:concept:";
constexpr std::string_view kPropertyNs = "urn:mir:property:";
constexpr std::string_view kRelationshipNs = "urn:mir:relationship:";
constexpr std::string_view kResultIri = "urn:mir:result";

std::string shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

// Slugs that collide after folding get "-2", "-3", ... in label order.
std::map<std::string, std::string> unique_slugs(const std::vector<std::string>& sorted_labels) {
  std::map<std::string, std::string> out;
  std::map<std::string, int> used;
  for (const auto& label : sorted_labels) {
    std::string slug = slugify(label);
    if (slug.empty()) throw Error(Errc::invalid_argument, "concept label \"" + label + "\" produces an empty slug");
    if (int n = ++used[slug]; n > 1) slug += "-" + std::to_string(n);
    out.emplace(label, std::move(slug));
  }
  return out;
}

}  // namespace

void ConceptGraph::validate() const {
  std::set<std::string> labels;
  for (const auto& v : vertices) {
    if (!labels.insert(v.label).second) throw Error(Errc::invalid_argument, "duplicate concept label \"" + v.label + "\"");
  }
  for (const auto& [from, to] : edges) {
    if (!labels.contains(from) || !labels.contains(to)) {
      throw Error(Errc::invalid_argument, "edge " + from + " -> " + to + " references an unknown concept");
    }
  }
}

ConceptGraph concept_graph_from_inference(const InferenceGraph& graph) {
  const auto& nodes = graph.nodes();
  std::vector<std::vector<std::size_t>> children(nodes.size());
  std::vector<double> evidence(nodes.size(), 0.0);
  for (const auto& e : graph.edges()) {
    children[e.parent].push_back(e.child);
    if (nodes[e.child].kind == NodeKind::concept_rep) evidence[e.child] += e.weight;
  }

  ConceptGraph cg;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].kind == NodeKind::concept_rep) cg.vertices.push_back({nodes[i].label, shortest(evidence[i])});
  }
  std::sort(cg.vertices.begin(), cg.vertices.end(),
            [](const ConceptVertex& a, const ConceptVertex& b) { return a.label < b.label; });

  std::set<std::pair<std::string, std::string>> edges;
  for (std::size_t d = 0; d < nodes.size(); ++d) {
    if (nodes[d].kind != NodeKind::document) continue;
    std::set<std::string> reached;
    std::vector<bool> seen(nodes.size(), false);
    std::vector<std::size_t> stack{d};
    while (!stack.empty()) {
      const auto n = stack.back();
      stack.pop_back();
      for (auto c : children[n]) {
        const auto kind = nodes[c].kind;
        if (seen[c] || (kind != NodeKind::text && kind != NodeKind::concept_rep)) continue;
        seen[c] = true;
        if (kind == NodeKind::concept_rep) reached.insert(nodes[c].label);
        stack.push_back(c);
      }
    }
    for (auto a = reached.begin(); a != reached.end(); ++a) {
      for (auto b = std::next(a); b != reached.end(); ++b) edges.emplace(*a, *b);
    }
  }
  cg.edges.assign(edges.begin(), edges.end());
  return cg;
}

std::string slugify(std::string_view label) {
  std::string out;
  bool pending_hyphen = false;
  for (char ch : label) {
    const auto c = static_cast<unsigned char>(ch);
    const bool alnum = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
    if (!alnum) {
      pending_hyphen = true;
      continue;
    }
    if (pending_hyphen && !out.empty()) out += '-';
    pending_hyphen = false;
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : ch;
  }
  return out;
}

OwlDocument export_owl(const ConceptGraph& graph) {
  graph.validate();

  std::vector<ConceptVertex> vertices = graph.vertices;
  std::sort(vertices.begin(), vertices.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
  auto edges = graph.edges;
  std::sort(edges.begin(), edges.end());

  std::vector<std::string> labels;
  for (const auto& v : vertices) labels.push_back(v.label);
  const auto slug = unique_slugs(labels);

  std::map<std::string, std::vector<std::string>> targets;
  for (const auto& [from, to] : edges) targets[from].push_back(to);

  auto concept_iri = [&](const std::string& label) { return std::string(kConceptNs) + slug.at(label); };
  auto relationship_iri = [&](const std::pair<std::string, std::string>& e) {
    return std::string(kRelationshipNs) + slug.at(e.first) + "--" + slug.at(e.second);
  };

  OwlDocument doc;
  std::string& x = doc.text;
  x += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  x += "<rdf:RDF xmlns:rdf=\"http://www.w3.org/1999/02/22-rdf-syntax-ns#\"\n";
  x += "         xmlns:rdfs=\"http://www.w3.org/2000/01/rdf-schema#\"\n";
  x += "         xmlns:owl=\"http://www.w3.org/2002/07/owl#\">\n";
  x += "  <owl:Ontology rdf:about=\"urn:mir:ontology\"/>\n";

  const bool has_leaf = !vertices.empty();  // a finite DAG always has a sink
  for (const auto& v : vertices) {
    const auto iri = concept_iri(v.label);
    x += "  <owl:Class rdf:about=\"" + iri + "\">\n";
    x += "    <rdfs:label>" + xml_escape(v.label) + "</rdfs:label>\n";
    if (!targets.contains(v.label)) x += "    <rdfs:subClassOf rdf:resource=\"" + std::string(kResultIri) + "\"/>\n";
    x += "  </owl:Class>\n";
    ++doc.class_count;

    x += "  <owl:DatatypeProperty rdf:about=\"" + std::string(kPropertyNs) + slug.at(v.label) + "\">\n";
    x += "    <rdfs:label>" + xml_escape(v.label) + "</rdfs:label>\n";
    x += "    <rdf:value>" + xml_escape(v.value) + "</rdf:value>\n";
    x += "    <rdfs:domain rdf:resource=\"" + iri + "\"/>\n";
    if (auto it = targets.find(v.label); it != targets.end()) {
      for (const auto& to : it->second) x += "    <rdfs:domain rdf:resource=\"" + concept_iri(to) + "\"/>\n";
    }
    x += "  </owl:DatatypeProperty>\n";
  }

  for (const auto& e : edges) {
    x += "  <owl:Class rdf:about=\"" + relationship_iri(e) + "\">\n";
    x += "    <rdfs:label>" + xml_escape(e.first + e.second) + "</rdfs:label>\n";
    x += "  </owl:Class>\n";
    ++doc.class_count;
  }

  if (has_leaf) {
    x += "  <owl:Class rdf:about=\"" + std::string(kResultIri) + "\">\n";
    x += "    <rdfs:label>Result</rdfs:label>\n";
    x += "  </owl:Class>\n";
    ++doc.class_count;
    x += "  <owl:DatatypeProperty rdf:about=\"urn:mir:result-property\">\n";
    x += "    <rdfs:label>Result</rdfs:label>\n";
    x += "    <rdfs:domain rdf:resource=\"" + std::string(kResultIri) + "\"/>\n";
    for (const auto& e : edges) x += "    <rdfs:domain rdf:resource=\"" + relationship_iri(e) + "\"/>\n";
    x += "  </owl:DatatypeProperty>\n";
  }

  x += "</rdf:RDF>\n";
  return doc;
}

}  // namespace mirstat
