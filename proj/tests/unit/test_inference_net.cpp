#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "mirstat/error.hpp"
#include "mirstat/inference_net.hpp"

using namespace mirstat;

namespace {

const TokenizerConfig kPlain{{}, false, 1};

Corpus corpus_of(const std::vector<std::pair<std::string, std::string>>& docs) {
  std::vector<Document> d;
  for (auto& [id, body] : docs) d.push_back({id, "", body, "", MediaType::text, {}});
  return Corpus(d, kPlain);
}

using Triples = std::vector<std::tuple<std::size_t, std::size_t, double>>;

Triples triples(const InferenceGraph& g) {
  Triples t;
  for (auto& e : g.edges()) t.emplace_back(e.parent, e.child, e.weight);
  return t;
}

// Result belief with one document instantiated, every link matrix enumerated.
double oracle_score(const InferenceGraph& g, std::string_view doc_id) {
  std::vector<double> roots(g.nodes().size(), 0.0);
  roots[*g.find(document_node_id(doc_id))] = 1.0;
  return oracle::dag_beliefs(g.nodes().size(), triples(g), roots)[*g.find(kResultNodeId)];
}

// Documents 0..roots-1, concept nodes after them, the last node is the result.
InferenceGraph random_dag(std::mt19937_64& rng, std::size_t n, std::size_t roots) {
  InferenceGraph g;
  for (std::size_t i = 0; i < n; ++i) {
    const NodeKind kind = i < roots ? NodeKind::document : i + 1 == n ? NodeKind::result : NodeKind::concept_rep;
    g.add_node({i + 1 == n ? std::string(kResultNodeId) : "n" + std::to_string(i), kind, "", 0.0});
  }
  for (std::size_t j = roots; j < n; ++j) {
    std::vector<std::size_t> ps;
    for (std::size_t i = 0; i < j; ++i) {
      if (rng() % 2) ps.push_back(i);
    }
    if (ps.empty()) ps.push_back(rng() % j);
    for (auto i : ps) g.add_edge(i, j, oracle::uniform(rng, 0.1, 5.0));
  }
  return g;
}

}  // namespace

TEST_CASE("link matrix: examples") {
  CHECK(eval_link_matrix_enum({{1, 1, 0}, {1, 1, 1}}) == 2.0 / 3.0);
  CHECK(eval_link_matrix_closed({{1, 1, 0}, {1, 1, 1}}) == 2.0 / 3.0);
  CHECK(eval_link_matrix_enum({{1, 1, 1, 1}, {0.3, 2, 7, 1}}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval_link_matrix_closed({{1, 1, 1, 1}, {0.3, 2, 7, 1}}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval_link_matrix_enum({{0.5}, {3}}) == 0.5);
  CHECK(eval_link_matrix_closed({{0.2, 0.8}, {1, 1}}) == doctest::Approx(0.5).epsilon(1e-15));
  for (double x : {0.0, 0.1, 0.77, 1.0}) CHECK(eval_link_matrix_closed({{x}, {4.5}}) == doctest::Approx(x).epsilon(1e-15));
}

TEST_CASE("link matrix: errors") {
  CHECK_THROWS_AS(eval_link_matrix_enum({std::vector<double>(21, 0.5), std::vector<double>(21, 1.0)}), Error);
  CHECK_NOTHROW(eval_link_matrix_closed({std::vector<double>(21, 0.5), std::vector<double>(21, 1.0)}));
  CHECK_THROWS_AS(eval_link_matrix_closed({{0.5}, {}}), Error);
  CHECK_THROWS_AS(eval_link_matrix_closed({{}, {}}), Error);
  CHECK_THROWS_AS(eval_link_matrix_closed({{1.5}, {1}}), Error);
  CHECK_THROWS_AS(eval_link_matrix_closed({{0.5}, {0}}), Error);
}

TEST_CASE("closed form equals enumeration and the independent oracle") {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng() % 10;
    LinkMatrix lm;
    for (std::size_t j = 0; j < n; ++j) {
      lm.parent_probs.push_back(rng() % 6 == 0 ? double(rng() % 2) : oracle::uniform(rng, 0, 1));
      lm.parent_weights.push_back(oracle::uniform(rng, 0.01, 10));
    }
    const double closed = eval_link_matrix_closed(lm), enumerated = eval_link_matrix_enum(lm);
    CHECK(std::abs(closed - enumerated) <= 1e-9);
    CHECK(std::abs(enumerated - oracle::link_matrix(lm.parent_probs, lm.parent_weights)) <= 1e-12);
    CHECK(closed >= 0.0);
    CHECK(closed <= 1.0);

    // scaling all weights by c leaves the value unchanged
    LinkMatrix scaled = lm;
    const double c = oracle::uniform(rng, 0.01, 100);
    for (auto& w : scaled.parent_weights) w *= c;
    CHECK(eval_link_matrix_closed(scaled) == doctest::Approx(closed).epsilon(1e-12));
  }
}

TEST_CASE("document network: structure") {
  const auto one = corpus_of({{"d1", "cat"}});
  const auto g = build_document_network(one, build_index(one));
  REQUIRE(g.nodes().size() == 3);
  CHECK(g.nodes()[0].kind == NodeKind::document);
  CHECK(g.nodes()[0].prior == 1.0);
  CHECK(g.edges().size() == 2);
  CHECK(g.find(concept_node_id("cat")).has_value());
  CHECK_NOTHROW(g.validate());

  std::vector<Document> docs{{"d1", "", "lion", "", MediaType::text, {"animal"}},
                             {"d2", "", "eagle", "", MediaType::text, {"animal"}}};
  const Corpus shared(docs, kPlain);
  const auto gs = build_document_network(shared, build_index(shared));
  const auto cr = gs.find(concept_node_id("animal"));
  REQUIRE(cr.has_value());
  CHECK(gs.parents()[*cr].size() == 2);
  CHECK_FALSE(gs.find(concept_node_id("lion")).has_value());

  CHECK_THROWS_AS(build_document_network(corpus_of({}), build_index(corpus_of({}))), Error);
  try {
    build_document_network(build_index(corpus_of({})));
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "empty corpus");
  }
}

TEST_CASE("document network: edge weights are tf*idf, raw tf at idf 0") {
  const auto c = corpus_of({{"d1", "cat cat x"}, {"d2", "dog x"}});
  const auto ix = build_index(c);
  const auto g = build_document_network(c, ix);
  const auto par = g.parents();
  const auto cat = *g.find(concept_node_id("cat"));
  const auto x = *g.find(concept_node_id("x"));
  REQUIRE(par[cat].size() == 1);
  CHECK(par[cat][0].second == doctest::Approx(2 * std::log(2.0)).epsilon(1e-15));
  REQUIRE(par[x].size() == 2);
  CHECK(par[x][0].second == 1.0);
  CHECK(build_document_network(ix) == g);
}

TEST_CASE("query network: structure") {
  const auto c = corpus_of({{"d1", "cat dog"}, {"d2", "dog"}});
  const auto base = build_document_network(c, build_index(c));

  const auto one = attach_query_network(base, {{"cat", 1.0}});
  const auto result = *one.find(kResultNodeId);
  CHECK(one.parents()[result].size() == 1);
  CHECK_NOTHROW(one.validate());

  const auto miss = attach_query_network(base, {{"cat", 1.0}, {"zebra", 0.5}});
  CHECK_NOTHROW(miss.validate());
  std::vector<double> roots(miss.nodes().size(), 0.0);
  roots[*miss.find(document_node_id("d1"))] = 1.0;
  CHECK(evaluate_beliefs(miss, roots)[*miss.find("q:zebra")] == 0.0);

  const auto dup = attach_query_network(base, {{"dog", 0.25}, {"CAT", 1.0}, {"dog", 0.5}});
  std::size_t dog_nodes = 0;
  for (auto& n : dup.nodes()) dog_nodes += n.kind == NodeKind::query && n.label == "dog";
  CHECK(dog_nodes == 1);
  const auto dup_parents = dup.parents();
  for (auto& [p, w] : dup_parents[*dup.find(kResultNodeId)]) {
    if (dup.nodes()[p].label == "dog") CHECK(w == 0.75);
  }
  // case-insensitive concept match
  CHECK(dup.parents()[*dup.find("q:CAT")].size() == 1);

  CHECK_THROWS_AS(attach_query_network(one, {{"cat", 1.0}}), Error);
  CHECK_THROWS_AS(attach_query_network(base, {}), Error);
}

TEST_CASE("scoring: examples") {
  const auto c1 = corpus_of({{"d1", "cat"}});
  const auto chain = attach_query_network(build_document_network(c1, build_index(c1)), {{"cat", 1.0}});
  CHECK(score_inference(chain, "d1") == 1.0);

  const auto c2 = corpus_of({{"d1", "cat x"}, {"d2", "dog x"}});
  const auto g = attach_query_network(build_document_network(c2, build_index(c2)), {{"cat", 1.0}});
  CHECK(score_inference(g, "d1") > score_inference(g, "d2"));
  CHECK(score_inference(g, "d2") == 0.0);
  CHECK(score_inference(g, "d1") == doctest::Approx(oracle_score(g, "d1")).epsilon(1e-12));
  const auto ranked = rank_inference(g, 10);
  REQUIRE(ranked.size() == 1);
  CHECK(ranked[0].doc_id == "d1");

  CHECK(rank_inference(attach_query_network(build_document_network(c2, build_index(c2)), {{"zebra", 1.0}}), 10).empty());
  CHECK_THROWS_AS(score_inference(g, "d9"), Error);
  CHECK_THROWS_AS(rank_inference(build_document_network(c2, build_index(c2)), 10), Error);
  CHECK_THROWS_AS(rank_inference(g, 0), Error);
}

TEST_CASE("scoring: ties break by ascending doc id") {
  const auto c = corpus_of({{"b", "cat x"}, {"a", "cat x"}, {"c", "dog"}});
  const auto g = attach_query_network(build_document_network(c, build_index(c)), {{"cat", 1.0}});
  const auto ranked = rank_inference(g, 10);
  REQUIRE(ranked.size() == 2);
  CHECK(ranked[0].doc_id == "a");
  CHECK(ranked[1].doc_id == "b");
  CHECK(ranked[0].score == ranked[1].score);
}

TEST_CASE("random DAGs equal the enumeration oracle") {
  std::mt19937_64 rng(63);
  for (int round = 0; round < 300; ++round) {
    const std::size_t roots = 1 + rng() % 3;
    const auto g = random_dag(rng, 8, roots);
    CHECK_NOTHROW(g.validate());
    std::vector<double> rp(8, 0.0);
    for (std::size_t i = 0; i < roots; ++i) rp[i] = oracle::uniform(rng, 0, 1);
    const auto got = evaluate_beliefs(g, rp);
    const auto want = oracle::dag_beliefs(8, triples(g), rp);
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(std::abs(got[i] - want[i]) <= 1e-9);
      CHECK(got[i] >= 0.0);
      CHECK(got[i] <= 1.0);
    }

    const BeliefEvaluator ev(g);
    for (std::size_t d = 0; d < roots; ++d) {
      std::vector<double> one(8, 0.0);
      one[d] = 1.0;
      CHECK(std::abs(ev.score(d) - oracle::dag_beliefs(8, triples(g), one)[7]) <= 1e-9);
    }

    // raising one root probability never lowers the result belief
    auto up = rp;
    const std::size_t r = rng() % roots;
    up[r] = std::min(1.0, up[r] + oracle::uniform(rng, 0, 1));
    CHECK(evaluate_beliefs(g, up)[7] >= got[7] - 1e-12);
  }
}

TEST_CASE("cycles and malformed graphs are rejected") {
  InferenceGraph g;
  g.add_node({"doc:a", NodeKind::document, "a", 1.0});
  g.add_node({"cr:x", NodeKind::concept_rep, "x", 0.0});
  g.add_node({"cr:y", NodeKind::concept_rep, "y", 0.0});
  g.add_edge("doc:a", "cr:x", 1.0);
  g.add_edge("cr:x", "cr:y", 1.0);
  g.add_edge("cr:y", "cr:x", 1.0);
  try {
    g.validate();
    FAIL("expected cycle error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_a_dag);
    CHECK(std::string(e.what()) == "not a DAG");
  }
  CHECK_THROWS_AS(g.topological_order(), Error);

  InferenceGraph back;
  back.add_node({"doc:a", NodeKind::document, "a", 1.0});
  back.add_node({"cr:x", NodeKind::concept_rep, "x", 0.0});
  back.add_edge("doc:a", "cr:x", 1.0);
  back.add_edge("cr:x", "doc:a", 1.0);
  CHECK_THROWS_AS(back.validate(), Error);

  InferenceGraph orphan;
  orphan.add_node({"cr:x", NodeKind::concept_rep, "x", 0.0});
  CHECK_THROWS_AS(orphan.validate(), Error);

  InferenceGraph dup;
  dup.add_node({"doc:a", NodeKind::document, "a", 1.0});
  CHECK_THROWS_AS(dup.add_node({"doc:a", NodeKind::document, "a", 1.0}), Error);
  CHECK_THROWS_AS(dup.add_edge("doc:a", "nope", 1.0), Error);
}

TEST_CASE("full networks on random corpora: oracle, serial and parallel agree") {
  std::mt19937_64 rng(67);
  const std::vector<std::string> vocab{"cat", "dog", "eel", "fox", "gnu"};
  for (int round = 0; round < 30; ++round) {
    std::vector<std::pair<std::string, std::string>> docs;
    for (int i = 0, n = 2 + rng() % 5; i < n; ++i) {
      std::string body;
      for (int j = 0, len = 1 + rng() % 5; j < len; ++j) body += vocab[rng() % vocab.size()] + " ";
      docs.push_back({"d" + std::to_string(i), body});
    }
    const auto c = corpus_of(docs);
    const auto base = build_document_network(c, build_index(c));
    CHECK_NOTHROW(base.validate());
    const auto g = attach_query_network(base, {{vocab[rng() % 5], oracle::uniform(rng, 0.1, 1)},
                                               {vocab[rng() % 5], oracle::uniform(rng, 0.1, 1)}});
    const auto serial = rank_inference(g, 100, Execution::serial);
    CHECK(serial == rank_inference(g, 100, Execution::parallel));

    std::vector<ScoredDoc> expected;
    for (auto& [id, body] : docs) {
      const double s = oracle_score(g, id);
      if (s > 0) expected.push_back({id, s});
    }
    REQUIRE(serial.size() == expected.size());
    for (auto& r : serial) {
      auto it = std::find_if(expected.begin(), expected.end(), [&](auto& e) { return e.doc_id == r.doc_id; });
      REQUIRE(it != expected.end());
      CHECK(std::abs(r.score - it->score) <= 1e-9);
    }
  }
}

TEST_CASE("graph dump is deterministic and sorted") {
  const auto c = corpus_of({{"d2", "dog"}, {"d1", "cat dog"}});
  const auto g = attach_query_network(build_document_network(c, build_index(c)), {{"dog", 1.0}});
  const auto text = dump_graph_json(g);
  CHECK(text == dump_graph_json(g));
  REQUIRE(text.starts_with("{\"edges\":["));
  const auto nodes = text.substr(text.find("\"nodes\":"));
  CHECK(nodes.find("\"cr:cat\"") < nodes.find("\"cr:dog\""));
  CHECK(nodes.find("\"cr:dog\"") < nodes.find("\"doc:d1\""));
  CHECK(nodes.find("\"doc:d1\"") < nodes.find("\"doc:d2\""));
  CHECK(nodes.find("\"q:dog\"") < nodes.find("\"result\""));
}
