#include "mirstat/service.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <nlohmann/json.hpp>

#include "mirstat/error.hpp"
#include "mirstat/pnorm.hpp"

namespace mirstat {

using nlohmann::json;

namespace {

constexpr std::size_t kSnippetLength = 160;

// Maps library failures onto HTTP statuses.
int status_for(Errc code) {
  switch (code) {
    case Errc::io:
    case Errc::not_a_dag: return 500;
    default: return 400;
  }
}

HttpResponse json_response(int status, const json& body) { return {status, "application/json", body.dump()}; }

HttpResponse error_response(int status, std::string_view code, std::string_view message,
                            std::optional<std::size_t> column = std::nullopt) {
  json err{{"code", code}, {"message", message}};
  if (column) err["column"] = *column;
  return json_response(status, {{"status", "error"}, {"error", err}});
}

HttpResponse no_index() { return error_response(409, "no_index", "no index is loaded"); }

json parse_body(std::string_view body) {
  if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) return json::object();
  try {
    auto j = json::parse(body);
    if (!j.is_object()) throw Error(Errc::parse, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse, std::string("malformed JSON body: ") + e.what());
  }
}

std::size_t positive_int(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  const auto& v = j[key];
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw Error(Errc::invalid_argument, std::string(key) + " must be a positive integer");
  }
  return v.get<std::size_t>();
}

std::optional<double> optional_number(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_number()) throw Error(Errc::invalid_argument, std::string(key) + " must be a number");
  return j[key].get<double>();
}

double exponent(const json& j) {
  const double p = optional_number(j, "p").value_or(2.0);
  if (!std::isfinite(p) || p < 1.0) throw Error(Errc::range, "p must be a finite number >= 1");
  return p;
}

std::set<DocId> id_set(const json& j, const char* key) {
  std::set<DocId> out;
  if (!j.contains(key) || j[key].is_null()) return out;
  if (!j[key].is_array()) throw Error(Errc::invalid_argument, std::string(key) + " must be an array of document ids");
  for (const auto& v : j[key]) {
    if (!v.is_string()) throw Error(Errc::invalid_argument, std::string(key) + " must be an array of document ids");
    out.insert(v.get<std::string>());
  }
  return out;
}

// "query" as a grammar string or a list of terms, or "weights" as term -> weight.
InterpretedQuery read_query(const json& j, const TokenizerConfig& config, double p) {
  if (j.contains("weights") && !j["weights"].is_null()) {
    if (!j["weights"].is_object()) throw Error(Errc::invalid_argument, "weights must be an object");
    TermWeights w;
    for (const auto& [t, v] : j["weights"].items()) {
      if (!v.is_number()) throw Error(Errc::invalid_argument, "weight of \"" + t + "\" must be a number");
      w.emplace(t, v.get<double>());
    }
    return interpret_weights(w, config, p);
  }
  if (!j.contains("query")) throw Error(Errc::invalid_argument, "missing query");
  const auto& q = j["query"];
  if (q.is_string()) return interpret_query(q.get<std::string>(), config, p);
  if (q.is_array()) {
    TermWeights w;
    for (const auto& t : q) {
      if (!t.is_string()) throw Error(Errc::invalid_argument, "query terms must be strings");
      w.emplace(t.get<std::string>(), 1.0);
    }
    return interpret_weights(w, config, p);
  }
  throw Error(Errc::invalid_argument, "query must be a string or an array of terms");
}

json weights_json(const WeightedQuery& q) {
  json out = json::object();
  for (const auto& [t, w] : q.weights) out[t] = w;
  return out;
}

json results_json(const Engine& engine, const RankedList& ranked) {
  json out = json::array();
  for (const auto& r : ranked) out.push_back({{"doc_id", r.doc_id}, {"score", r.score}, {"snippet", engine.snippet(r.doc_id)}});
  return out;
}

json stored_json(const PersistentQuery& q) {
  return {{"id", q.id},
          {"created_at", q.created_at},
          {"origin", to_string(q.vector.origin)},
          {"vector", weights_json(q.vector)},
          {"results", q.results}};
}

std::vector<DocId> ids_of(const RankedList& ranked) {
  std::vector<DocId> out;
  for (const auto& r : ranked) out.push_back(r.doc_id);
  return out;
}

std::vector<TermWeights> weight_vectors(const InvertedIndex& index, const std::set<DocId>& ids) {
  std::vector<TermWeights> out;
  for (const auto& id : ids) {
    auto ord = index.doc_ordinal(id);
    if (!ord) throw Error(Errc::not_found, "unknown document \"" + id + "\"");
    out.push_back(index.doc_weight_vector(*ord));
  }
  return out;
}

// Code-point prefix so multi-byte characters are never split.
std::string utf8_prefix(std::string_view s, std::size_t n) {
  std::size_t i = 0, count = 0;
  while (i < s.size() && count < n) {
    ++i;
    while (i < s.size() && (static_cast<unsigned char>(s[i]) & 0xC0) == 0x80) ++i;
    ++count;
  }
  return std::string(s.substr(0, i));
}

}  // namespace

const char* to_string(Model m) noexcept {
  switch (m) {
    case Model::pnorm: return "pnorm";
    case Model::bim: return "bim";
    case Model::inet: return "inet";
  }
  return "pnorm";
}

Model model_from_string(std::string_view s) {
  if (s == "pnorm") return Model::pnorm;
  if (s == "bim") return Model::bim;
  if (s == "inet") return Model::inet;
  throw Error(Errc::invalid_argument, "unknown model \"" + std::string(s) + "\" (expected pnorm, bim or inet)");
}

Engine::Engine(InvertedIndex index, std::optional<Corpus> corpus, TokenizerConfig config)
    : index_(std::move(index)), corpus_(std::move(corpus)), config_(std::move(config)) {
  if (index_.N() == 0) return;
  network_ = corpus_ ? build_document_network(*corpus_, index_) : build_document_network(index_);
}

std::string Engine::snippet(std::string_view doc_id) const {
  if (!corpus_) return {};
  const Document* d = corpus_->find(doc_id);
  if (!d) return {};
  return utf8_prefix(d->body.empty() ? d->title : d->body, kSnippetLength);
}

std::optional<QueryNode> weighted_or(const WeightedQuery& q, double p) {
  double max_w = 0.0;
  for (const auto& [t, w] : q.weights) max_w = std::max(max_w, w);
  if (!(max_w > 0.0)) return std::nullopt;
  std::vector<QueryNode> leaves;
  for (const auto& [t, w] : q.weights) {
    if (w > 0.0) leaves.push_back(QueryNode::leaf(t, w / max_w));
  }
  if (leaves.size() == 1) return leaves.front();
  return QueryNode::any_of(std::move(leaves), p);
}

InterpretedQuery interpret_query(std::string_view text, const TokenizerConfig& config, double p) {
  InterpretedQuery out;
  out.tree = normalize_query(parse_query(text, {1.0, p}), config, p);
  if (out.tree) {
    for (const auto& [t, w] : query_terms(*out.tree)) {
      auto [it, fresh] = out.vector.weights.emplace(t, w);
      if (!fresh) it->second = std::max(it->second, w);
    }
  }
  return out;
}

InterpretedQuery interpret_weights(const TermWeights& weights, const TokenizerConfig& config, double p) {
  InterpretedQuery out;
  for (const auto& [raw, w] : weights) {
    if (!std::isfinite(w) || w <= 0.0) throw Error(Errc::range, "weight of \"" + raw + "\" must be positive");
    for (const auto& t : tokenize(raw, config)) {
      auto [it, fresh] = out.vector.weights.emplace(t, w);
      if (!fresh) it->second = std::max(it->second, w);
    }
  }
  out.tree = weighted_or(out.vector, p);
  return out;
}

RankedList run_search(const Engine& engine, const InterpretedQuery& query, const SearchOptions& options) {
  if (options.k < 1) throw Error(Errc::invalid_argument, "k must be >= 1");
  if (!query.tree || engine.index().N() == 0) return {};
  switch (options.model) {
    case Model::pnorm: return rank_pnorm(engine.index(), *query.tree, options.k, options.exec);
    case Model::bim: {
      std::vector<Term> terms;
      for (const auto& [t, w] : query.vector.weights) terms.push_back(t);
      const auto judgments = make_judgments(engine.index(), options.relevant);
      return rank_bim(engine.index(), terms, judgments, options.smoothing, options.k, options.exec);
    }
    case Model::inet: {
      std::vector<std::pair<Term, double>> terms(query.vector.weights.begin(), query.vector.weights.end());
      return rank_inference(attach_query_network(engine.network(), terms), options.k, options.exec);
    }
  }
  return {};
}

EvalReport evaluate(const InvertedIndex& index, const std::vector<std::string>& queries,
                    const std::map<std::string, std::set<DocId>>& qrels, std::size_t k,
                    const TokenizerConfig& config) {
  if (k < 1) throw Error(Errc::invalid_argument, "k must be >= 1");
  EvalReport report;
  report.k = k;
  for (const auto& q : queries) {
    auto rel = qrels.find(q);
    if (rel == qrels.end()) throw Error(Errc::not_found, "query \"" + q + "\" has no qrels entry");
    const auto interpreted = interpret_query(q, config);
    RankedList ranked;
    if (interpreted.tree && index.N() > 0) ranked = rank_pnorm(index, *interpreted.tree, k);
    QueryEval e{q, 0.0, 0.0, 0, rel->second.size()};
    for (const auto& r : ranked) e.hits += rel->second.contains(r.doc_id) ? 1 : 0;
    e.precision = static_cast<double>(e.hits) / static_cast<double>(k);
    e.recall = e.relevant == 0 ? 0.0 : static_cast<double>(e.hits) / static_cast<double>(e.relevant);
    report.macro_precision += e.precision;
    report.macro_recall += e.recall;
    report.queries.push_back(std::move(e));
  }
  if (!report.queries.empty()) {
    report.macro_precision /= static_cast<double>(report.queries.size());
    report.macro_recall /= static_cast<double>(report.queries.size());
  }
  return report;
}

// ---------------------------------------------------------------------------

Service::Service(std::shared_ptr<const Engine> engine, std::shared_ptr<QueryStore> store, double reuse_tau)
    : engine_(std::move(engine)), store_(std::move(store)), reuse_tau_(reuse_tau) {
  if (!store_) store_ = std::make_shared<QueryStore>();
  if (!(reuse_tau_ >= 0.0 && reuse_tau_ <= 1.0)) throw Error(Errc::range, "tau must lie in [0, 1]");
}

void Service::set_engine(std::shared_ptr<const Engine> engine) {
  std::unique_lock lock(engine_mutex_);
  engine_ = std::move(engine);
}

std::shared_ptr<const Engine> Service::engine() const {
  std::shared_lock lock(engine_mutex_);
  return engine_;
}

std::string Service::save_or_reuse(const WeightedQuery& vector, const RankedList& results) const {
  for (const auto& q : store_->list()) {
    if (q.vector.weights == vector.weights) return q.id;
  }
  return store_->save_query(vector, ids_of(results));
}

HttpResponse Service::handle(std::string_view method, std::string_view path, std::string_view body) const {
  try {
    if (method == "POST" && path == "/api/search") return search(body);
    if (method == "POST" && path == "/api/expand") return expand(body);
    if (method == "POST" && path == "/api/feedback") return feedback(body);
    if (method == "GET" && path == "/api/queries") return queries();
    if (method == "GET" && path == "/api/ontology.owl") return ontology();
    if (method == "GET" && path == "/api/health") return health();
    constexpr std::string_view docs = "/api/documents/";
    if (method == "GET" && path.starts_with(docs) && path.size() > docs.size()) return document(path.substr(docs.size()));
    return error_response(404, "not_found", "no route for " + std::string(method) + " " + std::string(path));
  } catch (const QueryError& e) {
    return error_response(400, errc_name(e.code()), e.what(), e.column());
  } catch (const Error& e) {
    return error_response(status_for(e.code()), errc_name(e.code()), e.what());
  } catch (const json::exception& e) {
    return error_response(400, "invalid_argument", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

HttpResponse Service::search(std::string_view body) const {
  const auto req = parse_body(body);
  const auto engine = this->engine();
  if (!engine) return no_index();

  SearchOptions opt;
  opt.model = model_from_string(req.value("model", std::string("pnorm")));
  opt.k = positive_int(req, "k", 10);
  opt.relevant = id_set(req, "relevant");
  if (req.contains("smoothing")) {
    const auto s = req["smoothing"].get<std::string>();
    if (s != "raw" && s != "half") throw Error(Errc::invalid_argument, "smoothing must be raw or half");
    opt.smoothing = s == "raw" ? Smoothing::raw : Smoothing::half;
  }
  const bool reuse = req.value("reuse", false);
  const double tau = optional_number(req, "tau").value_or(reuse_tau_);
  const auto query = read_query(req, engine->tokenizer(), exponent(req));

  json out{{"status", "ok"}, {"model", to_string(opt.model)}, {"query", weights_json(query.vector)}};
  if (reuse && !query.vector.empty()) {
    if (auto hit = store_->find_reusable(query.vector, tau)) {
      out["reused_from"] = hit->query.id;
      out["similarity"] = hit->similarity;
      out["reused"] = stored_json(hit->query);
    }
  }
  const auto ranked = run_search(*engine, query, opt);
  out["results"] = results_json(*engine, ranked);
  out["query_id"] = query.vector.empty() ? json() : json(save_or_reuse(query.vector, ranked));
  return json_response(200, out);
}

HttpResponse Service::expand(std::string_view body) const {
  const auto req = parse_body(body);
  const auto engine = this->engine();
  if (!engine) return no_index();

  LcaOptions opt;
  opt.m_top = positive_int(req, "m", 10);
  opt.k_concepts = positive_int(req, "k", 5);
  opt.phi = optional_number(req, "phi").value_or(0.1);
  const double p = exponent(req);
  const auto query = read_query(req, engine->tokenizer(), p);

  ExpansionResult r;
  r.query = query.vector;
  if (!query.vector.empty() && engine->index().N() > 0) r = expand_lca(engine->index(), query.vector, opt);

  json concepts = json::array();
  for (const auto& c : r.added) {
    concepts.push_back({{"concept", c.concept_term}, {"af", c.af}, {"belief", c.belief}, {"weight", r.query.weights.at(c.concept_term)}});
  }
  json out{{"status", "ok"}, {"expanded", r.expanded}, {"weights", weights_json(r.query)}, {"concepts", concepts},
           {"top_docs", r.top_docs}, {"query_id", nullptr}, {"results", json::array()}};
  if (r.expanded) {
    RankedList ranked;
    if (auto tree = weighted_or(r.query, p)) ranked = rank_pnorm(engine->index(), *tree, positive_int(req, "results_k", 10));
    out["results"] = results_json(*engine, ranked);
    out["query_id"] = save_or_reuse(r.query, ranked);
  }
  return json_response(200, out);
}

HttpResponse Service::feedback(std::string_view body) const {
  const auto req = parse_body(body);
  const auto engine = this->engine();
  if (!engine) return no_index();

  if (!req.contains("query_id") || !req["query_id"].is_string()) {
    throw Error(Errc::invalid_argument, "query_id must be a string");
  }
  const auto id = req["query_id"].get<std::string>();
  const auto stored = store_->get(id);
  if (!stored) return error_response(404, "not_found", "unknown query_id \"" + id + "\"");

  const auto relevant = weight_vectors(engine->index(), id_set(req, "relevant"));
  const auto nonrelevant = weight_vectors(engine->index(), id_set(req, "nonrelevant"));
  RocchioParams params;
  params.x = optional_number(req, "x").value_or(1.0);
  params.y = optional_number(req, "y");
  params.z = optional_number(req, "z");
  const auto refined = rocchio_refine(stored->vector, relevant, nonrelevant, params);

  json discarded = json::array();
  for (const auto& d : refined.discarded) {
    discarded.push_back({{"term", d.term}, {"old_weight", d.old_weight}, {"new_weight", d.new_weight}});
  }
  json out{{"status", "ok"},         {"previous_id", id},           {"weights", weights_json(refined.query)},
           {"discarded", discarded}, {"x", refined.x},              {"y", refined.y},
           {"z", refined.z},         {"all_discarded", refined.query.empty()}, {"query_id", nullptr},
           {"results", json::array()}};
  if (refined.query.empty()) {
    out["warning"] = "every term was discarded; the refined query is empty";
    return json_response(200, out);
  }
  RankedList ranked;
  if (auto tree = weighted_or(refined.query, exponent(req))) {
    ranked = rank_pnorm(engine->index(), *tree, positive_int(req, "k", 10));
  }
  out["results"] = results_json(*engine, ranked);
  out["query_id"] = save_or_reuse(refined.query, ranked);
  return json_response(200, out);
}

HttpResponse Service::queries() const {
  json list = json::array();
  for (const auto& q : store_->list()) list.push_back(stored_json(q));
  return json_response(200, {{"status", "ok"}, {"queries", list}});
}

HttpResponse Service::document(std::string_view id) const {
  const auto engine = this->engine();
  if (!engine) return no_index();
  const auto ord = engine->index().doc_ordinal(id);
  if (!ord) return error_response(404, "not_found", "unknown document \"" + std::string(id) + "\"");

  json doc{{"id", std::string(id)}, {"terms", json::object()}};
  for (const auto& [t, w] : engine->index().doc_weight_vector(*ord)) doc["terms"][t] = w;
  if (engine->corpus()) {
    if (const Document* d = engine->corpus()->find(id)) {
      doc["title"] = d->title;
      doc["body"] = d->body;
      doc["caption"] = d->caption;
      doc["media_type"] = to_string(d->media_type);
      doc["concepts"] = d->concepts;
    }
  }
  return json_response(200, {{"status", "ok"}, {"document", doc}});
}

HttpResponse Service::ontology() const {
  const auto engine = this->engine();
  if (!engine) return no_index();
  std::lock_guard lock(owl_mutex_);
  if (!owl_cache_ || owl_engine_ != engine) {
    owl_cache_ = std::make_shared<const std::string>(export_owl(concept_graph_from_inference(engine->network())).text);
    owl_engine_ = engine;
  }
  return {200, "application/rdf+xml", *owl_cache_};
}

HttpResponse Service::health() const {
  const auto engine = this->engine();
  json out{{"status", "ok"}, {"index_loaded", engine != nullptr}, {"queries", store_->size()}};
  out["documents"] = engine ? engine->index().N() : 0;
  out["terms"] = engine ? engine->index().postings().size() : 0;
  return json_response(200, out);
}

int resolve_port(std::optional<int> flag, const char* env_value) {
  auto check = [](long long p, const std::string& source) {
    if (p < 1 || p > 65535) throw Error(Errc::range, source + " port " + std::to_string(p) + " is outside 1..65535");
    return static_cast<int>(p);
  };
  if (flag) return check(*flag, "--port");
  if (env_value && *env_value) {
    std::string s(env_value);
    if (s.find_first_not_of("0123456789") != std::string::npos || s.size() > 5) {
      throw Error(Errc::invalid_argument, "MIRSTAT_PORT \"" + s + "\" is not a port number");
    }
    return check(std::stoll(s), "MIRSTAT_PORT");
  }
  return kDefaultPort;
}

}  // namespace mirstat
