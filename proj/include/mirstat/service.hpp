#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "mirstat/bim.hpp"
#include "mirstat/corpus.hpp"
#include "mirstat/expansion.hpp"
#include "mirstat/index.hpp"
#include "mirstat/inference_net.hpp"
#include "mirstat/ontology.hpp"
#include "mirstat/query.hpp"
#include "mirstat/query_store.hpp"

namespace mirstat {

enum class Model { pnorm, bim, inet };

const char* to_string(Model m) noexcept;
Model model_from_string(std::string_view s);  // throws Error(invalid_argument)

/// Read-only retrieval state shared by every request.
class Engine {
 public:
  Engine(InvertedIndex index, std::optional<Corpus> corpus, TokenizerConfig config = TokenizerConfig::defaults());

  const InvertedIndex& index() const noexcept { return index_; }
  const std::optional<Corpus>& corpus() const noexcept { return corpus_; }
  const TokenizerConfig& tokenizer() const noexcept { return config_; }
  const InferenceGraph& network() const noexcept { return network_; }

  /// First 160 code points of the document body (title when the body is
  /// empty); empty without a corpus.
  std::string snippet(std::string_view doc_id) const;

 private:
  InvertedIndex index_;
  std::optional<Corpus> corpus_;
  TokenizerConfig config_;
  InferenceGraph network_;
};

/// A query after parsing and tokenization. `tree` is absent when every term
/// was a stopword.
struct InterpretedQuery {
  std::optional<QueryNode> tree;
  WeightedQuery vector;  // term -> largest weight given to it
};

/// p-norm grammar string.
InterpretedQuery interpret_query(std::string_view text, const TokenizerConfig& config, double p = 2.0);
/// Explicit term -> weight map; the tree is an OR of the weights divided by their max.
InterpretedQuery interpret_weights(const TermWeights& weights, const TokenizerConfig& config, double p = 2.0);

/// OR of the terms with weights scaled by their max; nullopt when empty.
std::optional<QueryNode> weighted_or(const WeightedQuery& q, double p = 2.0);

struct SearchOptions {
  Model model = Model::pnorm;
  std::size_t k = 10;
  std::set<DocId> relevant;  // bim only
  Smoothing smoothing = Smoothing::half;
  Execution exec = Execution::parallel;
};

RankedList run_search(const Engine& engine, const InterpretedQuery& query, const SearchOptions& options);

struct QueryEval {
  std::string query;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t hits = 0;
  std::size_t relevant = 0;
};

struct EvalReport {
  std::size_t k = 0;
  std::vector<QueryEval> queries;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
};

/// precision@k = |top-k and relevant| / k, recall@k = |top-k and relevant| / |relevant|
/// (0 for an empty relevant set). Rankings come from p-norm retrieval.
EvalReport evaluate(const InvertedIndex& index, const std::vector<std::string>& queries,
                    const std::map<std::string, std::set<DocId>>& qrels, std::size_t k,
                    const TokenizerConfig& config = TokenizerConfig::defaults());

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Transport-independent request handler. JSON responses always carry
/// "status"; failures carry error.code and error.message.
class Service {
 public:
  Service(std::shared_ptr<const Engine> engine, std::shared_ptr<QueryStore> store, double reuse_tau = kDefaultReuseThreshold);

  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body) const;

  HttpResponse search(std::string_view body) const;
  HttpResponse expand(std::string_view body) const;
  HttpResponse feedback(std::string_view body) const;
  HttpResponse queries() const;
  HttpResponse document(std::string_view id) const;
  HttpResponse ontology() const;
  HttpResponse health() const;

  void set_engine(std::shared_ptr<const Engine> engine);
  std::shared_ptr<const Engine> engine() const;

 private:
  std::string save_or_reuse(const WeightedQuery& vector, const RankedList& results) const;

  mutable std::shared_mutex engine_mutex_;
  std::shared_ptr<const Engine> engine_;
  std::shared_ptr<QueryStore> store_;
  double reuse_tau_;
  mutable std::mutex owl_mutex_;
  mutable std::shared_ptr<const std::string> owl_cache_;
  mutable std::shared_ptr<const Engine> owl_engine_;
};

inline constexpr int kDefaultPort = 8750;

/// --port when given, else MIRSTAT_PORT, else 8750.
int resolve_port(std::optional<int> flag, const char* env_value);

}  // namespace mirstat
