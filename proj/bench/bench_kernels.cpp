// Serial reference vs OpenMP kernels on a synthetic corpus.

#include <benchmark/benchmark.h>

#include <random>

#include "mirstat/bim.hpp"
#include "mirstat/corpus.hpp"
#include "mirstat/inference_net.hpp"
#include "mirstat/pnorm.hpp"

using namespace mirstat;

namespace {

const std::vector<std::string>& vocab() {
  static const auto words = [] {
    std::vector<std::string> v;
    for (int i = 0; i < 400; ++i) v.push_back("w" + std::to_string(i));
    return v;
  }();
  return words;
}

std::string random_body(std::mt19937_64& rng, std::size_t words) {
  std::string s;
  for (std::size_t i = 0; i < words; ++i) s += vocab()[rng() % vocab().size()] + " ";
  return s;
}

const Corpus& corpus() {
  static const Corpus c = [] {
    std::mt19937_64 rng(7);
    std::vector<Document> docs;
    for (int i = 0; i < 5000; ++i) {
      docs.push_back({"d" + std::to_string(100000 + i), "", random_body(rng, 80), "", MediaType::text, {}});
    }
    return Corpus(docs, TokenizerConfig{{}, false, 1});
  }();
  return c;
}

const InvertedIndex& index() {
  static const InvertedIndex ix = build_index(corpus());
  return ix;
}

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

void label(benchmark::State& state) { state.SetLabel(state.range(0) ? "parallel" : "serial"); }

void BM_rank_pnorm(benchmark::State& state) {
  std::vector<QueryNode> terms;
  for (int i = 0; i < 40; ++i) terms.push_back(QueryNode::leaf(vocab()[i * 7], 0.2 + 0.02 * i));
  const auto q = QueryNode::any_of(terms, 2.0);
  const auto& ix = index();
  for (auto _ : state) benchmark::DoNotOptimize(rank_pnorm(ix, q, 20, mode(state)));
  label(state);
}
BENCHMARK(BM_rank_pnorm)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_rank_bim(benchmark::State& state) {
  const auto& ix = index();
  std::set<DocId> rel;
  for (int i = 0; i < 50; ++i) rel.insert(ix.doc_id(i * 3));
  const auto judged = make_judgments(ix, rel);
  const std::vector<Term> terms(vocab().begin(), vocab().begin() + 30);
  for (auto _ : state) benchmark::DoNotOptimize(rank_bim(ix, terms, judged, Smoothing::half, 20, mode(state)));
  label(state);
}
BENCHMARK(BM_rank_bim)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_rank_inference(benchmark::State& state) {
  static const auto graph = [] {
    std::vector<std::pair<Term, double>> q;
    for (int i = 0; i < 10; ++i) q.push_back({vocab()[i * 11], 1.0});
    return attach_query_network(build_document_network(index()), q);
  }();
  for (auto _ : state) benchmark::DoNotOptimize(rank_inference(graph, 20, mode(state)));
  label(state);
}
BENCHMARK(BM_rank_inference)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ingest_segmented(benchmark::State& state) {
  std::mt19937_64 rng(9);
  const auto text = random_body(rng, 200000);
  const auto config = TokenizerConfig::defaults();
  for (auto _ : state) benchmark::DoNotOptimize(ingest_segmented(text, 8, config, mode(state)));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
  label(state);
}
BENCHMARK(BM_ingest_segmented)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
