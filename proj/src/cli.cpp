#include "mirstat/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "mirstat/error.hpp"
#include "mirstat/http_server.hpp"
#include "mirstat/service.hpp"

namespace mirstat {

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::parse, path.string() + ": " + e.what());
  }
}

TokenizerConfig tokenizer_for(const std::string& stopwords) {
  auto config = TokenizerConfig::defaults();
  if (!stopwords.empty()) config.stopwords = load_stopwords(stopwords);
  return config;
}

std::optional<Corpus> load_corpus(const std::string& dir, const TokenizerConfig& config, std::ostream& err) {
  if (dir.empty()) return std::nullopt;
  auto result = ingest_corpus(dir, config);
  for (const auto& e : result.errors) err << "warning: skipped " << e.path.string() << ": " << e.message << '\n';
  return std::move(result.corpus);
}

// A JSON array of ids, or an object with a "relevant" array.
std::set<DocId> read_judgments(const std::string& path) {
  const auto j = read_json(path);
  const auto& ids = j.is_object() ? j.at("relevant") : j;
  if (!ids.is_array()) throw Error(Errc::parse, path + ": expected an array of document ids");
  std::set<DocId> out;
  for (const auto& v : ids) out.insert(v.get<std::string>());
  return out;
}

std::vector<std::string> read_query_lines(const std::string& path) {
  std::istringstream in(read_text(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) out.push_back(line);
  }
  return out;
}

std::map<std::string, std::set<DocId>> read_qrels(const std::string& path) {
  const auto j = read_json(path);
  if (!j.is_object()) throw Error(Errc::parse, path + ": qrels must map query strings to arrays of document ids");
  std::map<std::string, std::set<DocId>> out;
  for (const auto& [q, ids] : j.items()) {
    auto& set = out[q];
    for (const auto& id : ids) set.insert(id.get<std::string>());
  }
  return out;
}

void print_ranking(std::ostream& out, const RankedList& ranked) {
  for (const auto& r : ranked) out << r.doc_id << '\t' << format_double(r.score) << '\n';
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Statistical information retrieval engine", "mirstat"};
  app.require_subcommand(1);

  std::string corpus_dir, out_path, index_path, query, model = "pnorm", judgments, smoothing = "half";
  std::string queries_path, qrels_path, stopwords, store_path = "queries.ndjson", static_dir, host = "127.0.0.1";
  double p = 2.0, phi = 0.1;
  std::size_t k = 10, m_top = 10, k_concepts = 5;
  std::optional<int> port;

  auto* cmd_index = app.add_subcommand("index", "Ingest a corpus directory and write an index");
  cmd_index->add_option("--corpus", corpus_dir, "Directory of *.txt documents")->required();
  cmd_index->add_option("--out", out_path, "Index file to write")->required();
  cmd_index->add_option("--stopwords", stopwords, "Stopword file, one word per line");

  auto* cmd_search = app.add_subcommand("search", "Rank documents for a query");
  cmd_search->add_option("--index", index_path)->required();
  cmd_search->add_option("--model", model)->check(CLI::IsMember({"pnorm", "bim", "inet"}));
  cmd_search->add_option("--query", query)->required();
  cmd_search->add_option("--p", p, "p-norm exponent")->check(CLI::Range(1.0, 1e300));
  cmd_search->add_option("--k", k)->check(CLI::PositiveNumber);
  cmd_search->add_option("--judgments", judgments, "JSON array of relevant document ids (bim)");
  cmd_search->add_option("--smoothing", smoothing)->check(CLI::IsMember({"raw", "half"}));
  cmd_search->add_option("--corpus", corpus_dir, "Corpus directory, for declared concepts (inet)");
  cmd_search->add_option("--stopwords", stopwords);

  auto* cmd_expand = app.add_subcommand("expand", "Expand a query with local context analysis");
  cmd_expand->add_option("--index", index_path)->required();
  cmd_expand->add_option("--query", query)->required();
  cmd_expand->add_option("--m", m_top, "Top documents used")->check(CLI::Range(std::size_t{2}, SIZE_MAX));
  cmd_expand->add_option("--k", k_concepts, "Concepts added")->check(CLI::PositiveNumber);
  cmd_expand->add_option("--phi", phi)->check(CLI::PositiveNumber);
  cmd_expand->add_option("--stopwords", stopwords);

  auto* cmd_owl = app.add_subcommand("export-owl", "Write the concept graph as OWL (RDF/XML)");
  cmd_owl->add_option("--index", index_path)->required();
  cmd_owl->add_option("--out", out_path)->required();
  cmd_owl->add_option("--corpus", corpus_dir);
  cmd_owl->add_option("--stopwords", stopwords);

  auto* cmd_eval = app.add_subcommand("eval", "Precision and recall at k over judged queries");
  cmd_eval->add_option("--index", index_path)->required();
  cmd_eval->add_option("--queries", queries_path, "One query per line")->required();
  cmd_eval->add_option("--qrels", qrels_path, "JSON: query -> relevant ids")->required();
  cmd_eval->add_option("--k", k)->check(CLI::PositiveNumber);
  cmd_eval->add_option("--stopwords", stopwords);

  auto* cmd_serve = app.add_subcommand("serve", "Run the HTTP service");
  cmd_serve->add_option("--index", index_path)->required();
  cmd_serve->add_option("--port", port)->check(CLI::Range(1, 65535));
  cmd_serve->add_option("--host", host);
  cmd_serve->add_option("--corpus", corpus_dir);
  cmd_serve->add_option("--store", store_path, "Persistent query file");
  cmd_serve->add_option("--static", static_dir, "Directory served at /");
  cmd_serve->add_option("--stopwords", stopwords);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const bool help = dynamic_cast<const CLI::Success*>(&e) != nullptr;
    app.exit(e, out, err);
    return help ? kExitOk : kExitUsage;
  }

  try {
    const auto config = tokenizer_for(stopwords);

    if (*cmd_index) {
      auto corpus = load_corpus(corpus_dir, config, err);
      const auto index = build_index(*corpus);
      save_index(index, out_path);
      out << "indexed " << index.N() << " documents, " << index.postings().size() << " terms -> " << out_path << '\n';
      return kExitOk;
    }

    if (*cmd_search) {
      const Engine engine(load_index(index_path), load_corpus(corpus_dir, config, err), config);
      SearchOptions opt;
      opt.model = model_from_string(model);
      opt.k = k;
      opt.smoothing = smoothing == "raw" ? Smoothing::raw : Smoothing::half;
      if (!judgments.empty()) opt.relevant = read_judgments(judgments);
      print_ranking(out, run_search(engine, interpret_query(query, config, p), opt));
      return kExitOk;
    }

    if (*cmd_expand) {
      const auto index = load_index(index_path);
      const auto interpreted = interpret_query(query, config);
      ExpansionResult r;
      r.query = interpreted.vector;
      if (!interpreted.vector.empty() && index.N() > 0) r = expand_lca(index, interpreted.vector, {m_top, k_concepts, phi});
      if (!r.expanded) err << "warning: no expansion (fewer than two documents matched)\n";
      std::vector<std::pair<Term, double>> terms(r.query.weights.begin(), r.query.weights.end());
      std::stable_sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
      for (const auto& [t, w] : terms) out << t << '\t' << format_double(w) << '\n';
      return kExitOk;
    }

    if (*cmd_owl) {
      const Engine engine(load_index(index_path), load_corpus(corpus_dir, config, err), config);
      const auto owl = export_owl(concept_graph_from_inference(engine.network()));
      std::ofstream f(out_path, std::ios::binary);
      f << owl.text;
      if (!f.flush()) throw Error(Errc::io, "cannot write " + out_path);
      out << "wrote " << owl.class_count << " classes -> " << out_path << '\n';
      return kExitOk;
    }

    if (*cmd_eval) {
      const auto report = evaluate(load_index(index_path), read_query_lines(queries_path), read_qrels(qrels_path), k, config);
      out << "query\tP@" << k << "\tR@" << k << '\n';
      for (const auto& q : report.queries) {
        out << q.query << '\t' << format_double(q.precision) << '\t' << format_double(q.recall) << '\n';
      }
      out << "macro\t" << format_double(report.macro_precision) << '\t' << format_double(report.macro_recall) << '\n';
      return kExitOk;
    }

    if (*cmd_serve) {
      auto engine = std::make_shared<const Engine>(load_index(index_path), load_corpus(corpus_dir, config, err), config);
      auto store = std::make_shared<QueryStore>(store_path);
      const Service service(engine, store);
      HttpServer server(service, static_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(static_dir));
      const int bound = server.bind(host, resolve_port(port, std::getenv("MIRSTAT_PORT")));
      out << "listening on http://" << host << ':' << bound << std::endl;
      server.listen();
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "mirstat: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "mirstat: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace mirstat
