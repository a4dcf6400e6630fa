#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "../support/tempdir.hpp"
#include "mirstat/cli.hpp"
#include "mirstat/service.hpp"

using namespace mirstat;
using testing_support::TempDir;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "mirstat");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string corpus_dir() { return (testing_support::fixtures() / "corpus").string(); }

std::string indexed(const TempDir& dir) {
  const auto path = (dir / "index.json").string();
  const auto r = run({"index", "--corpus", corpus_dir(), "--out", path});
  REQUIRE(r.code == 0);
  return path;
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"search", "--query", "cat"}).code == kExitUsage);
  CHECK(run({"search", "--index", "x", "--query", "cat", "--bogus"}).code == kExitUsage);
  CHECK(run({"search", "--index", "x", "--query", "cat", "--model", "vsm"}).code == kExitUsage);
  CHECK(run({"--help"}).code == kExitOk);

  TempDir dir;
  const auto missing = run({"search", "--index", (dir / "nope.json").string(), "--query", "cat"});
  CHECK(missing.code == kExitData);
  CHECK(missing.err.find("nope.json") != std::string::npos);

  const auto ix = indexed(dir);
  const auto bad = run({"search", "--index", ix, "--query", "cat AND"});
  CHECK(bad.code == kExitData);
  CHECK(bad.err.find("column 8") != std::string::npos);
}

TEST_CASE("index then search prints the library ranking") {
  TempDir dir;
  const auto ix = indexed(dir);
  const auto index = load_index(ix);
  CHECK(index.N() == 10);

  const auto cfg = TokenizerConfig::defaults();
  for (const char* q : {"cat", "cat OR kitten", "market AND bond", "(dog:0.3 OR cat)^3 AND kitten"}) {
    const auto r = run({"search", "--index", ix, "--query", q, "--k", "5"});
    REQUIRE(r.code == 0);
    const Engine engine(load_index(ix), std::nullopt, cfg);
    std::string expect;
    for (const auto& d : run_search(engine, interpret_query(q, cfg), {Model::pnorm, 5})) {
      expect += d.doc_id + "\t" + format_double(d.score) + "\n";
    }
    CHECK(r.out == expect);
  }

  const auto cat = lines(run({"search", "--index", ix, "--query", "cat"}).out);
  REQUIRE(cat.size() == 5);
  CHECK(cat[0].starts_with("d05\t"));

  const auto judged = (dir / "rel.json").string();
  std::ofstream(judged) << R"(["d01","d03"])";
  const auto bim = run({"search", "--index", ix, "--query", "cat OR kitten", "--model", "bim", "--judgments", judged});
  CHECK(bim.code == 0);
  CHECK_FALSE(bim.out.empty());
}

TEST_CASE("eval on the fixture") {
  TempDir dir;
  const auto ix = indexed(dir);
  const auto fx = testing_support::fixtures() / "eval";
  const auto r = run({"eval", "--index", ix, "--queries", (fx / "queries.txt").string(), "--qrels", (fx / "qrels.json").string(),
                      "--k", "3"});
  REQUIRE(r.code == 0);
  const auto out = lines(r.out);
  REQUIRE(out.size() == 4);
  CHECK(out[0] == "query\tP@3\tR@3");
  CHECK(out[1] == "cat\t" + format_double(2.0 / 3.0) + "\t0.5");
  CHECK(out[2] == "market\t" + format_double(2.0 / 3.0) + "\t1");
  CHECK(out[3] == "macro\t" + format_double(2.0 / 3.0) + "\t0.75");

  // independent recount from the ranked lists
  const Engine engine(load_index(ix), std::nullopt);
  const std::map<std::string, std::set<DocId>> qrels{{"cat", {"d01", "d03", "d08", "d10"}}, {"market", {"d04", "d09"}}};
  for (const auto& [q, rel] : qrels) {
    const auto top = run_search(engine, interpret_query(q, engine.tokenizer()), {Model::pnorm, 3});
    std::size_t hits = 0;
    for (auto& d : top) hits += rel.count(d.doc_id);
    const auto row = std::find_if(out.begin(), out.end(), [&](auto& l) { return l.starts_with(q + "\t"); });
    REQUIRE(row != out.end());
    CHECK(*row == q + "\t" + format_double(double(hits) / 3) + "\t" + format_double(double(hits) / rel.size()));
  }

  const auto qr = (dir / "partial.json").string();
  std::ofstream(qr) << R"({"cat": ["d01"]})";
  CHECK(run({"eval", "--index", ix, "--queries", (fx / "queries.txt").string(), "--qrels", qr}).code == kExitData);
}

TEST_CASE("expand and export-owl") {
  TempDir dir;
  const auto ix = indexed(dir);
  const auto e = run({"expand", "--index", ix, "--query", "kitten", "--m", "3", "--k", "2"});
  REQUIRE(e.code == 0);
  const auto rows = lines(e.out);
  REQUIRE(rows.size() == 3);
  // original term and best concept both carry weight 1; ties print alphabetically
  CHECK(std::count(rows.begin(), rows.end(), "kitten\t1") == 1);
  CHECK(rows[0].ends_with("\t1"));

  const auto z = run({"expand", "--index", ix, "--query", "zebra"});
  CHECK(z.code == 0);
  CHECK(z.out == "zebra\t1\n");
  CHECK(z.err.find("warning") != std::string::npos);

  const auto owl_path = (dir / "c.owl").string();
  const auto o = run({"export-owl", "--index", ix, "--corpus", corpus_dir(), "--out", owl_path});
  REQUIRE(o.code == 0);
  std::ifstream f(owl_path);
  const std::string text((std::istreambuf_iterator<char>(f)), {});
  CHECK(text.starts_with("<?xml"));
  CHECK(text.find("urn:mir:concept:satellite") != std::string::npos);
  CHECK(run({"export-owl", "--index", ix, "--out", (dir / "no" / "c.owl").string()}).code == kExitData);
}
