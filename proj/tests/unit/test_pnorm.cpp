#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "mirstat/error.hpp"
#include "mirstat/pnorm.hpp"

using namespace mirstat;

namespace {

const TokenizerConfig kPlain{{}, false, 1};

InvertedIndex index_of(const std::vector<std::pair<std::string, oracle::Tokens>>& docs) {
  std::vector<Document> d;
  for (auto& [id, toks] : docs) {
    std::string body;
    for (auto& t : toks) body += t + " ";
    d.push_back({id, "", body, "", MediaType::text, {}});
  }
  return build_index(Corpus(d, kPlain));
}

using V = std::vector<double>;

}  // namespace

TEST_CASE("eval_and: examples") {
  CHECK(eval_and(V{1, 1}, V{0.3, 0.9}, 7.0) == 1.0);
  CHECK(eval_and(V{0.5, 0.5}, V{1, 1}, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(eval_and(V{1, 0}, V{1, 1}, 2.0) == doctest::Approx(1 - std::sqrt(0.5)).epsilon(1e-15));
  CHECK(eval_and(V{1, 0}, V{1, 1}, 2.0) == doctest::Approx(0.292893).epsilon(1e-6));
}

TEST_CASE("eval_or: examples") {
  CHECK(eval_or(V{0, 0}, V{1, 1}, 2.0) == 0.0);
  CHECK(eval_or(V{1, 0}, V{1, 1}, 2.0) == doctest::Approx(0.707107).epsilon(1e-6));
  CHECK(eval_or(V{0.5, 0.5}, V{1, 1}, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("eval_and/eval_or: invalid operands") {
  CHECK_THROWS_AS(eval_and(V{1, 0}, V{1}, 2.0), Error);
  CHECK_THROWS_AS(eval_or(V{}, V{}, 2.0), Error);
  CHECK_THROWS_AS(eval_or(V{0.5}, V{1}, 0.5), Error);
  CHECK_THROWS_AS(eval_or(V{1.5}, V{1}, 2.0), Error);
  CHECK_THROWS_AS(eval_or(V{0.5}, V{0}, 2.0), Error);
  CHECK_THROWS_AS(eval_and(V{0.5}, V{1}, INFINITY), Error);
}

TEST_CASE("p-norm laws over random operands") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = 1 + rng() % 6;
    V wd(n), wq(n);
    for (auto& x : wd) x = rng() % 5 == 0 ? double(rng() % 2) : oracle::uniform(rng, 0, 1);
    for (auto& x : wq) x = oracle::uniform(rng, 0.01, 1);
    const double p = rng() % 4 == 0 ? 1.0 : oracle::uniform(rng, 1, 30);

    const double a = eval_and(wd, wq, p), o = eval_or(wd, wq, p);
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
    CHECK(o >= 0.0);
    CHECK(o <= 1.0);
    CHECK(a <= o + 1e-12);
    CHECK(a == doctest::Approx(oracle::pnorm_and(wd, wq, p)).epsilon(1e-10));
    CHECK(o == doctest::Approx(oracle::pnorm_or(wd, wq, p)).epsilon(1e-10));

    double mean = 0, wsum = 0;
    for (std::size_t j = 0; j < n; ++j) {
      mean += wd[j] * wq[j];
      wsum += wq[j];
    }
    mean /= wsum;
    CHECK(std::abs(eval_and(wd, wq, 1.0) - mean) <= 1e-12);
    CHECK(std::abs(eval_or(wd, wq, 1.0) - mean) <= 1e-12);

    // with uniform weights the gap to min/max is at most (1 - n^(-1/p)) scaled by the extreme
    V uniform_wq(n, 1.0);
    const double mn = *std::min_element(wd.begin(), wd.end()), mx = *std::max_element(wd.begin(), wd.end());
    const double shrink = 1.0 - std::pow(double(n), -1.0 / 100.0);
    CHECK(mn - eval_and(wd, uniform_wq, 100.0) <= 1e-12);
    CHECK(eval_and(wd, uniform_wq, 100.0) - mn <= shrink * (1 - mn) + 1e-12);
    CHECK(eval_or(wd, uniform_wq, 100.0) - mx <= 1e-12);
    CHECK(mx - eval_or(wd, uniform_wq, 100.0) <= shrink * mx + 1e-12);
    if (n <= 2) {
      CHECK(std::abs(eval_and(wd, uniform_wq, 100.0) - mn) <= 1e-2);
      CHECK(std::abs(eval_or(wd, uniform_wq, 100.0) - mx) <= 1e-2);
    }

    // raising one document weight never lowers either score
    V up = wd;
    const std::size_t j = rng() % n;
    up[j] = std::min(1.0, up[j] + oracle::uniform(rng, 0, 1));
    CHECK(eval_and(up, wq, p) >= a - 1e-12);
    CHECK(eval_or(up, wq, p) >= o - 1e-12);
  }
}

TEST_CASE("large p with small weights stays finite") {
  CHECK(eval_or(V{0.5, 0.25}, V{1e-3, 1e-3}, 500.0) == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(std::isfinite(eval_and(V{0.5, 0.25}, V{1e-3, 2e-3}, 900.0)));
}

TEST_CASE("score_pnorm: examples") {
  auto ix = index_of({{"d1", {"a", "b"}}, {"d2", {"c"}}, {"d3", {"a", "c", "c"}}});
  CHECK(score_pnorm(ix, parse_query("zzz"), "d1") == 0.0);
  CHECK(score_pnorm(ix, parse_query("b"), "d2") == 0.0);
  // d1: a has idf ln(3/2), b has ln 3, so b is the max and a is not 1
  CHECK(score_pnorm(ix, parse_query("b"), "d1") == 1.0);

  auto both = index_of({{"d1", {"a", "b"}}, {"d2", {"x"}}});
  CHECK(score_pnorm(both, parse_query("a AND b"), "d1") == 1.0);
  CHECK_THROWS_AS(score_pnorm(both, parse_query("a"), "nope"), Error);
}

TEST_CASE("score_pnorm equals the recursive oracle") {
  const std::vector<std::pair<std::string, oracle::Tokens>> docs{
      {"d1", {"a", "b", "b"}}, {"d2", {"b", "c"}}, {"d3", {"a", "c", "c", "c"}}};
  const oracle::BruteIndex brute(docs);
  const auto ix = index_of(docs);
  for (const char* q : {"(a AND b) OR c", "(a AND b)^3 OR c:0.4", "a:0.2 AND (b OR c)^1.5", "((a OR b) AND (b OR c))^8",
                        "a OR zzz", "a AND zzz"}) {
    const auto tree = parse_query(q);
    for (std::size_t d = 0; d < 3; ++d) {
      CHECK(score_pnorm(ix, tree, brute.ids[d]) == doctest::Approx(oracle::pnorm_tree(brute, tree, d)).epsilon(1e-12));
    }
  }
}

TEST_CASE("rank_pnorm: examples") {
  CHECK(rank_pnorm(index_of({}), parse_query("cat"), 10).empty());

  const std::vector<std::pair<std::string, oracle::Tokens>> docs{
      {"d1", {"cat", "dog", "dog"}}, {"d2", {"cat", "cat", "eel"}}, {"d3", {"fox"}}, {"d4", {"fox", "gnu"}}};
  const oracle::BruteIndex brute(docs);
  const auto ix = index_of(docs);
  const auto ranked = rank_pnorm(ix, parse_query("cat"), 10);
  REQUIRE(ranked.size() == 2);
  CHECK(ranked[0].score >= ranked[1].score);
  for (const auto& r : ranked) {
    const auto d = std::find(brute.ids.begin(), brute.ids.end(), r.doc_id) - brute.ids.begin();
    CHECK(r.score == doctest::Approx(brute.weight(d, "cat")).epsilon(1e-12));
  }

  auto twins = index_of({{"b", {"cat", "x"}}, {"a", {"cat", "x"}}, {"c", {"dog"}}});
  const auto tie = rank_pnorm(twins, parse_query("cat"), 10);
  REQUIRE(tie.size() == 2);
  CHECK(tie[0].doc_id == "a");
  CHECK(tie[1].doc_id == "b");
  CHECK(tie[0].score == tie[1].score);

  CHECK(rank_pnorm(twins, parse_query("cat"), 1).size() == 1);
  CHECK_THROWS_AS(rank_pnorm(twins, parse_query("cat"), 0), Error);
}

TEST_CASE("rank_pnorm equals brute-force ranking; serial equals parallel") {
  std::mt19937_64 rng(43);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e", "f"};
  for (int round = 0; round < 40; ++round) {
    std::vector<std::pair<std::string, oracle::Tokens>> docs;
    for (int i = 0, n = 2 + rng() % 30; i < n; ++i) {
      oracle::Tokens t;
      for (int j = 0, len = 1 + rng() % 8; j < len; ++j) t.push_back(vocab[rng() % vocab.size()]);
      docs.push_back({"d" + std::to_string(1000 + i), t});
    }
    const oracle::BruteIndex brute(docs);
    const auto ix = index_of(docs);
    const auto tree = parse_query("(a:0.7 AND b) OR (c OR d:0.3)^4");
    std::vector<ScoredDoc> expected;
    for (std::size_t d = 0; d < brute.ids.size(); ++d) {
      const double s = oracle::pnorm_tree(brute, tree, d);
      if (s > 0) expected.push_back({brute.ids[d], s});
    }
    std::sort(expected.begin(), expected.end(), [](auto& x, auto& y) {
      return x.score != y.score ? x.score > y.score : x.doc_id < y.doc_id;
    });
    const std::size_t k = 1 + rng() % 10;
    if (expected.size() > k) expected.resize(k);

    const auto serial = rank_pnorm(ix, tree, k, Execution::serial);
    const auto parallel = rank_pnorm(ix, tree, k, Execution::parallel);
    CHECK(serial == parallel);
    REQUIRE(serial.size() == expected.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      CHECK(serial[i].score == doctest::Approx(expected[i].score).epsilon(1e-12));
    }
    for (std::size_t i = 1; i < serial.size(); ++i) {
      CHECK((serial[i - 1].score > serial[i].score ||
             (serial[i - 1].score == serial[i].score && serial[i - 1].doc_id < serial[i].doc_id)));
    }
  }
}
