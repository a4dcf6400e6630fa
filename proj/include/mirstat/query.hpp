#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mirstat/corpus.hpp"
#include "mirstat/types.hpp"

namespace mirstat {

/// Weighted Boolean query tree. Term leaves carry a weight in (0, 1];
/// And/Or nodes carry >= 2 children and an exponent p >= 1.
struct QueryNode {
  enum class Kind { term, all_of, any_of };

  Kind kind = Kind::term;
  Term term;
  double weight = 1.0;
  std::vector<QueryNode> children;
  double p = 2.0;

  static QueryNode leaf(Term t, double w = 1.0) { return {Kind::term, std::move(t), w, {}, 2.0}; }
  static QueryNode all_of(std::vector<QueryNode> c, double p = 2.0) { return {Kind::all_of, {}, 1.0, std::move(c), p}; }
  static QueryNode any_of(std::vector<QueryNode> c, double p = 2.0) { return {Kind::any_of, {}, 1.0, std::move(c), p}; }

  bool is_term() const noexcept { return kind == Kind::term; }
  bool operator==(const QueryNode&) const = default;
};

struct ParseOptions {
  double default_weight = 1.0;
  double default_p = 2.0;
};

/// Grammar:
///   expr := or
///   or   := and ("OR" and)*
///   and  := atom ("AND" atom)*
///   atom := TERM (":" WEIGHT)? | "(" expr ")" ("^" P)?
/// Operators are case-insensitive. Throws QueryError with a 1-based column.
QueryNode parse_query(std::string_view input, const ParseOptions& options = {});

/// Debug rendering that parses back to an equal tree.
std::string to_string(const QueryNode& node);

/// Run each term through the tokenizer. Stopword terms are dropped (a group
/// left with one child collapses onto it); a term that splits into several
/// tokens becomes an AND of them. Returns nullopt when nothing survives.
std::optional<QueryNode> normalize_query(const QueryNode& node, const TokenizerConfig& config,
                                         double default_p = 2.0);

/// Term leaves in left-to-right order with their weights.
std::vector<std::pair<Term, double>> query_terms(const QueryNode& node);

}  // namespace mirstat
