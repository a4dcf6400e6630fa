#include "mirstat/query.hpp"

#include <charconv>
#include <cmath>

#include "mirstat/error.hpp"
#include "mirstat/index.hpp"

namespace mirstat {

namespace {

struct Token {
  enum class Kind { word, op_and, op_or, lparen, rparen, colon, caret, end };
  Kind kind;
  std::string_view text;
  std::size_t column;  // 1-based, in code points
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    char x = a[i];
    if (x >= 'a' && x <= 'z') x = static_cast<char>(x - 32);
    if (x != b[i]) return false;
  }
  return true;
}

std::vector<Token> lex(std::string_view in) {
  std::vector<Token> out;
  std::size_t column = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t to) {
    for (; i < to; ++i) {
      if ((static_cast<unsigned char>(in[i]) & 0xC0) != 0x80) ++column;
    }
  };
  while (i < in.size()) {
    const char c = in[i];
    if (is_space(c)) {
      advance(i + 1);
      continue;
    }
    const std::size_t start = i;
    const std::size_t col = column;
    Token::Kind kind;
    switch (c) {
      case '(': kind = Token::Kind::lparen; break;
      case ')': kind = Token::Kind::rparen; break;
      case ':': kind = Token::Kind::colon; break;
      case '^': kind = Token::Kind::caret; break;
      default: kind = Token::Kind::word; break;
    }
    if (kind != Token::Kind::word) {
      advance(i + 1);
    } else {
      std::size_t j = i;
      while (j < in.size() && !is_space(in[j]) && in[j] != '(' && in[j] != ')' && in[j] != ':' && in[j] != '^') ++j;
      advance(j);
    }
    std::string_view text = in.substr(start, i - start);
    if (kind == Token::Kind::word) {
      if (iequals(text, "AND")) kind = Token::Kind::op_and;
      else if (iequals(text, "OR")) kind = Token::Kind::op_or;
    }
    out.push_back({kind, text, col});
  }
  out.push_back({Token::Kind::end, {}, column});
  return out;
}

std::string describe(const Token& t) {
  return t.kind == Token::Kind::end ? "end of input" : "'" + std::string(t.text) + "'";
}

class Parser {
 public:
  Parser(std::string_view input, const ParseOptions& opts) : tokens_(lex(input)), opts_(opts) {}

  QueryNode parse() {
    QueryNode root = parse_or();
    if (peek().kind != Token::Kind::end) {
      throw QueryError(Errc::syntax, peek().column, "syntax error: unexpected " + describe(peek()));
    }
    return root;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& take() { return tokens_[pos_++]; }

  QueryNode parse_or() {
    std::vector<QueryNode> parts;
    parts.push_back(parse_and());
    while (peek().kind == Token::Kind::op_or) {
      take();
      parts.push_back(parse_and());
    }
    if (parts.size() == 1) return std::move(parts.front());
    return QueryNode::any_of(std::move(parts), opts_.default_p);
  }

  QueryNode parse_and() {
    std::vector<QueryNode> parts;
    parts.push_back(parse_atom());
    while (peek().kind == Token::Kind::op_and) {
      take();
      parts.push_back(parse_atom());
    }
    if (parts.size() == 1) return std::move(parts.front());
    return QueryNode::all_of(std::move(parts), opts_.default_p);
  }

  QueryNode parse_atom() {
    const Token& t = take();
    if (t.kind == Token::Kind::word) {
      double weight = opts_.default_weight;
      if (peek().kind == Token::Kind::colon) {
        take();
        const Token& num = take();
        weight = parse_number(num, "weight");
        if (!(weight > 0.0 && weight <= 1.0)) {
          throw QueryError(Errc::range, num.column, "weight " + std::string(num.text) + " outside (0, 1]");
        }
      }
      return QueryNode::leaf(Term(t.text), weight);
    }
    if (t.kind == Token::Kind::lparen) {
      QueryNode inner = parse_or();
      const Token& close = take();
      if (close.kind != Token::Kind::rparen) {
        throw QueryError(Errc::syntax, close.column, "syntax error: expected ')' but found " + describe(close));
      }
      if (peek().kind == Token::Kind::caret) {
        const Token& caret = take();
        if (inner.is_term()) {
          throw QueryError(Errc::syntax, caret.column, "syntax error: '^' applies only to AND/OR groups");
        }
        const Token& num = take();
        const double p = parse_number(num, "exponent");
        if (!(p >= 1.0) || !std::isfinite(p)) {
          throw QueryError(Errc::range, num.column, "exponent " + std::string(num.text) + " must be >= 1");
        }
        inner.p = p;
      }
      return inner;
    }
    throw QueryError(Errc::syntax, t.column, "syntax error: expected term or '(' but found " + describe(t));
  }

  static double parse_number(const Token& t, const char* what) {
    double v = 0.0;
    if (t.kind == Token::Kind::word) {
      auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
      if (ec == std::errc() && ptr == t.text.data() + t.text.size()) return v;
    }
    throw QueryError(Errc::syntax, t.column, std::string("syntax error: expected ") + what + " but found " + describe(t));
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  ParseOptions opts_;
};

void collect_terms(const QueryNode& node, std::vector<std::pair<Term, double>>& out) {
  if (node.is_term()) {
    out.emplace_back(node.term, node.weight);
    return;
  }
  for (const auto& c : node.children) collect_terms(c, out);
}

}  // namespace

QueryNode parse_query(std::string_view input, const ParseOptions& options) {
  return Parser(input, options).parse();
}

std::string to_string(const QueryNode& node) {
  if (node.is_term()) return node.term + ":" + format_double(node.weight);
  std::string out = "(";
  const char* op = node.kind == QueryNode::Kind::all_of ? " AND " : " OR ";
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    if (i) out += op;
    out += to_string(node.children[i]);
  }
  return out + ")^" + format_double(node.p);
}

std::optional<QueryNode> normalize_query(const QueryNode& node, const TokenizerConfig& config, double default_p) {
  if (node.is_term()) {
    auto tokens = tokenize(node.term, config);
    if (tokens.empty()) return std::nullopt;
    if (tokens.size() == 1) return QueryNode::leaf(std::move(tokens.front()), node.weight);
    std::vector<QueryNode> parts;
    for (auto& t : tokens) parts.push_back(QueryNode::leaf(std::move(t), node.weight));
    return QueryNode::all_of(std::move(parts), default_p);
  }
  std::vector<QueryNode> kept;
  for (const auto& c : node.children) {
    if (auto n = normalize_query(c, config, default_p)) kept.push_back(std::move(*n));
  }
  if (kept.empty()) return std::nullopt;
  if (kept.size() == 1) return std::move(kept.front());
  QueryNode out = node;
  out.children = std::move(kept);
  return out;
}

std::vector<std::pair<Term, double>> query_terms(const QueryNode& node) {
  std::vector<std::pair<Term, double>> out;
  collect_terms(node, out);
  return out;
}

}  // namespace mirstat
