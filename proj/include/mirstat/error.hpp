#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mirstat {

enum class Errc {
  invalid_argument,
  syntax,
  range,
  not_found,
  io,
  parse,
  version,
  degenerate,
  not_a_dag,
};

/// Base exception for every library failure. `code()` lets callers map
/// failures onto exit codes or HTTP statuses without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Query-language error carrying the 1-based column of the offending token.
class QueryError : public Error {
 public:
  QueryError(Errc code, std::size_t column, const std::string& what)
      : Error(code, what + " at column " + std::to_string(column)), column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

const char* errc_name(Errc code) noexcept;

}  // namespace mirstat
