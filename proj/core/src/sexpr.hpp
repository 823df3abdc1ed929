#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lazytamp/parser.hpp"

namespace lazytamp::detail {

struct SExpr {
  bool is_list = false;
  std::string atom;
  std::vector<SExpr> items;
  int line = 1;
  int column = 1;

  bool is_atom() const { return !is_list; }
  bool is_atom(std::string_view text) const { return !is_list && atom == text; }
  bool is_variable() const { return !is_list && !atom.empty() && atom.front() == '?'; }
};

/// Reads every top-level s-expression. `;` starts a comment that runs to the
/// end of the line.
std::vector<SExpr> read_sexprs(std::string_view text, const std::string& origin);

[[noreturn]] void fail(ParseErrorKind kind, const SExpr& at, const std::string& message, const std::string& origin);

}  // namespace lazytamp::detail
