#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "lazytamp/model.hpp"

namespace lazytamp {

enum class ParseErrorKind { kSyntax, kArityMismatch, kUnknownSymbol, kDuplicateDefinition };

std::string_view to_string(ParseErrorKind kind);

/// Every parse failure carries the 1-based source location it refers to.
class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, int line, int column, const std::string& message,
             const std::string& origin = {});

  ParseErrorKind kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  ParseErrorKind kind_;
  int line_;
  int column_;
  std::string message_;
};

/// Raised by serialize_plan when a stream-produced parameter has no value.
struct UnboundParameterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses a domain: predicates, actions and `:stream` declarations. Each
/// predicate is classified as fluent (appears in some action effect),
/// stream-certified (static and certified by some stream) or static-given.
DomainDefinition parse_domain(std::string_view source, std::string_view origin = "<domain>");

/// Parses a problem against `domain`. Objects are declared implicitly by the
/// facts of `:init` and `:goal`; `:values` attaches continuous payloads.
ProblemInstance parse_problem(std::string_view source, const DomainDefinition& domain,
                              std::string_view origin = "<problem>");

/// One action per line: `(name arg ...)`. Initial objects are written by
/// name, bound parameters as `param=v0,v1,...` with six decimals.
std::string serialize_plan(const GroundedPlan& plan);

/// Reads the output of serialize_plan back. Object arguments come back with an
/// empty `param`.
GroundedPlan read_plan(std::string_view text, std::string_view origin = "<plan>");

std::string format_values(std::span<const double> values);

}  // namespace lazytamp
