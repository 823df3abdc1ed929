#include "lazytamp/parser.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <set>

#include "sexpr.hpp"

namespace lazytamp {

std::string_view to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::kSyntax: return "syntax";
    case ParseErrorKind::kArityMismatch: return "arity-mismatch";
    case ParseErrorKind::kUnknownSymbol: return "unknown-symbol";
    case ParseErrorKind::kDuplicateDefinition: return "duplicate-definition";
  }
  return "syntax";
}

ParseError::ParseError(ParseErrorKind kind, int line, int column, const std::string& message,
                       const std::string& origin)
    : std::runtime_error((origin.empty() ? std::string() : origin + ":") + std::to_string(line) + ":" +
                         std::to_string(column) + ": " + std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      line_(line),
      column_(column),
      message_(message) {}

namespace detail {

void fail(ParseErrorKind kind, const SExpr& at, const std::string& message, const std::string& origin) {
  throw ParseError(kind, at.line, at.column, message, origin);
}

std::vector<SExpr> read_sexprs(std::string_view text, const std::string& origin) {
  std::vector<SExpr> top;
  std::vector<SExpr> stack;  // open lists
  int line = 1, column = 1;
  std::size_t i = 0;
  auto advance = [&](char c) {
    if (c == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
    ++i;
  };
  auto push = [&](SExpr e) {
    if (stack.empty()) {
      top.push_back(std::move(e));
    } else {
      stack.back().items.push_back(std::move(e));
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == ';') {
      while (i < text.size() && text[i] != '\n') advance(text[i]);
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(c);
    } else if (c == '(') {
      SExpr list;
      list.is_list = true;
      list.line = line;
      list.column = column;
      stack.push_back(std::move(list));
      advance(c);
    } else if (c == ')') {
      if (stack.empty()) throw ParseError(ParseErrorKind::kSyntax, line, column, "unbalanced ')'", origin);
      SExpr done = std::move(stack.back());
      stack.pop_back();
      push(std::move(done));
      advance(c);
    } else {
      SExpr atom;
      atom.line = line;
      atom.column = column;
      while (i < text.size()) {
        char d = text[i];
        if (d == '(' || d == ')' || d == ';' || d == ' ' || d == '\t' || d == '\r' || d == '\n') break;
        atom.atom.push_back(d);
        advance(d);
      }
      push(std::move(atom));
    }
  }
  if (!stack.empty()) {
    const SExpr& open = stack.back();
    throw ParseError(ParseErrorKind::kSyntax, open.line, open.column, "unbalanced '(' never closed", origin);
  }
  return top;
}

}  // namespace detail

namespace {

using detail::fail;
using detail::SExpr;

class DomainReader {
 public:
  explicit DomainReader(std::string origin) : origin_(std::move(origin)) {}

  DomainDefinition read(const std::vector<SExpr>& top) {
    if (top.size() != 1) {
      if (top.empty()) throw ParseError(ParseErrorKind::kSyntax, 1, 1, "empty domain", origin_);
      fail(ParseErrorKind::kSyntax, top[1], "expected a single (define ...) form", origin_);
    }
    const SExpr& def = top.front();
    expect_head(def, "define");
    if (def.items.size() < 2 || !def.items[1].is_list || def.items[1].items.size() != 2 ||
        !def.items[1].items[0].is_atom("domain") || !def.items[1].items[1].is_atom()) {
      fail(ParseErrorKind::kSyntax, def, "expected (define (domain <name>) ...)", origin_);
    }
    dom_.name = def.items[1].items[1].atom;

    // Predicates first so that actions and streams may appear in any order.
    for (std::size_t k = 2; k < def.items.size(); ++k) {
      const SExpr& section = def.items[k];
      if (!section.is_list || section.items.empty() || !section.items[0].is_atom()) {
        fail(ParseErrorKind::kSyntax, section, "expected a domain section", origin_);
      }
      if (section.items[0].atom == ":predicates") read_predicates(section);
    }
    for (std::size_t k = 2; k < def.items.size(); ++k) {
      const SExpr& section = def.items[k];
      const std::string& key = section.items[0].atom;
      if (key == ":predicates" || key == ":requirements" || key == ":types") continue;
      if (key == ":action") {
        read_action(section);
      } else if (key == ":stream") {
        read_stream(section);
      } else {
        fail(ParseErrorKind::kSyntax, section.items[0], "unsupported domain section '" + key + "'", origin_);
      }
    }
    classify();
    return std::move(dom_);
  }

 private:
  struct Scope {
    std::vector<std::string> names;
    int find(std::string_view n) const {
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == n) return static_cast<int>(i);
      }
      return -1;
    }
  };

  void expect_head(const SExpr& e, std::string_view head) {
    if (!e.is_list || e.items.empty() || !e.items[0].is_atom(head)) {
      fail(ParseErrorKind::kSyntax, e, "expected (" + std::string(head) + " ...)", origin_);
    }
  }

  std::vector<Parameter> read_parameters(const SExpr& list, Scope& scope) {
    if (!list.is_list) fail(ParseErrorKind::kSyntax, list, "expected a parameter list", origin_);
    std::vector<Parameter> params;
    std::size_t untyped_from = 0;
    for (std::size_t i = 0; i < list.items.size(); ++i) {
      const SExpr& tok = list.items[i];
      if (tok.is_atom("-")) {
        if (i + 1 >= list.items.size() || !list.items[i + 1].is_atom() || list.items[i + 1].is_variable()) {
          fail(ParseErrorKind::kSyntax, tok, "expected a type name after '-'", origin_);
        }
        for (std::size_t j = untyped_from; j < params.size(); ++j) params[j].type = list.items[i + 1].atom;
        untyped_from = params.size();
        ++i;
        continue;
      }
      if (!tok.is_variable() || tok.atom.size() < 2) fail(ParseErrorKind::kSyntax, tok, "expected a ?variable", origin_);
      std::string name = tok.atom.substr(1);
      if (scope.find(name) >= 0) {
        fail(ParseErrorKind::kDuplicateDefinition, tok, "duplicate parameter '?" + name + "'", origin_);
      }
      scope.names.push_back(name);
      params.push_back(Parameter{name, "object"});
    }
    return params;
  }

  void read_predicates(const SExpr& section) {
    for (std::size_t i = 1; i < section.items.size(); ++i) {
      const SExpr& decl = section.items[i];
      if (!decl.is_list || decl.items.empty() || !decl.items[0].is_atom() || decl.items[0].is_variable()) {
        fail(ParseErrorKind::kSyntax, decl, "expected (<predicate> ?args...)", origin_);
      }
      const std::string& name = decl.items[0].atom;
      if (dom_.find_predicate(name)) {
        fail(ParseErrorKind::kDuplicateDefinition, decl.items[0], "duplicate predicate '" + name + "'", origin_);
      }
      SExpr params = decl;
      params.items.erase(params.items.begin());
      Scope scope;
      auto ps = read_parameters(params, scope);
      if (ps.size() > kMaxArity) fail(ParseErrorKind::kSyntax, decl, "predicate arity exceeds limit", origin_);
      PredicateDecl pd;
      pd.name = name;
      for (auto& p : ps) pd.params.push_back(p.name);
      dom_.predicates.push_back(std::move(pd));
      if (dom_.predicates.size() > std::numeric_limits<PredicateId>::max()) {
        fail(ParseErrorKind::kSyntax, decl, "too many predicates", origin_);
      }
    }
  }

  AtomTemplate read_atom(const SExpr& e, const Scope& scope) {
    if (!e.is_list || e.items.empty() || !e.items[0].is_atom() || e.items[0].is_variable()) {
      fail(ParseErrorKind::kSyntax, e, "expected an atom (<predicate> ?args...)", origin_);
    }
    auto pred = dom_.find_predicate(e.items[0].atom);
    if (!pred) fail(ParseErrorKind::kUnknownSymbol, e.items[0], "undeclared predicate '" + e.items[0].atom + "'", origin_);
    if (e.items.size() - 1 != dom_.predicates[*pred].arity()) {
      fail(ParseErrorKind::kArityMismatch, e,
           "predicate '" + e.items[0].atom + "' expects " + std::to_string(dom_.predicates[*pred].arity()) +
               " arguments, got " + std::to_string(e.items.size() - 1),
           origin_);
    }
    AtomTemplate atom;
    atom.predicate = *pred;
    for (std::size_t i = 1; i < e.items.size(); ++i) {
      const SExpr& arg = e.items[i];
      if (!arg.is_variable()) {
        fail(arg.is_list ? ParseErrorKind::kSyntax : ParseErrorKind::kUnknownSymbol, arg,
             "domain atoms may only mention declared ?variables", origin_);
      }
      int v = scope.find(arg.atom.substr(1));
      if (v < 0) fail(ParseErrorKind::kUnknownSymbol, arg, "undeclared variable '" + arg.atom + "'", origin_);
      atom.args.push_back(v);
    }
    return atom;
  }

  /// (and ...), a single atom, or (). With `allow_negation`, `(not atom)`
  /// goes to `negative`.
  void read_formula(const SExpr& e, const Scope& scope, std::vector<AtomTemplate>& positive,
                    std::vector<AtomTemplate>* negative) {
    if (!e.is_list) fail(ParseErrorKind::kSyntax, e, "expected a formula", origin_);
    if (e.items.empty()) return;
    if (e.items[0].is_atom("and")) {
      for (std::size_t i = 1; i < e.items.size(); ++i) read_formula(e.items[i], scope, positive, negative);
      return;
    }
    if (e.items[0].is_atom("not")) {
      if (!negative) fail(ParseErrorKind::kSyntax, e, "negation is only allowed in effects", origin_);
      if (e.items.size() != 2) fail(ParseErrorKind::kSyntax, e, "(not ...) takes exactly one atom", origin_);
      negative->push_back(read_atom(e.items[1], scope));
      return;
    }
    if (e.items[0].is_atom("or") || e.items[0].is_atom("forall") || e.items[0].is_atom("exists") ||
        e.items[0].is_atom("when") || e.items[0].is_atom("imply")) {
      fail(ParseErrorKind::kSyntax, e.items[0], "unsupported connective '" + e.items[0].atom + "'", origin_);
    }
    positive.push_back(read_atom(e, scope));
  }

  std::map<std::string, const SExpr*> read_keys(const SExpr& section, std::size_t from,
                                                std::initializer_list<std::string_view> allowed) {
    std::map<std::string, const SExpr*> keys;
    for (std::size_t i = from; i < section.items.size(); i += 2) {
      const SExpr& key = section.items[i];
      if (!key.is_atom() || key.atom.empty() || key.atom.front() != ':') {
        fail(ParseErrorKind::kSyntax, key, "expected a :keyword", origin_);
      }
      if (std::find(allowed.begin(), allowed.end(), key.atom) == allowed.end()) {
        fail(ParseErrorKind::kSyntax, key, "unexpected keyword '" + key.atom + "'", origin_);
      }
      if (i + 1 >= section.items.size()) fail(ParseErrorKind::kSyntax, key, "missing value for " + key.atom, origin_);
      if (keys.count(key.atom)) fail(ParseErrorKind::kDuplicateDefinition, key, "repeated " + key.atom, origin_);
      keys[key.atom] = &section.items[i + 1];
    }
    return keys;
  }

  void check_name(const SExpr& section, std::string_view what) {
    if (section.items.size() < 2 || !section.items[1].is_atom() || section.items[1].is_variable()) {
      fail(ParseErrorKind::kSyntax, section, "expected a " + std::string(what) + " name", origin_);
    }
    const std::string& name = section.items[1].atom;
    if (dom_.find_action(name) || dom_.find_stream(name)) {
      fail(ParseErrorKind::kDuplicateDefinition, section.items[1], "duplicate definition of '" + name + "'", origin_);
    }
  }

  void read_action(const SExpr& section) {
    check_name(section, "action");
    ActionSchema a;
    a.name = section.items[1].atom;
    auto keys = read_keys(section, 2, {":parameters", ":precondition", ":effect"});
    Scope scope;
    if (keys.count(":parameters")) a.params = read_parameters(*keys[":parameters"], scope);
    if (keys.count(":precondition")) read_formula(*keys[":precondition"], scope, a.preconditions, nullptr);
    if (keys.count(":effect")) read_formula(*keys[":effect"], scope, a.add_effects, &a.del_effects);
    dom_.actions.push_back(std::move(a));
    action_sources_.push_back(&section);
  }

  void read_stream(const SExpr& section) {
    check_name(section, "stream");
    StreamSchema s;
    s.name = section.items[1].atom;
    auto keys = read_keys(section, 2, {":inputs", ":domain", ":outputs", ":certified"});
    Scope scope;
    if (keys.count(":inputs")) s.inputs = read_parameters(*keys[":inputs"], scope);
    if (keys.count(":outputs")) s.outputs = read_parameters(*keys[":outputs"], scope);
    if (keys.count(":domain")) read_formula(*keys[":domain"], scope, s.domain, nullptr);
    if (keys.count(":certified")) read_formula(*keys[":certified"], scope, s.certified, nullptr);
    dom_.streams.push_back(std::move(s));
    stream_sources_.push_back(&section);
  }

  void classify() {
    for (const auto& a : dom_.actions) {
      for (const auto& e : a.add_effects) dom_.predicates[e.predicate].cls = PredicateClass::kFluent;
      for (const auto& e : a.del_effects) dom_.predicates[e.predicate].cls = PredicateClass::kFluent;
    }
    for (std::size_t i = 0; i < dom_.streams.size(); ++i) {
      for (const auto& c : dom_.streams[i].certified) {
        auto& decl = dom_.predicates[c.predicate];
        if (decl.cls == PredicateClass::kFluent) {
          fail(ParseErrorKind::kSyntax, *stream_sources_[i],
               "stream '" + dom_.streams[i].name + "' certifies fluent predicate '" + decl.name + "'", origin_);
        }
        decl.cls = PredicateClass::kStreamCertified;
      }
    }
    for (auto& a : dom_.actions) {
      std::vector<bool> grounded(a.params.size(), false), certified(a.params.size(), false);
      for (const auto& p : a.preconditions) {
        switch (dom_.predicates[p.predicate].cls) {
          case PredicateClass::kFluent: a.pre_fluent.push_back(p); break;
          case PredicateClass::kStaticGiven: a.pre_static.push_back(p); break;
          case PredicateClass::kStreamCertified: a.pre_certified.push_back(p); break;
        }
        auto& mark = dom_.predicates[p.predicate].cls == PredicateClass::kStreamCertified ? certified : grounded;
        for (int v : p.args) mark[static_cast<std::size_t>(v)] = true;
      }
      a.stream_param.assign(a.params.size(), false);
      for (std::size_t i = 0; i < a.params.size(); ++i) a.stream_param[i] = certified[i] && !grounded[i];
    }
  }

  std::string origin_;
  DomainDefinition dom_;
  std::vector<const SExpr*> action_sources_;
  std::vector<const SExpr*> stream_sources_;
};

class ProblemReader {
 public:
  ProblemReader(const DomainDefinition& domain, std::string origin) : dom_(domain), origin_(std::move(origin)) {}

  ProblemInstance read(const std::vector<SExpr>& top) {
    if (top.size() != 1) {
      if (top.empty()) throw ParseError(ParseErrorKind::kSyntax, 1, 1, "empty problem", origin_);
      fail(ParseErrorKind::kSyntax, top[1], "expected a single (define ...) form", origin_);
    }
    const SExpr& def = top.front();
    if (!def.is_list || def.items.size() < 2 || !def.items[0].is_atom("define") || !def.items[1].is_list ||
        def.items[1].items.size() != 2 || !def.items[1].items[0].is_atom("problem") ||
        !def.items[1].items[1].is_atom()) {
      fail(ParseErrorKind::kSyntax, def, "expected (define (problem <name>) ...)", origin_);
    }
    prob_.name = def.items[1].items[1].atom;
    const SExpr* init = nullptr;
    const SExpr* goal = nullptr;
    const SExpr* values = nullptr;
    for (std::size_t k = 2; k < def.items.size(); ++k) {
      const SExpr& section = def.items[k];
      if (!section.is_list || section.items.empty() || !section.items[0].is_atom()) {
        fail(ParseErrorKind::kSyntax, section, "expected a problem section", origin_);
      }
      const std::string& key = section.items[0].atom;
      if (key == ":domain") {
        if (section.items.size() != 2 || !section.items[1].is_atom()) {
          fail(ParseErrorKind::kSyntax, section, "expected (:domain <name>)", origin_);
        }
        prob_.domain_name = section.items[1].atom;
        if (prob_.domain_name != dom_.name) {
          fail(ParseErrorKind::kUnknownSymbol, section.items[1], "problem targets unknown domain '" + prob_.domain_name + "'",
               origin_);
        }
      } else if (key == ":objects") {
        for (std::size_t i = 1; i < section.items.size(); ++i) {
          const SExpr& o = section.items[i];
          if (o.is_atom("-")) {
            ++i;  // type annotations are accepted and ignored
            continue;
          }
          intern(o);
        }
      } else if (key == ":init") {
        init = &section;
      } else if (key == ":goal") {
        goal = &section;
      } else if (key == ":values") {
        values = &section;
      } else {
        fail(ParseErrorKind::kSyntax, section.items[0], "unsupported problem section '" + key + "'", origin_);
      }
    }
    if (init) {
      for (std::size_t i = 1; i < init->items.size(); ++i) prob_.init.push_back(read_fact(init->items[i]));
    }
    if (goal) {
      if (goal->items.size() != 2) fail(ParseErrorKind::kSyntax, *goal, "expected (:goal <formula>)", origin_);
      read_goal(goal->items[1]);
    }
    if (values) read_values(*values);
    return std::move(prob_);
  }

 private:
  ObjectId intern(const SExpr& e) {
    if (!e.is_atom() || e.is_variable() || e.atom.empty() || e.atom.front() == '#' || e.atom.front() == ':') {
      fail(ParseErrorKind::kSyntax, e, "expected an object name", origin_);
    }
    return prob_.objects.intern(e.atom);
  }

  Fact read_fact(const SExpr& e) {
    if (!e.is_list || e.items.empty() || !e.items[0].is_atom()) fail(ParseErrorKind::kSyntax, e, "expected a fact", origin_);
    if (e.items[0].is_atom("not")) fail(ParseErrorKind::kSyntax, e, "negated facts are not supported", origin_);
    auto pred = dom_.find_predicate(e.items[0].atom);
    if (!pred) fail(ParseErrorKind::kUnknownSymbol, e.items[0], "undeclared predicate '" + e.items[0].atom + "'", origin_);
    if (e.items.size() - 1 != dom_.predicates[*pred].arity()) {
      fail(ParseErrorKind::kArityMismatch, e,
           "predicate '" + e.items[0].atom + "' expects " + std::to_string(dom_.predicates[*pred].arity()) +
               " arguments, got " + std::to_string(e.items.size() - 1),
           origin_);
    }
    std::vector<ObjectId> args;
    for (std::size_t i = 1; i < e.items.size(); ++i) args.push_back(intern(e.items[i]));
    return Fact(*pred, args);
  }

  void read_goal(const SExpr& e) {
    if (!e.is_list) fail(ParseErrorKind::kSyntax, e, "expected a goal formula", origin_);
    if (e.items.empty()) return;
    if (e.items[0].is_atom("and")) {
      for (std::size_t i = 1; i < e.items.size(); ++i) read_goal(e.items[i]);
      return;
    }
    prob_.goal.push_back(read_fact(e));
  }

  void read_values(const SExpr& section) {
    std::set<ObjectId> seen;
    for (std::size_t i = 1; i < section.items.size(); ++i) {
      const SExpr& entry = section.items[i];
      if (!entry.is_list || entry.items.size() < 2) {
        fail(ParseErrorKind::kSyntax, entry, "expected (<object> <number> ...)", origin_);
      }
      if (entry.items[0].is_atom() && !prob_.objects.find(entry.items[0].atom)) {
        fail(ParseErrorKind::kUnknownSymbol, entry.items[0],
             "value for '" + entry.items[0].atom + "', which no fact mentions", origin_);
      }
      ObjectId id = intern(entry.items[0]);
      if (!seen.insert(id).second) {
        fail(ParseErrorKind::kDuplicateDefinition, entry.items[0], "repeated value for '" + entry.items[0].atom + "'",
             origin_);
      }
      std::vector<double> payload;
      for (std::size_t k = 1; k < entry.items.size(); ++k) {
        const SExpr& num = entry.items[k];
        double v = 0.0;
        const char* first = num.atom.data();
        const char* last = first + num.atom.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (!num.is_atom() || ec != std::errc() || ptr != last) {
          fail(ParseErrorKind::kSyntax, num, "expected a number", origin_);
        }
        payload.push_back(v);
      }
      prob_.objects.at(id).payload = std::move(payload);
    }
  }

  const DomainDefinition& dom_;
  std::string origin_;
  ProblemInstance prob_;
};

}  // namespace

DomainDefinition parse_domain(std::string_view source, std::string_view origin) {
  std::string o(origin);
  return DomainReader(o).read(detail::read_sexprs(source, o));
}

ProblemInstance parse_problem(std::string_view source, const DomainDefinition& domain, std::string_view origin) {
  std::string o(origin);
  return ProblemReader(domain, o).read(detail::read_sexprs(source, o));
}

// ---------------------------------------------------------------------------
// Plans

std::string format_values(std::span<const double> values) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < values.size(); ++i) {
    double v = values[i];
    if (v == 0.0) v = 0.0;  // no "-0.000000"
    std::snprintf(buf, sizeof buf, "%.6f", v);
    if (std::string_view(buf) == "-0.000000") std::snprintf(buf, sizeof buf, "%.6f", 0.0);
    if (i) out += ',';
    out += buf;
  }
  return out;
}

std::string serialize_plan(const GroundedPlan& plan) {
  std::string out;
  for (const GroundedAction& a : plan.actions) {
    out += "(" + a.name;
    for (const PlanArgument& arg : a.args) {
      out += ' ';
      if (const auto* name = std::get_if<std::string>(&arg.value)) {
        out += *name;
      } else if (const auto* vals = std::get_if<std::vector<double>>(&arg.value)) {
        out += (arg.param.empty() ? std::string("v") : arg.param) + "=" + format_values(*vals);
      } else {
        throw UnboundParameterError("parameter '" + arg.param + "' of action '" + a.name + "' is unbound");
      }
    }
    out += ")\n";
  }
  return out;
}

GroundedPlan read_plan(std::string_view text, std::string_view origin) {
  std::string o(origin);
  GroundedPlan plan;
  for (const SExpr& e : detail::read_sexprs(text, o)) {
    if (!e.is_list || e.items.empty() || !e.items[0].is_atom()) {
      detail::fail(ParseErrorKind::kSyntax, e, "expected (<action> args...)", o);
    }
    GroundedAction a;
    a.name = e.items[0].atom;
    for (std::size_t i = 1; i < e.items.size(); ++i) {
      const SExpr& arg = e.items[i];
      if (!arg.is_atom()) detail::fail(ParseErrorKind::kSyntax, arg, "expected an argument", o);
      auto eq = arg.atom.find('=');
      if (eq == std::string::npos) {
        a.args.push_back(PlanArgument{"", arg.atom});
        continue;
      }
      PlanArgument pa;
      pa.param = arg.atom.substr(0, eq);
      std::vector<double> vals;
      std::string_view rest = std::string_view(arg.atom).substr(eq + 1);
      while (true) {
        auto comma = rest.find(',');
        std::string_view tok = rest.substr(0, comma);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
          detail::fail(ParseErrorKind::kSyntax, arg, "malformed value '" + arg.atom + "'", o);
        }
        vals.push_back(v);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
      }
      pa.value = std::move(vals);
      a.args.push_back(std::move(pa));
    }
    plan.actions.push_back(std::move(a));
  }
  return plan;
}

}  // namespace lazytamp
