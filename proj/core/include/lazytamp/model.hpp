#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace lazytamp {

using ObjectId = std::uint32_t;
using PredicateId = std::uint16_t;

inline constexpr ObjectId kNoObject = std::numeric_limits<ObjectId>::max();
/// Placeholder argument used by the delete relaxation for parameters that
/// only streams can produce.
inline constexpr ObjectId kWildcard = kNoObject - 1;
inline constexpr std::size_t kMaxArity = 6;

enum class ObjectKind : std::uint8_t { kInitial, kOptimistic };

struct ObjectInfo {
  std::string name;
  ObjectKind kind = ObjectKind::kInitial;
  /// Continuous value. Initial objects get one from the problem's `:values`
  /// block; optimistic objects stay empty until refinement binds them.
  std::vector<double> payload;
  /// For optimistic objects: "<stream>.<output slot>" of the producing stream.
  std::string type_tag;

  bool has_payload() const { return !payload.empty(); }
  bool optimistic() const { return kind == ObjectKind::kOptimistic; }
};

/// Interned object symbols. Problems own the initial objects; each solver
/// instance copies the table and mints optimistic objects into its copy.
class ObjectTable {
 public:
  ObjectId intern(std::string_view name);
  ObjectId mint_optimistic(std::string type_tag);
  std::optional<ObjectId> find(std::string_view name) const;

  const ObjectInfo& operator[](ObjectId id) const { return objects_.at(id); }
  ObjectInfo& at(ObjectId id) { return objects_.at(id); }
  std::size_t size() const { return objects_.size(); }
  const std::string& name(ObjectId id) const;

 private:
  std::vector<ObjectInfo> objects_;
  std::unordered_map<std::string, ObjectId> by_name_;
  std::size_t minted_ = 0;
};

/// Ground atom. Fixed-capacity POD so states copy and hash cheaply.
struct Fact {
  PredicateId predicate = 0;
  std::uint8_t arity = 0;
  std::array<ObjectId, kMaxArity> args{};

  Fact() = default;
  Fact(PredicateId pred, std::span<const ObjectId> arguments);
  Fact(PredicateId pred, std::initializer_list<ObjectId> arguments);

  std::span<const ObjectId> arguments() const { return {args.data(), arity}; }
  ObjectId operator[](std::size_t i) const { return args[i]; }

  friend auto operator<=>(const Fact&, const Fact&) = default;
  friend bool operator==(const Fact&, const Fact&) = default;
};

struct FactHash {
  std::size_t operator()(const Fact& f) const noexcept;
};

using FactSet = std::vector<Fact>;  // sorted, unique

/// Set of ground facts with a canonical hash. Facts of static predicates live
/// in a shared immutable block; only the fluent part is copied on transition.
class LogicalState {
 public:
  LogicalState() = default;
  explicit LogicalState(std::vector<Fact> facts);
  /// Facts whose predicate satisfies `is_fluent` go to the mutable part.
  LogicalState(std::vector<Fact> facts, const std::function<bool(PredicateId)>& is_fluent);

  bool contains(const Fact& fact) const;
  bool contains_all(std::span<const Fact> facts) const;
  std::size_t size() const;
  std::size_t hash() const { return hash_; }

  /// All facts, sorted.
  std::vector<Fact> facts() const;
  const FactSet& fluent_facts() const { return fluents_; }
  const FactSet& static_facts() const;
  /// Facts with the given predicate (both parts).
  std::vector<Fact> facts_of(PredicateId predicate) const;
  template <typename Fn>
  void for_each_of(PredicateId predicate, Fn&& fn) const;

  /// (s \ deletes) ∪ adds. Deletes that are not present are ignored.
  LogicalState with_changes(std::span<const Fact> deletes, std::span<const Fact> adds) const;

  friend bool operator==(const LogicalState& a, const LogicalState& b);

 private:
  void rehash();

  std::shared_ptr<const FactSet> statics_;
  FactSet fluents_;
  std::size_t hash_ = 0;
};

struct LogicalStateHash {
  std::size_t operator()(const LogicalState& s) const noexcept { return s.hash(); }
};

// ---------------------------------------------------------------------------
// Schemas

enum class PredicateClass : std::uint8_t { kStaticGiven, kStreamCertified, kFluent };

struct PredicateDecl {
  std::string name;
  std::vector<std::string> params;
  PredicateClass cls = PredicateClass::kStaticGiven;

  std::size_t arity() const { return params.size(); }
};

struct Parameter {
  std::string name;  // without the leading '?'
  std::string type = "object";
};

/// Atom over schema variables; `args[i]` indexes the owning schema's
/// variable list.
struct AtomTemplate {
  PredicateId predicate = 0;
  std::vector<int> args;

  friend bool operator==(const AtomTemplate&, const AtomTemplate&) = default;
};

struct ActionSchema {
  std::string name;
  std::vector<Parameter> params;
  std::vector<AtomTemplate> preconditions;  // in source order
  std::vector<AtomTemplate> pre_fluent;
  std::vector<AtomTemplate> pre_static;     // static, given in the initial state
  std::vector<AtomTemplate> pre_certified;  // static, certified by streams
  std::vector<AtomTemplate> add_effects;
  std::vector<AtomTemplate> del_effects;
  /// Parameters that only stream-certified preconditions mention.
  std::vector<bool> stream_param;
};

/// Variables are numbered inputs first, then outputs.
struct StreamSchema {
  std::string name;
  std::vector<Parameter> inputs;
  std::vector<Parameter> outputs;
  std::vector<AtomTemplate> domain;
  std::vector<AtomTemplate> certified;

  std::size_t variable_count() const { return inputs.size() + outputs.size(); }
  bool is_output(int var) const { return var >= static_cast<int>(inputs.size()); }
};

struct DomainDefinition {
  std::string name;
  std::vector<PredicateDecl> predicates;
  std::vector<ActionSchema> actions;
  std::vector<StreamSchema> streams;

  std::optional<PredicateId> find_predicate(std::string_view name) const;
  std::optional<std::size_t> find_action(std::string_view name) const;
  std::optional<std::size_t> find_stream(std::string_view name) const;
  PredicateId predicate_id(std::string_view name) const;  // throws if missing
  bool is_fluent(PredicateId p) const { return predicates.at(p).cls == PredicateClass::kFluent; }
  std::function<bool(PredicateId)> fluent_classifier() const;
  std::size_t max_action_params() const;
};

struct ProblemInstance {
  std::string name;
  std::string domain_name;
  ObjectTable objects;
  std::vector<Fact> init;
  std::vector<Fact> goal;

  LogicalState initial_state(const DomainDefinition& domain) const;
  /// Objects mentioned by I or G, in interning order.
  std::vector<ObjectId> initial_objects() const;
};

// ---------------------------------------------------------------------------
// Instances

struct ActionInstance {
  std::size_t schema = 0;
  std::vector<ObjectId> args;  // kNoObject = unbound (stream-produced)

  bool fully_bound() const;
  friend bool operator==(const ActionInstance&, const ActionInstance&) = default;
};

/// Deterministic successor order: schema name, then argument ids.
bool action_less(const DomainDefinition& domain, const ActionInstance& a, const ActionInstance& b);

std::string to_string(const Fact& fact, const DomainDefinition& domain, const ObjectTable& objects);
std::string to_string(const ActionInstance& action, const DomainDefinition& domain,
                      const ObjectTable& objects);

/// Substitutes `args` into `atom`. Unbound arguments stay kNoObject.
Fact instantiate(const AtomTemplate& atom, std::span<const ObjectId> args);

struct PreconditionViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bindings of every schema whose fluent and static-given preconditions hold
/// in `state`. Parameters mentioned only by stream-certified preconditions are
/// left unbound; parameters mentioned by no precondition range over
/// `objects`. Sorted by `action_less`.
std::vector<ActionInstance> fluent_applicable(const LogicalState& state, const DomainDefinition& domain,
                                              std::span<const ObjectId> objects);

/// Throws PreconditionViolation if a fluent or static-given precondition does
/// not hold, or if an effect mentions an unbound parameter.
LogicalState apply(const LogicalState& state, const DomainDefinition& domain, const ActionInstance& action);

bool goal_satisfied(const LogicalState& state, std::span<const Fact> goal);

// ---------------------------------------------------------------------------
// Plans

struct Unbound {
  friend bool operator==(const Unbound&, const Unbound&) = default;
};

/// One action argument of a grounded plan: an initial object by name, or the
/// bound continuous value of a stream-produced parameter.
struct PlanArgument {
  std::string param;
  std::variant<std::string, std::vector<double>, Unbound> value;

  friend bool operator==(const PlanArgument&, const PlanArgument&) = default;
};

struct GroundedAction {
  std::string name;
  std::vector<PlanArgument> args;

  friend bool operator==(const GroundedAction&, const GroundedAction&) = default;
};

struct GroundedPlan {
  std::vector<GroundedAction> actions;

  std::size_t size() const { return actions.size(); }
  bool empty() const { return actions.empty(); }
  friend bool operator==(const GroundedPlan&, const GroundedPlan&) = default;
};

// ---------------------------------------------------------------------------

template <typename Fn>
void LogicalState::for_each_of(PredicateId predicate, Fn&& fn) const {
  auto scan = [&](const FactSet& set) {
    Fact lo;
    lo.predicate = predicate;
    auto it = std::lower_bound(set.begin(), set.end(), lo);
    for (; it != set.end() && it->predicate == predicate; ++it) fn(*it);
  };
  if (statics_) scan(*statics_);
  scan(fluents_);
}

}  // namespace lazytamp
