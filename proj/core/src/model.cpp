#include "lazytamp/model.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace lazytamp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t hash_facts(const FactSet& facts) {
  // Order-independent so that the hash does not depend on how facts are
  // split between the static and fluent parts.
  std::uint64_t h = 0;
  FactHash fh;
  for (const Fact& f : facts) h += splitmix64(fh(f));
  return h;
}

void normalize(FactSet& facts) {
  std::sort(facts.begin(), facts.end());
  facts.erase(std::unique(facts.begin(), facts.end()), facts.end());
}

bool sorted_contains(const FactSet& facts, const Fact& f) {
  return std::binary_search(facts.begin(), facts.end(), f);
}

struct StaticBlock {
  FactSet facts;
  std::size_t hash = 0;
};

}  // namespace

// ---------------------------------------------------------------------------
// ObjectTable

ObjectId ObjectTable::intern(std::string_view name) {
  if (auto it = by_name_.find(std::string(name)); it != by_name_.end()) return it->second;
  const auto id = static_cast<ObjectId>(objects_.size());
  objects_.push_back(ObjectInfo{std::string(name), ObjectKind::kInitial, {}, {}});
  by_name_.emplace(std::string(name), id);
  return id;
}

ObjectId ObjectTable::mint_optimistic(std::string type_tag) {
  const auto id = static_cast<ObjectId>(objects_.size());
  std::string name = "#" + type_tag + "." + std::to_string(minted_++);
  objects_.push_back(ObjectInfo{name, ObjectKind::kOptimistic, {}, std::move(type_tag)});
  by_name_.emplace(std::move(name), id);
  return id;
}

std::optional<ObjectId> ObjectTable::find(std::string_view name) const {
  if (auto it = by_name_.find(std::string(name)); it != by_name_.end()) return it->second;
  return std::nullopt;
}

const std::string& ObjectTable::name(ObjectId id) const {
  static const std::string kUnbound = "?";
  static const std::string kStar = "*";
  if (id == kNoObject) return kUnbound;
  if (id == kWildcard) return kStar;
  return objects_.at(id).name;
}

// ---------------------------------------------------------------------------
// Fact

Fact::Fact(PredicateId pred, std::span<const ObjectId> arguments) : predicate(pred) {
  if (arguments.size() > kMaxArity) throw std::invalid_argument("fact arity exceeds kMaxArity");
  arity = static_cast<std::uint8_t>(arguments.size());
  std::copy(arguments.begin(), arguments.end(), args.begin());
}

Fact::Fact(PredicateId pred, std::initializer_list<ObjectId> arguments)
    : Fact(pred, std::span<const ObjectId>(arguments.begin(), arguments.size())) {}

std::size_t FactHash::operator()(const Fact& f) const noexcept {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(f.predicate) << 8 | f.arity);
  for (std::size_t i = 0; i < f.arity; ++i) h = splitmix64(h ^ f.args[i]);
  return h;
}

// ---------------------------------------------------------------------------
// LogicalState

LogicalState::LogicalState(std::vector<Fact> facts) : fluents_(std::move(facts)) {
  normalize(fluents_);
  rehash();
}

LogicalState::LogicalState(std::vector<Fact> facts, const std::function<bool(PredicateId)>& is_fluent) {
  auto block = std::make_shared<StaticBlock>();
  for (const Fact& f : facts) (is_fluent(f.predicate) ? fluents_ : block->facts).push_back(f);
  normalize(fluents_);
  normalize(block->facts);
  block->hash = hash_facts(block->facts);
  // Aliasing constructor: the state only needs the fact vector.
  statics_ = std::shared_ptr<const FactSet>(block, &block->facts);
  rehash();
}

void LogicalState::rehash() {
  hash_ = hash_facts(fluents_);
  if (statics_) hash_ += hash_facts(*statics_);
}

const FactSet& LogicalState::static_facts() const {
  static const FactSet kEmpty;
  return statics_ ? *statics_ : kEmpty;
}

bool LogicalState::contains(const Fact& fact) const {
  return sorted_contains(fluents_, fact) || (statics_ && sorted_contains(*statics_, fact));
}

bool LogicalState::contains_all(std::span<const Fact> facts) const {
  return std::all_of(facts.begin(), facts.end(), [this](const Fact& f) { return contains(f); });
}

std::size_t LogicalState::size() const { return fluents_.size() + (statics_ ? statics_->size() : 0); }

std::vector<Fact> LogicalState::facts() const {
  std::vector<Fact> out;
  out.reserve(size());
  const FactSet& st = static_facts();
  std::merge(st.begin(), st.end(), fluents_.begin(), fluents_.end(), std::back_inserter(out));
  return out;
}

std::vector<Fact> LogicalState::facts_of(PredicateId predicate) const {
  std::vector<Fact> out;
  for_each_of(predicate, [&](const Fact& f) { out.push_back(f); });
  std::sort(out.begin(), out.end());
  return out;
}

LogicalState LogicalState::with_changes(std::span<const Fact> deletes, std::span<const Fact> adds) const {
  LogicalState next;
  next.statics_ = statics_;
  next.fluents_.reserve(fluents_.size() + adds.size());
  for (const Fact& f : fluents_) {
    if (std::find(deletes.begin(), deletes.end(), f) == deletes.end()) next.fluents_.push_back(f);
  }
  for (const Fact& f : adds) {
    if (!statics_ || !sorted_contains(*statics_, f)) next.fluents_.push_back(f);
  }
  normalize(next.fluents_);
  next.rehash();
  return next;
}

bool operator==(const LogicalState& a, const LogicalState& b) {
  if (a.hash_ != b.hash_) return false;
  if (a.statics_ == b.statics_) return a.fluents_ == b.fluents_;
  return a.facts() == b.facts();
}

// ---------------------------------------------------------------------------
// DomainDefinition / ProblemInstance

std::optional<PredicateId> DomainDefinition::find_predicate(std::string_view n) const {
  for (std::size_t i = 0; i < predicates.size(); ++i) {
    if (predicates[i].name == n) return static_cast<PredicateId>(i);
  }
  return std::nullopt;
}

std::optional<std::size_t> DomainDefinition::find_action(std::string_view n) const {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i].name == n) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> DomainDefinition::find_stream(std::string_view n) const {
  for (std::size_t i = 0; i < streams.size(); ++i) {
    if (streams[i].name == n) return i;
  }
  return std::nullopt;
}

PredicateId DomainDefinition::predicate_id(std::string_view n) const {
  if (auto id = find_predicate(n)) return *id;
  throw std::out_of_range("unknown predicate '" + std::string(n) + "'");
}

std::function<bool(PredicateId)> DomainDefinition::fluent_classifier() const {
  std::vector<bool> fluent(predicates.size());
  for (std::size_t i = 0; i < predicates.size(); ++i) fluent[i] = predicates[i].cls == PredicateClass::kFluent;
  return [fluent = std::move(fluent)](PredicateId p) { return p < fluent.size() && fluent[p]; };
}

std::size_t DomainDefinition::max_action_params() const {
  std::size_t m = 0;
  for (const auto& a : actions) m = std::max(m, a.params.size());
  return m;
}

LogicalState ProblemInstance::initial_state(const DomainDefinition& domain) const {
  return LogicalState(init, domain.fluent_classifier());
}

std::vector<ObjectId> ProblemInstance::initial_objects() const {
  std::vector<bool> seen(objects.size());
  auto mark = [&](const std::vector<Fact>& facts) {
    for (const Fact& f : facts) {
      for (ObjectId o : f.arguments()) seen[o] = true;
    }
  };
  mark(init);
  mark(goal);
  std::vector<ObjectId> out;
  for (ObjectId o = 0; o < objects.size(); ++o) {
    if (seen[o] && !objects[o].optimistic()) out.push_back(o);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Instances

bool ActionInstance::fully_bound() const {
  return std::none_of(args.begin(), args.end(), [](ObjectId o) { return o == kNoObject; });
}

bool action_less(const DomainDefinition& domain, const ActionInstance& a, const ActionInstance& b) {
  const std::string& na = domain.actions[a.schema].name;
  const std::string& nb = domain.actions[b.schema].name;
  if (na != nb) return na < nb;
  return a.args < b.args;
}

std::string to_string(const Fact& fact, const DomainDefinition& domain, const ObjectTable& objects) {
  std::string out = "(" + domain.predicates.at(fact.predicate).name;
  for (ObjectId o : fact.arguments()) out += " " + objects.name(o);
  return out + ")";
}

std::string to_string(const ActionInstance& action, const DomainDefinition& domain, const ObjectTable& objects) {
  std::string out = "(" + domain.actions.at(action.schema).name;
  for (ObjectId o : action.args) out += " " + objects.name(o);
  return out + ")";
}

Fact instantiate(const AtomTemplate& atom, std::span<const ObjectId> args) {
  Fact f;
  f.predicate = atom.predicate;
  f.arity = static_cast<std::uint8_t>(atom.args.size());
  for (std::size_t i = 0; i < atom.args.size(); ++i) f.args[i] = args[static_cast<std::size_t>(atom.args[i])];
  return f;
}

namespace {

/// Backtracking join of `atoms` against the state. Atom order is chosen
/// greedily: most already-bound variables first, then fewest candidate facts.
class Joiner {
 public:
  Joiner(const LogicalState& state, std::vector<const AtomTemplate*> atoms, std::size_t var_count)
      : state_(state), binding_(var_count, kNoObject) {
    std::vector<bool> bound(var_count, false);
    std::vector<std::size_t> counts;
    counts.reserve(atoms.size());
    for (const AtomTemplate* a : atoms) {
      std::size_t c = 0;
      state.for_each_of(a->predicate, [&](const Fact&) { ++c; });
      counts.push_back(c);
    }
    std::vector<bool> used(atoms.size(), false);
    for (std::size_t step = 0; step < atoms.size(); ++step) {
      std::size_t best = atoms.size();
      std::size_t best_unbound = 0;
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (used[i]) continue;
        std::size_t unbound = 0;
        for (int v : atoms[i]->args) unbound += bound[static_cast<std::size_t>(v)] ? 0 : 1;
        if (best == atoms.size() || unbound < best_unbound ||
            (unbound == best_unbound && counts[i] < counts[best])) {
          best = i;
          best_unbound = unbound;
        }
      }
      used[best] = true;
      for (int v : atoms[best]->args) bound[static_cast<std::size_t>(v)] = true;
      order_.push_back(atoms[best]);
    }
  }

  template <typename Emit>
  void run(Emit&& emit) {
    step(0, emit);
  }

 private:
  template <typename Emit>
  void step(std::size_t depth, Emit& emit) {
    if (depth == order_.size()) {
      emit(binding_);
      return;
    }
    const AtomTemplate& atom = *order_[depth];
    state_.for_each_of(atom.predicate, [&](const Fact& f) {
      if (f.arity != atom.args.size()) return;
      std::array<int, kMaxArity> newly{};
      std::size_t n_new = 0;
      bool ok = true;
      for (std::size_t i = 0; i < atom.args.size() && ok; ++i) {
        auto& slot = binding_[static_cast<std::size_t>(atom.args[i])];
        if (slot == kNoObject) {
          slot = f.args[i];
          newly[n_new++] = atom.args[i];
        } else if (slot != f.args[i]) {
          ok = false;
        }
      }
      if (ok) step(depth + 1, emit);
      for (std::size_t i = 0; i < n_new; ++i) binding_[static_cast<std::size_t>(newly[i])] = kNoObject;
    });
  }

  const LogicalState& state_;
  std::vector<const AtomTemplate*> order_;
  std::vector<ObjectId> binding_;
};

void enumerate_free(const ActionSchema& schema, std::vector<ObjectId>& args, std::size_t index,
                    std::span<const ObjectId> objects, std::vector<ActionInstance>& out, std::size_t schema_index) {
  if (index == args.size()) {
    out.push_back(ActionInstance{schema_index, args});
    return;
  }
  if (args[index] != kNoObject || schema.stream_param[index]) {
    enumerate_free(schema, args, index + 1, objects, out, schema_index);
    return;
  }
  for (ObjectId o : objects) {
    args[index] = o;
    enumerate_free(schema, args, index + 1, objects, out, schema_index);
  }
  args[index] = kNoObject;
}

}  // namespace

std::vector<ActionInstance> fluent_applicable(const LogicalState& state, const DomainDefinition& domain,
                                              std::span<const ObjectId> objects) {
  std::vector<ActionInstance> out;
  for (std::size_t s = 0; s < domain.actions.size(); ++s) {
    const ActionSchema& schema = domain.actions[s];
    std::vector<const AtomTemplate*> atoms;
    for (const auto& a : schema.pre_static) atoms.push_back(&a);
    for (const auto& a : schema.pre_fluent) atoms.push_back(&a);
    Joiner joiner(state, std::move(atoms), schema.params.size());
    joiner.run([&](const std::vector<ObjectId>& binding) {
      std::vector<ObjectId> args = binding;
      enumerate_free(schema, args, 0, objects, out, s);
    });
  }
  std::sort(out.begin(), out.end(),
            [&](const ActionInstance& a, const ActionInstance& b) { return action_less(domain, a, b); });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

LogicalState apply(const LogicalState& state, const DomainDefinition& domain, const ActionInstance& action) {
  const ActionSchema& schema = domain.actions.at(action.schema);
  if (action.args.size() != schema.params.size()) {
    throw PreconditionViolation("argument count mismatch for action '" + schema.name + "'");
  }
  auto check = [&](const std::vector<AtomTemplate>& atoms) {
    for (const AtomTemplate& atom : atoms) {
      Fact f = instantiate(atom, action.args);
      for (ObjectId o : f.arguments()) {
        if (o == kNoObject) throw PreconditionViolation("unbound parameter in precondition of '" + schema.name + "'");
      }
      if (!state.contains(f)) {
        throw PreconditionViolation("precondition " + domain.predicates[f.predicate].name + " of '" + schema.name +
                                    "' does not hold");
      }
    }
  };
  check(schema.pre_fluent);
  check(schema.pre_static);

  std::vector<Fact> dels, adds;
  auto build = [&](const std::vector<AtomTemplate>& atoms, std::vector<Fact>& out) {
    for (const AtomTemplate& atom : atoms) {
      Fact f = instantiate(atom, action.args);
      for (ObjectId o : f.arguments()) {
        if (o == kNoObject) throw PreconditionViolation("unbound parameter in effect of '" + schema.name + "'");
      }
      out.push_back(f);
    }
  };
  build(schema.del_effects, dels);
  build(schema.add_effects, adds);
  return state.with_changes(dels, adds);
}

bool goal_satisfied(const LogicalState& state, std::span<const Fact> goal) { return state.contains_all(goal); }

}  // namespace lazytamp
