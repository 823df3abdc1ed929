#include "lazytamp/search.hpp"

#include <algorithm>

#include "json.hpp"

namespace lazytamp {

// ---------------------------------------------------------------------------
// h_add

HAdd::HAdd(const DomainDefinition& domain, std::vector<Fact> goal) : domain_(domain), goal_(std::move(goal)) {}

double HAdd::operator()(const LogicalState& state) {
  if (auto it = memo_.find(state.hash()); it != memo_.end()) return it->second;
  ++evaluations_;
  const double h = compute(state);
  memo_.emplace(state.hash(), h);
  return h;
}

namespace {

bool wildcard_match(const Fact& pattern, const Fact& fact) {
  if (pattern.predicate != fact.predicate || pattern.arity != fact.arity) return false;
  for (std::size_t i = 0; i < pattern.arity; ++i) {
    if (pattern.args[i] != fact.args[i] && pattern.args[i] != kWildcard && fact.args[i] != kWildcard) return false;
  }
  return true;
}

class Relaxation {
 public:
  Relaxation(const DomainDefinition& domain, const LogicalState& state)
      : domain_(domain), by_pred_(domain.predicates.size()) {
    for (const Fact& f : state.facts()) add(f, 0.0);
  }

  void run() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const ActionSchema& schema : domain_.actions) {
        std::vector<const AtomTemplate*> atoms;
        for (const auto& a : schema.pre_static) atoms.push_back(&a);
        for (const auto& a : schema.pre_fluent) atoms.push_back(&a);
        std::vector<ObjectId> binding(schema.params.size(), kNoObject);
        enumerate(schema, atoms, 0, 0.0, binding, changed);
      }
    }
  }

  double goal_cost(std::span<const Fact> goal) const {
    double total = 0.0;
    for (const Fact& g : goal) {
      double best = kInfinity;
      if (auto it = cost_.find(g); it != cost_.end()) best = it->second;
      for (const Fact& f : by_pred_[g.predicate]) {
        if (wildcard_match(g, f)) best = std::min(best, cost_.at(f));
      }
      if (std::isinf(best)) return kInfinity;
      total += best;
    }
    return total;
  }

 private:
  bool add(const Fact& f, double c) {
    auto [it, inserted] = cost_.try_emplace(f, c);
    if (inserted) {
      by_pred_[f.predicate].push_back(f);
      return true;
    }
    if (c < it->second) {
      it->second = c;
      return true;
    }
    return false;
  }

  void enumerate(const ActionSchema& schema, const std::vector<const AtomTemplate*>& atoms, std::size_t i, double sum,
                 std::vector<ObjectId>& binding, bool& changed) {
    if (i == atoms.size()) {
      const double c = 1.0 + sum;
      for (const AtomTemplate& e : schema.add_effects) {
        Fact f = instantiate(e, binding);
        for (std::size_t k = 0; k < f.arity; ++k) {
          if (f.args[k] == kNoObject) f.args[k] = kWildcard;
        }
        changed |= add(f, c);
      }
      return;
    }
    const AtomTemplate& atom = *atoms[i];
    auto& candidates = by_pred_[atom.predicate];
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      const Fact fact = candidates[j];  // the vector may grow below
      std::array<std::size_t, kMaxArity> newly{};
      std::size_t n_new = 0;
      bool ok = fact.arity == atom.args.size();
      for (std::size_t k = 0; k < atom.args.size() && ok; ++k) {
        auto v = static_cast<std::size_t>(atom.args[k]);
        ObjectId& slot = binding[v];
        if (slot == kNoObject) {
          slot = fact.args[k];
          newly[n_new++] = v;
        } else if (slot != fact.args[k] && slot != kWildcard && fact.args[k] != kWildcard) {
          ok = false;
        }
      }
      if (ok) enumerate(schema, atoms, i + 1, sum + cost_.at(fact), binding, changed);
      for (std::size_t k = 0; k < n_new; ++k) binding[newly[k]] = kNoObject;
    }
  }

  const DomainDefinition& domain_;
  std::unordered_map<Fact, double, FactHash> cost_;
  std::vector<std::vector<Fact>> by_pred_;
};

}  // namespace

double HAdd::compute(const LogicalState& state) const { return h_add(state, goal_, domain_); }

double h_add(const LogicalState& state, std::span<const Fact> goal, const DomainDefinition& domain) {
  if (goal_satisfied(state, goal)) return 0.0;
  Relaxation r(domain, state);
  r.run();
  return r.goal_cost(goal);
}

// ---------------------------------------------------------------------------
// SkeletonSpace

std::vector<const SearchNode*> node_path(const NodePtr& node) {
  std::vector<const SearchNode*> out;
  for (const SearchNode* n = node.get(); n; n = n->parent.get()) out.push_back(n);
  std::reverse(out.begin(), out.end());
  return out;
}

SkeletonSpace::SkeletonSpace(const DomainDefinition& domain, const ProblemInstance& problem, StreamPlanner& planner,
                             const FeasibilityDB& db, SkeletonSearchConfig config, Deadline deadline)
    : domain_(domain),
      problem_(problem),
      planner_(planner),
      db_(db),
      config_(config),
      deadline_(deadline),
      objects_(problem.initial_objects()),
      hadd_(domain, problem.goal) {
  if (config_.priority == PriorityKind::kLevinTS && !config_.policy) {
    throw std::invalid_argument("LevinTS priority requires a policy");
  }
}

NodePtr SkeletonSpace::root() const {
  auto n = std::make_shared<SearchNode>();
  n->state = problem_.initial_state(domain_);
  if (config_.priority == PriorityKind::kAStar) {
    n->h = h_add(n->state, problem_.goal, domain_);
    n->f = f_astar(0.0, n->h);
  }
  return n;
}

const std::vector<double>& SkeletonSpace::policy_for(const NodePtr& node, const std::vector<ActionInstance>& actions,
                                                     const std::vector<double>& child_h) {
  auto it = policy_memo_.find(node->state.hash());
  if (it != policy_memo_.end() && it->second.actions == actions) return it->second.pi;
  ++policy_queries_;
  if (config_.policy->expensive()) deadline_.charge(Work::kPolicyQuery);
  PolicyContext ctx{domain_, problem_, planner_.objects(), node->state, actions, child_h};
  std::vector<double> pi = config_.policy->distribution(ctx);
  if (pi.size() != actions.size()) throw std::logic_error("policy returned a distribution of the wrong size");
  auto& slot = policy_memo_[node->state.hash()];
  slot.actions = actions;
  slot.pi = std::move(pi);
  return slot.pi;
}

std::vector<NodePtr> SkeletonSpace::expand(const NodePtr& node) {
  deadline_.charge(Work::kExpansion);
  const bool astar = config_.priority == PriorityKind::kAStar;
  const bool need_h = astar || config_.policy->needs_heuristic();
  std::vector<std::shared_ptr<SearchNode>> children;
  std::vector<double> phis;
  for (const ActionInstance& a : fluent_applicable(node->state, domain_, objects_)) {
    auto cert = planner_.certify(a, node->state, node->cg);
    if (!cert) continue;
    deadline_.charge(Work::kChild);
    auto child = std::make_shared<SearchNode>();
    child->parent = node;
    child->state = apply(node->state, domain_, cert->action);
    child->cg = node->cg.extend(cert->streams, planner_.objects());
    child->action = std::move(cert->action);
    child->streams = std::move(cert->streams);
    child->depth = node->depth + 1;
    child->h = need_h ? hadd_(child->state) : 0.0;
    phis.push_back(phi(child->streams, db_));
    children.push_back(std::move(child));
  }

  std::vector<NodePtr> out;
  if (astar) {
    for (std::size_t i = 0; i < children.size(); ++i) {
      auto& c = children[i];
      if (std::isinf(c->h)) continue;  // relaxed-unreachable: no plan below this node
      c->g = node->g + feedback_cost(phis[i]);
      c->f = f_astar(c->g, c->h);
      out.push_back(std::move(c));
    }
    return out;
  }

  if (children.empty()) return out;
  std::vector<ActionInstance> actions;
  std::vector<double> child_h;
  for (const auto& c : children) {
    actions.push_back(*c->action);
    child_h.push_back(c->h);
  }
  const std::vector<double>& pi = policy_for(node, actions, child_h);
  const std::vector<double> pibar = renormalize_policy(pi, phis);
  for (std::size_t i = 0; i < children.size(); ++i) {
    auto& c = children[i];
    c->log_pi = node->log_pi + (pibar[i] > 0.0 ? std::log(pibar[i]) : -kInfinity);
    c->f = f_levints(c->depth, c->log_pi);
    out.push_back(std::move(c));
  }
  return out;
}

void SkeletonSpace::on_pop(const NodePtr& node, double f) {
  if (!trace_) return;
  nlohmann::json rec;
  rec["depth"] = node->depth;
  rec["f"] = std::isinf(f) ? nlohmann::json("inf") : nlohmann::json(f);
  rec["action"] = node->action ? nlohmann::json(to_string(*node->action, domain_, planner_.objects()))
                               : nlohmann::json(nullptr);
  rec["state_hash"] = node->state.hash();
  *trace_ << rec.dump() << '\n';
}

}  // namespace lazytamp
