#pragma once

#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>

#include "lazytamp/parser.hpp"
#include "lazytamp/refinement.hpp"

namespace lazytamp::testing {

/// Pick a block with a sampled grasp, then put it down at a sampled pose.
inline const char* kToyDomain = R"((define (domain toy)
  (:predicates (Block ?b) (Free) (Holding ?b ?g) (GraspOf ?b ?g) (PoseOf ?b ?p) (Placed ?b))
  (:action pick
    :parameters (?b ?g)
    :precondition (and (Block ?b) (Free) (GraspOf ?b ?g))
    :effect (and (Holding ?b ?g) (not (Free))))
  (:action place
    :parameters (?b ?g ?p)
    :precondition (and (Holding ?b ?g) (PoseOf ?b ?p))
    :effect (and (Placed ?b) (Free) (not (Holding ?b ?g))))
  (:stream grasp
    :inputs (?b)
    :domain (Block ?b)
    :outputs (?g)
    :certified (GraspOf ?b ?g))
  (:stream pose
    :inputs (?b)
    :domain (Block ?b)
    :outputs (?p)
    :certified (PoseOf ?b ?p)))
)";

inline std::string toy_problem(const std::string& init, const std::string& goal) {
  return "(define (problem p) (:domain toy) (:init " + init + ") (:goal (and " + goal + ")))";
}

/// Two routes to Done: `shortcut` needs one sample of stream `a`; `detour`
/// then `finish` needs one sample of stream `b` and one step more.
inline const char* kTwoRouteDomain = R"((define (domain routes)
  (:predicates (Start) (Mid) (Done) (Token ?x) (CanA ?x ?y) (CanB ?x ?y))
  (:action shortcut
    :parameters (?x ?y)
    :precondition (and (Start) (Token ?x) (CanA ?x ?y))
    :effect (and (Done) (not (Start))))
  (:action detour
    :parameters (?x ?y)
    :precondition (and (Start) (Token ?x) (CanB ?x ?y))
    :effect (and (Mid) (not (Start))))
  (:action finish
    :parameters ()
    :precondition (Mid)
    :effect (and (Done) (not (Mid))))
  (:stream a
    :inputs (?x)
    :domain (Token ?x)
    :outputs (?y)
    :certified (CanA ?x ?y))
  (:stream b
    :inputs (?x)
    :domain (Token ?x)
    :outputs (?y)
    :certified (CanB ?x ?y)))
)";

inline const char* kTwoRouteProblem =
    "(define (problem r) (:domain routes) (:init (Start) (Token x0)) (:goal (Done)))";

class NullWorld : public WorldState {
 public:
  std::unique_ptr<WorldState> clone() const override { return std::make_unique<NullWorld>(); }
};

/// Samplers driven by per-stream scripts. A script sees the 0-based index of
/// the call to its stream and the sampler's random stream; streams without a
/// script always succeed. Outputs are the call index.
class ScriptedEvaluator : public StreamEvaluator {
 public:
  using Script = std::function<bool(std::size_t call, Rng& rng)>;

  std::map<std::string, Script> scripts;
  mutable std::map<std::string, std::size_t> calls;

  std::unique_ptr<WorldState> initial_world(const ProblemInstance&) const override {
    return std::make_unique<NullWorld>();
  }
  std::optional<std::vector<Values>> sample(const SampleRequest& request, Rng& rng) const override {
    const std::size_t n = calls[request.schema.name]++;
    auto it = scripts.find(request.schema.name);
    if (it != scripts.end() && !it->second(n, rng)) return std::nullopt;
    return std::vector<Values>(request.schema.outputs.size(), Values{static_cast<double>(n)});
  }
  void apply(const ActionSchema&, std::span<const ObjectId>, std::span<const Values>, const ObjectTable&,
             WorldState&) const override {}
  bool validate(const PredicateDecl&, std::span<const ObjectId>, std::span<const Values>, const ObjectTable&,
                const WorldState&) const override {
    return true;
  }
};

/// The pick-then-place skeleton of the toy domain and what refine needs.
struct ToySkeleton {
  DomainDefinition domain = parse_domain(kToyDomain);
  ProblemInstance problem;
  ObjectTable objects;
  Skeleton skeleton;

  explicit ToySkeleton(const std::string& init = "(Block b0) (Free)", const std::string& goal = "(Placed b0)")
      : problem(parse_problem(toy_problem(init, goal), domain)), objects(problem.objects) {
    StreamPlanner planner(domain, objects);
    FeasibilityDB empty;
    SkeletonSpace space(domain, problem, planner, empty, {});
    const auto r = best_first_search(space, space.root());
    if (!r.goal) throw std::logic_error("toy problem has no optimistic skeleton");
    skeleton = skeleton_of(*r.goal);
  }

  RefineResult run(const ScriptedEvaluator& ev, FeasibilityDB& db, std::size_t n_max, std::uint64_t seed = 0,
                   bool reuse = true) const {
    SamplerPool pool(seed);
    return refine(skeleton, {domain, problem, objects, ev}, db, pool, {}, {n_max, reuse});
  }
};

/// Statistics of the first entry whose key names `stream`.
inline StreamStats stats_of(const FeasibilityDB& db, const std::string& stream) {
  for (const auto& [key, s] : db.entries()) {
    if (key.rfind(stream + "(", 0) == 0) return s;
  }
  return {};
}

}  // namespace lazytamp::testing
