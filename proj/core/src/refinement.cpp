#include "lazytamp/refinement.hpp"

#include <set>

#include "lazytamp/parser.hpp"

namespace lazytamp {

std::uint64_t stable_hash(std::string_view text, std::uint64_t seed) {
  // FNV-1a, then a final avalanche so nearby seeds decorrelate.
  std::uint64_t h = 0xcbf29ce484222325ULL ^ (seed * 0x9e3779b97f4a7c15ULL);
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return h;
}

Rng& SamplerPool::rng(const std::string& stream_name, const std::string& key) {
  auto it = streams_.find(key);
  if (it == streams_.end()) {
    const std::uint64_t s = stable_hash(key, stable_hash(stream_name, seed_));
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
    it = streams_.emplace(key, Rng(seq)).first;
  }
  return it->second;
}

Skeleton skeleton_of(const NodePtr& node) {
  Skeleton out;
  for (const SearchNode* n : node_path(node)) {
    if (n->action) out.push_back(SkeletonStep{*n->action, n->streams});
  }
  return out;
}

Values value_of(ObjectId o, const ObjectTable& objects, const Binding& binding) {
  if (auto it = binding.find(o); it != binding.end()) return it->second;
  return objects[o].payload;
}

namespace {

std::vector<Values> values_of(std::span<const ObjectId> ids, const ObjectTable& objects, const Binding& binding) {
  std::vector<Values> out;
  out.reserve(ids.size());
  for (ObjectId o : ids) out.push_back(value_of(o, objects, binding));
  return out;
}

}  // namespace

RefineResult refine(const Skeleton& skeleton, const RefineContext& ctx, FeasibilityDB& db, SamplerPool& pool,
                    const Deadline& deadline, RefineOptions options) {
  RefineResult result;
  const auto initial = ctx.evaluator.initial_world(ctx.problem);
  struct Partial {
    Binding theta;
    std::unique_ptr<WorldState> world;  // before the action's effect
  };
  std::map<std::size_t, Partial> partial;

  for (std::size_t pass = 0; options.n_max == 0 || pass < options.n_max; ++pass) {
    if (deadline.expired()) {
      result.timed_out = true;
      return result;
    }
    ++result.passes;
    Binding theta;
    std::unique_ptr<WorldState> world = initial->clone();
    bool complete = true;
    for (std::size_t i = 0; i < skeleton.size() && complete; ++i) {
      const SkeletonStep& step = skeleton[i];
      bool all_ok = true;
      for (const StreamInstance& stream : step.streams) {
        if (deadline.expired()) {
          result.timed_out = true;
          return result;
        }
        const StreamSchema& schema = ctx.domain.streams.at(stream.schema);
        const std::vector<Values> inputs = values_of(stream.inputs, ctx.objects, theta);
        SampleRequest request{schema, stream.inputs, inputs, ctx.objects, *world};
        auto out = ctx.evaluator.sample(request, pool.rng(schema.name, stream.key));
        deadline.charge(Work::kStreamEval);
        ++result.stream_evals;
        if (out && out->size() != stream.outputs.size()) {
          throw std::logic_error("sampler for '" + schema.name + "' returned the wrong number of outputs");
        }
        db.record(stream.key, out.has_value());
        if (!out) {
          all_ok = false;
          break;
        }
        for (std::size_t k = 0; k < stream.outputs.size(); ++k) theta[stream.outputs[k]] = std::move((*out)[k]);
      }
      if (all_ok) {
        if (options.reuse_partial) partial[i] = Partial{theta, world->clone()};
      } else if (auto it = partial.find(i); options.reuse_partial && it != partial.end()) {
        theta = it->second.theta;
        world = it->second.world->clone();
      } else {
        complete = false;  // dead end: restart from the first action
        break;
      }
      const std::vector<Values> args = values_of(step.action.args, ctx.objects, theta);
      ctx.evaluator.apply(ctx.domain.actions.at(step.action.schema), step.action.args, args, ctx.objects, *world);
    }
    if (complete) {
      result.binding = std::move(theta);
      return result;
    }
  }
  return result;
}

GroundedPlan ground(const Skeleton& skeleton, const Binding& binding, const DomainDefinition& domain,
                    const ObjectTable& objects) {
  GroundedPlan plan;
  for (const SkeletonStep& step : skeleton) {
    const ActionSchema& schema = domain.actions.at(step.action.schema);
    GroundedAction ga;
    ga.name = schema.name;
    for (std::size_t k = 0; k < step.action.args.size(); ++k) {
      const ObjectId o = step.action.args[k];
      PlanArgument arg;
      if (o == kNoObject) {
        arg.param = schema.params[k].name;
        arg.value = Unbound{};
      } else if (!objects[o].optimistic()) {
        arg.value = objects.name(o);
      } else if (auto it = binding.find(o); it != binding.end()) {
        arg.param = schema.params[k].name;
        arg.value = it->second;
      } else {
        arg.param = schema.params[k].name;
        arg.value = Unbound{};
      }
      ga.args.push_back(std::move(arg));
    }
    plan.actions.push_back(std::move(ga));
  }
  return plan;
}

std::optional<std::string> validate_plan(const Skeleton& skeleton, const Binding& binding, const RefineContext& ctx) {
  LogicalState state = ctx.problem.initial_state(ctx.domain);
  std::unique_ptr<WorldState> world = ctx.evaluator.initial_world(ctx.problem);
  std::set<Fact> certified;
  for (std::size_t i = 0; i < skeleton.size(); ++i) {
    const SkeletonStep& step = skeleton[i];
    const ActionSchema& schema = ctx.domain.actions.at(step.action.schema);
    const std::string where = "step " + std::to_string(i + 1) + " (" + schema.name + ")";
    if (!step.action.fully_bound()) return where + ": unbound action argument";
    for (const StreamInstance& s : step.streams) {
      for (const Fact& f : s.certified) {
        try {
          std::vector<Values> vals = values_of(f.arguments(), ctx.objects, binding);
          for (std::size_t k = 0; k < f.arity; ++k) {
            if (ctx.objects[f.args[k]].optimistic() && !binding.count(f.args[k])) {
              return where + ": certified fact mentions an unbound object";
            }
          }
          if (!ctx.evaluator.validate(ctx.domain.predicates.at(f.predicate), f.arguments(), vals, ctx.objects, *world)) {
            return where + ": certified fact " + to_string(f, ctx.domain, ctx.objects) + " does not hold";
          }
        } catch (const std::invalid_argument& e) {
          return where + ": " + e.what();
        }
        certified.insert(f);
      }
    }
    for (const AtomTemplate& pre : schema.pre_certified) {
      Fact f = instantiate(pre, step.action.args);
      if (!certified.count(f) && !state.contains(f)) {
        return where + ": stream-certified precondition " + to_string(f, ctx.domain, ctx.objects) + " is not certified";
      }
    }
    try {
      state = apply(state, ctx.domain, step.action);
    } catch (const PreconditionViolation& e) {
      return where + ": " + e.what();
    }
    const std::vector<Values> args = values_of(step.action.args, ctx.objects, binding);
    ctx.evaluator.apply(schema, step.action.args, args, ctx.objects, *world);
  }
  if (!goal_satisfied(state, ctx.problem.goal)) return std::string("final state does not satisfy the goal");
  return std::nullopt;
}

}  // namespace lazytamp
