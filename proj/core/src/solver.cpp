#include "lazytamp/solver.hpp"

#include <memory>

#include "json.hpp"
#include "lazytamp/parser.hpp"

namespace lazytamp {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kSolved: return "solved";
    case SolveStatus::kTimeout: return "timeout";
    case SolveStatus::kUnsolvable: return "unsolvable-optimistically";
    case SolveStatus::kError: return "error";
  }
  return "error";
}

namespace {

std::vector<std::string> describe(const Skeleton& skeleton, const DomainDefinition& domain, const ObjectTable& objects) {
  std::vector<std::string> out;
  for (const SkeletonStep& s : skeleton) out.push_back(to_string(s.action, domain, objects));
  return out;
}

}  // namespace

SolveResult solve(const DomainDefinition& domain, const ProblemInstance& problem, const StreamEvaluator& evaluator,
                  const SolverConfig& config) {
  SolveResult result;
  std::unique_ptr<Clock> clock;
  if (config.deterministic_clock) {
    clock = std::make_unique<WorkClock>(config.work_costs);
  } else {
    clock = std::make_unique<WallClock>();
  }
  const Deadline deadline{clock.get(), config.timeout_s};
  result.objects = problem.objects;
  auto finish = [&](SolveStatus status, std::string message = {}) {
    result.status = status;
    result.message = std::move(message);
    result.time_s = clock->elapsed();
    return std::move(result);
  };

  try {
    if (goal_satisfied(problem.initial_state(domain), problem.goal)) return finish(SolveStatus::kSolved);

    StreamPlanner planner(domain, result.objects, config.max_stream_chain);
    SamplerPool pool(config.seed);
    SkeletonSearchConfig search_config{config.priority, config.policy};
    const RefineContext ctx{domain, problem, result.objects, evaluator};

    while (!deadline.expired()) {
      ++result.outer_iterations;
      SkeletonSpace space(domain, problem, planner, result.feasibility, search_config, deadline);
      space.set_trace(config.trace);
      const std::size_t width = config.policy_only ? 1 : config.beam_width;
      auto outcome = (config.search == SearchKind::kBeam || config.policy_only)
                         ? beam_search(space, space.root(), width)
                         : best_first_search(space, space.root());
      result.expansions += outcome.stats.expansions;
      IterationRecord record;
      record.expansions = outcome.stats.expansions;
      if (outcome.stats.timed_out) {
        result.iterations.push_back(record);
        return finish(SolveStatus::kTimeout);
      }
      if (!outcome.goal) {
        result.iterations.push_back(record);
        return finish(SolveStatus::kUnsolvable);
      }
      result.skeleton = skeleton_of(*outcome.goal);
      result.cg = (*outcome.goal)->cg;
      record.skeleton = describe(result.skeleton, domain, result.objects);

      RefineOptions options{config.policy_only ? 0 : config.n_max, config.reuse_partial};
      RefineResult refined = refine(result.skeleton, ctx, result.feasibility, pool, deadline, options);
      result.stream_evals += refined.stream_evals;
      record.stream_evals = refined.stream_evals;
      record.refined = refined.binding.has_value();
      result.iterations.push_back(record);
      if (refined.binding) {
        if (auto error = validate_plan(result.skeleton, *refined.binding, ctx)) {
          return finish(SolveStatus::kError, "returned plan failed validation: " + *error);
        }
        result.plan = ground(result.skeleton, *refined.binding, domain, result.objects);
        return finish(SolveStatus::kSolved);
      }
      if (refined.timed_out || config.policy_only) break;
      // Feedback: the next search reads the updated statistics through phi.
    }
    return finish(SolveStatus::kTimeout);
  } catch (const std::exception& e) {
    return finish(SolveStatus::kError, e.what());
  }
}

std::string result_json(const SolveResult& result) {
  nlohmann::ordered_json j;
  j["status"] = std::string(to_string(result.status));
  j["wall_time"] = result.time_s;
  j["outer_iterations"] = result.outer_iterations;
  j["expansions"] = result.expansions;
  j["stream_evaluations"] = result.stream_evals;
  if (result.solved()) {
    nlohmann::ordered_json plan = nlohmann::ordered_json::array();
    std::string text = serialize_plan(result.plan);
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      plan.push_back(text.substr(start, end - start));
      start = end + 1;
    }
    j["plan"] = plan;
  }
  if (!result.message.empty()) j["message"] = result.message;
  return j.dump(2);
}

}  // namespace lazytamp
