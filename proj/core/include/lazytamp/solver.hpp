#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lazytamp/clock.hpp"
#include "lazytamp/feasibility.hpp"
#include "lazytamp/model.hpp"
#include "lazytamp/policy.hpp"
#include "lazytamp/refinement.hpp"
#include "lazytamp/search.hpp"

namespace lazytamp {

enum class SearchKind { kBestFirst, kBeam };
enum class SolveStatus { kSolved, kTimeout, kUnsolvable, kError };

std::string_view to_string(SolveStatus status);

struct SolverConfig {
  SearchKind search = SearchKind::kBestFirst;
  std::size_t beam_width = 1;  // kUnboundedBeam = unbounded
  PriorityKind priority = PriorityKind::kAStar;
  const Policy* policy = nullptr;
  std::size_t n_max = 10;
  bool reuse_partial = true;
  double timeout_s = 90.0;
  /// Charge virtual time per unit of work instead of reading the wall clock.
  bool deterministic_clock = false;
  WorkCosts work_costs = {};
  std::uint64_t seed = 0;
  /// Search one skeleton, then refine it until the timeout without feedback.
  bool policy_only = false;
  std::size_t max_stream_chain = 8;
  std::ostream* trace = nullptr;
};

struct IterationRecord {
  std::vector<std::string> skeleton;  // action strings
  bool refined = false;
  std::size_t expansions = 0;
  std::size_t stream_evals = 0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kError;
  std::string message;
  GroundedPlan plan;
  Skeleton skeleton;        // of the returned plan or of the last attempt
  ComputationGraph cg;      // of `skeleton`
  ObjectTable objects;      // initial plus minted optimistic objects
  double time_s = 0.0;      // wall or virtual seconds, per the config
  std::size_t outer_iterations = 0;
  std::size_t expansions = 0;
  std::size_t stream_evals = 0;
  std::vector<IterationRecord> iterations;
  FeasibilityDB feasibility;

  bool solved() const { return status == SolveStatus::kSolved; }
};

/// Lazy bi-level search: search a skeleton, refine it, feed refinement
/// statistics back into the priority function and repeat until a refinement
/// succeeds, the search space is exhausted or time runs out.
SolveResult solve(const DomainDefinition& domain, const ProblemInstance& problem, const StreamEvaluator& evaluator,
                  const SolverConfig& config);

/// {status, wall_time, outer_iterations, expansions, stream_evaluations, plan?}
std::string result_json(const SolveResult& result);

}  // namespace lazytamp
