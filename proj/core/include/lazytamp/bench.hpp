#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lazytamp/learning.hpp"
#include "lazytamp/policy.hpp"
#include "lazytamp/refinement.hpp"
#include "lazytamp/solver.hpp"

namespace lazytamp {

enum class Algorithm { kAStarHAdd, kLevinTSBestFirst, kLevinTSBeam };
enum class Ablation { kNone, kPolicyOnly, kSearchOnly };

std::string_view to_string(Algorithm algorithm);
std::string_view to_string(Ablation ablation);
Algorithm algorithm_from_string(std::string_view name);
Ablation ablation_from_string(std::string_view name);

struct RunConfig {
  std::string name;  // label in the CSV; derived from the other fields if empty
  Algorithm algorithm = Algorithm::kAStarHAdd;
  std::size_t beam_width = 1;
  std::size_t n_max = 10;
  double timeout_s = 90.0;
  /// "uniform", "boltzmann" or the path of a trained model.
  std::string policy;
  Ablation ablation = Ablation::kNone;
  bool deterministic_clock = true;
  WorkCosts work_costs = {};

  std::string label() const;
  /// Throws std::invalid_argument if a policy is required but missing.
  void validate() const;
};

struct RunRecord {
  std::string config;
  std::string problem_id;
  std::uint64_t seed = 0;
  std::string status;
  double wall_time_s = 0.0;
  std::size_t expansions = 0;
  std::size_t stream_evals = 0;
  std::size_t outer_iters = 0;
  std::size_t plan_len = 0;
};

struct GroupSummary {
  std::string config;
  std::string family;  // "all" for the whole suite
  std::size_t runs = 0;
  std::size_t solved = 0;
  double solve_rate_mean = 0.0;  // over seeds
  double solve_rate_std = 0.0;   // population std over seeds
  std::optional<double> mean_solve_time;
  std::vector<double> curve;  // solve rate at t = 0, 1, 2, ... seconds
};

struct SuiteResult {
  std::vector<RunRecord> records;  // sorted by (config, problem, seed) input order
  std::vector<GroupSummary> summary;
};

struct SuiteOptions {
  std::vector<std::uint64_t> seeds = {0};
  std::size_t threads = 1;
  std::function<void(const RunRecord&)> on_record;  // called under a lock
};

/// Resolves a policy source. Models are loaded against `domain`.
std::shared_ptr<const Policy> make_policy(const std::string& source, const DomainDefinition& domain);

/// The solver configuration a run config stands for.
SolverConfig solver_config(const RunConfig& config, const Policy* policy, std::uint64_t seed);

/// Every (config, problem, seed) combination. Failures of single runs are
/// recorded with status "error" and never abort the suite.
SuiteResult run_suite(const DomainDefinition& domain, const StreamEvaluator& evaluator,
                      const std::vector<NamedProblem>& problems, const std::vector<RunConfig>& configs,
                      const SuiteOptions& options);

/// Family of a problem id: the text before the first '-'.
std::string family_of(const std::string& problem_id);

std::vector<GroupSummary> summarize(const std::vector<RunRecord>& records, const std::vector<RunConfig>& configs);

void write_csv(std::ostream& out, const std::vector<RunRecord>& records);
std::string summary_json(const std::vector<GroupSummary>& summary);
/// Whitespace-separated columns: t, then one solve rate per config ("all").
void write_curve(std::ostream& out, const std::vector<GroupSummary>& summary);

}  // namespace lazytamp
