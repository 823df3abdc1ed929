#pragma once

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lazytamp/clock.hpp"
#include "lazytamp/feasibility.hpp"
#include "lazytamp/model.hpp"
#include "lazytamp/search.hpp"
#include "lazytamp/stream_planner.hpp"

namespace lazytamp {

using Values = std::vector<double>;
using Rng = std::mt19937_64;

/// Continuous world snapshot owned by a StreamEvaluator.
class WorldState {
 public:
  virtual ~WorldState() = default;
  virtual std::unique_ptr<WorldState> clone() const = 0;
};

/// Inputs of one sampler call.
struct SampleRequest {
  const StreamSchema& schema;
  std::span<const ObjectId> inputs;
  std::span<const Values> input_values;  // empty for purely discrete objects
  const ObjectTable& objects;
  const WorldState& world;
};

/// Black-box geometry: samplers for each stream, the continuous effect of
/// each action and validators for stream-certified predicates.
class StreamEvaluator {
 public:
  virtual ~StreamEvaluator() = default;
  virtual std::unique_ptr<WorldState> initial_world(const ProblemInstance& problem) const = 0;
  /// One draw (with replacement). Absent means this draw failed.
  virtual std::optional<std::vector<Values>> sample(const SampleRequest& request, Rng& rng) const = 0;
  /// Continuous effect of a bound action on `world`.
  virtual void apply(const ActionSchema& action, std::span<const ObjectId> args, std::span<const Values> values,
                     const ObjectTable& objects, WorldState& world) const = 0;
  /// Recomputes a stream-certified predicate from values. Throws
  /// std::invalid_argument for predicates it does not know.
  virtual bool validate(const PredicateDecl& predicate, std::span<const ObjectId> args,
                        std::span<const Values> values, const ObjectTable& objects, const WorldState& world) const = 0;
};

/// One independent random stream per stream-instance key, seeded from
/// (seed, stream name, key) and kept for the whole solve.
class SamplerPool {
 public:
  explicit SamplerPool(std::uint64_t seed) : seed_(seed) {}
  Rng& rng(const std::string& stream_name, const std::string& key);

 private:
  std::uint64_t seed_;
  std::map<std::string, Rng> streams_;
};

std::uint64_t stable_hash(std::string_view text, std::uint64_t seed = 0);

struct SkeletonStep {
  ActionInstance action;
  std::vector<StreamInstance> streams;
};
using Skeleton = std::vector<SkeletonStep>;

Skeleton skeleton_of(const NodePtr& node);

/// theta: values bound to optimistic objects.
using Binding = std::map<ObjectId, Values>;

struct RefineOptions {
  /// Number of passes; 0 = unbounded (until the deadline).
  std::size_t n_max = 10;
  bool reuse_partial = true;
};

struct RefineResult {
  std::optional<Binding> binding;
  std::size_t stream_evals = 0;
  std::size_t passes = 0;
  bool timed_out = false;
};

struct RefineContext {
  const DomainDefinition& domain;
  const ProblemInstance& problem;
  const ObjectTable& objects;
  const StreamEvaluator& evaluator;
};

/// Skeleton refinement with first-action restarts. Every sampler call
/// increments the attempt count of its key in `db`; successes increment the
/// success count.
RefineResult refine(const Skeleton& skeleton, const RefineContext& ctx, FeasibilityDB& db, SamplerPool& pool,
                    const Deadline& deadline = {}, RefineOptions options = {});

/// Values of an object: its problem payload or its binding (empty if neither).
Values value_of(ObjectId o, const ObjectTable& objects, const Binding& binding);

/// Builds the grounded plan. Optimistic arguments without a value are marked
/// Unbound (serialize_plan rejects them).
GroundedPlan ground(const Skeleton& skeleton, const Binding& binding, const DomainDefinition& domain,
                    const ObjectTable& objects);

/// Replays the skeleton: fluent and static preconditions hold stepwise,
/// every stream-certified precondition is certified by the action's streams
/// or held before, and every certified fact validates against the bound
/// values in the world at that step. Returns an error message or nothing.
std::optional<std::string> validate_plan(const Skeleton& skeleton, const Binding& binding, const RefineContext& ctx);

}  // namespace lazytamp
