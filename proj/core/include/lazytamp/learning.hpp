#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lazytamp/gat.hpp"
#include "lazytamp/model.hpp"
#include "lazytamp/refinement.hpp"
#include "lazytamp/solver.hpp"

namespace lazytamp {

/// One <G, s_{j-1}, a_j> tuple. The problem text carries I and G, `prefix`
/// leads from I to s_{j-1}, `candidates` are the actions the search could
/// take there and `label` indexes the demonstrated one. Actions are written
/// as `(name arg ...)`; stream-produced arguments use their optimistic names.
struct Demonstration {
  std::string problem;
  std::string problem_text;
  std::vector<std::string> prefix;
  std::vector<std::string> candidates;
  std::size_t label = 0;
};

struct SkipRecord {
  std::string problem;
  std::string reason;
};

struct DemoSet {
  std::vector<Demonstration> demos;
  std::vector<SkipRecord> skipped;
};

struct NamedProblem {
  std::string name;
  std::string text;
};

/// Solves every problem with `config` and turns each solved plan into one
/// demonstration per step, replaying the skeleton through the known abstract
/// transition function.
DemoSet collect_demos(const DomainDefinition& domain, const std::vector<NamedProblem>& problems,
                      const StreamEvaluator& evaluator, const SolverConfig& config);

/// Demonstrations from one solve result.
std::vector<Demonstration> demos_from_result(const DomainDefinition& domain, const ProblemInstance& problem,
                                             const std::string& problem_text, const SolveResult& result);

void write_demos(std::ostream& out, const std::vector<Demonstration>& demos);
std::vector<Demonstration> read_demos(std::istream& in);

/// A demonstration resolved against its problem: ready for the model.
struct EncodedDemo {
  SceneGraph graph;
  std::vector<ActionCandidate> candidates;
  std::size_t label = 0;
};

/// Throws InvalidPrefix if the prefix does not replay, std::invalid_argument
/// for malformed actions.
EncodedDemo encode_demo(const DomainDefinition& domain, const Demonstration& demo);

struct TrainConfig {
  std::size_t layers = 2;
  std::size_t width = 32;
  double learning_rate = 1e-2;
  std::size_t epochs = 50;
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;
};

struct TrainResult {
  PolicyModel model;
  /// Mean cross-entropy over the epoch, measured before each update.
  std::vector<double> loss_trace;
};

/// Plain gradient descent on the mean cross-entropy. Deterministic in the
/// seed. Throws std::runtime_error on a non-finite loss.
TrainResult bc_train(const DomainDefinition& domain, const std::vector<EncodedDemo>& demos, const TrainConfig& config);
TrainResult bc_train(const DomainDefinition& domain, const std::vector<Demonstration>& demos,
                     const TrainConfig& config);

/// Mean cross-entropy of `model` on `demos`.
double mean_loss(const PolicyModel& model, const std::vector<EncodedDemo>& demos);

}  // namespace lazytamp
