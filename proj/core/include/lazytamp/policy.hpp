#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lazytamp/model.hpp"

namespace lazytamp {

/// Everything a policy may look at when scoring the actions applicable in
/// one search node.
struct PolicyContext {
  const DomainDefinition& domain;
  const ProblemInstance& problem;
  const ObjectTable& objects;
  const LogicalState& state;
  std::span<const ActionInstance> actions;
  /// h_add of each child; only filled for policies that ask for it.
  std::span<const double> child_h;
};

/// pi(a | s, G) over the given candidate actions.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::vector<double> distribution(const PolicyContext& ctx) const = 0;
  virtual bool needs_heuristic() const { return false; }
  /// Whether a query costs real work (charged to a deterministic clock).
  virtual bool expensive() const { return false; }
  virtual std::string name() const = 0;
};

std::vector<double> uniform_policy(std::size_t n);
/// softmax(-h / temperature). Children with infinite h get probability 0
/// unless every child is infinite, in which case the result is uniform.
std::vector<double> boltzmann_policy(std::span<const double> h, double temperature);

class UniformPolicy : public Policy {
 public:
  std::vector<double> distribution(const PolicyContext& ctx) const override {
    return uniform_policy(ctx.actions.size());
  }
  std::string name() const override { return "uniform"; }
};

class BoltzmannPolicy : public Policy {
 public:
  explicit BoltzmannPolicy(double temperature = 1.0);
  std::vector<double> distribution(const PolicyContext& ctx) const override;
  bool needs_heuristic() const override { return true; }
  std::string name() const override { return "boltzmann"; }

 private:
  double temperature_;
};

}  // namespace lazytamp
