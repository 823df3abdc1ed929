#pragma once

#include <string>

#include "lazytamp/domains2d/constants.hpp"
#include "lazytamp/domains2d/scene.hpp"
#include "lazytamp/refinement.hpp"

namespace lazytamp::domains2d {

/// Domain text of the tabletop domain. With `with_motion`, placing also
/// needs a collision-free transit between configurations.
std::string domain_text(bool with_motion = false);

/// Samplers, action effects and validators of the tabletop geometry.
class TabletopEvaluator : public StreamEvaluator {
 public:
  TabletopEvaluator(const DomainDefinition& domain, Geometry2D geometry = {});

  std::unique_ptr<WorldState> initial_world(const ProblemInstance& problem) const override;
  std::optional<std::vector<Values>> sample(const SampleRequest& request, Rng& rng) const override;
  void apply(const ActionSchema& action, std::span<const ObjectId> args, std::span<const Values> values,
             const ObjectTable& objects, WorldState& world) const override;
  bool validate(const PredicateDecl& predicate, std::span<const ObjectId> args, std::span<const Values> values,
                const ObjectTable& objects, const WorldState& world) const override;

  const Geometry2D& geometry() const { return geometry_; }

 private:
  const DomainDefinition& domain_;
  Geometry2D geometry_;
};

}  // namespace lazytamp::domains2d
