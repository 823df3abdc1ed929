#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lazytamp/domains2d/constants.hpp"
#include "lazytamp/model.hpp"

namespace lazytamp::domains2d {

struct Table2D {
  std::string id;
  double lo = 0.0;
  double hi = 1.0;
};

/// A block or blocker. `x` is the centre; `support` is a table id or the id
/// of the block it rests on.
struct Body2D {
  std::string id;
  double width = 0.1;
  double height = 0.1;
  double x = 0.0;
  std::string support;
  bool blocker = false;
  bool distractor = false;
};

struct Goal2D {
  std::string body;
  std::string target;  // table or block id

  friend bool operator==(const Goal2D&, const Goal2D&) = default;
};

struct Scene2D {
  std::vector<Table2D> tables;
  std::vector<Body2D> bodies;
  double q_x = 1.1;
  double q_y = 0.8;
  double reach_clearance = 0.03;

  const Table2D* table(const std::string& id) const;
  const Body2D* body(const std::string& id) const;
  /// Height of the bottom face of `body` above the ground line.
  double base_y(const Body2D& body) const;
  /// Table at the bottom of the support chain.
  const Table2D* root_table(const Body2D& body) const;
  /// Bodies directly on `support`.
  std::vector<const Body2D*> on(const std::string& support) const;
  /// Checks supports exist, no overlaps on a support, bodies within tables.
  /// Returns a description of the first violation.
  std::optional<std::string> invariant_violation() const;
};

/// Rebuilds the scene from a problem's facts and `:values` payloads.
Scene2D scene_from_problem(const ProblemInstance& problem, const DomainDefinition& domain);

/// Pretty JSON for debugging and figures.
std::string scene_json(const Scene2D& scene, const std::vector<Goal2D>& goal = {});

}  // namespace lazytamp::domains2d
