#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lazytamp/domains2d/constants.hpp"
#include "lazytamp/domains2d/scene.hpp"

namespace lazytamp::domains2d {

enum class Family { kStacking, kSorting, kRandom, kClutter, kDistractors };

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);
inline constexpr Family kAllFamilies[] = {Family::kStacking, Family::kSorting, Family::kRandom, Family::kClutter,
                                          Family::kDistractors};

struct ProblemSpec {
  Family family = Family::kRandom;
  std::size_t n_blocks = 3;
  std::size_t n_blockers = 1;
  std::uint64_t seed = 0;
};

struct InfeasibleSpec : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct GeneratedProblem {
  std::string name;
  Scene2D scene;
  std::vector<Goal2D> goal;
  std::string problem_text;
  /// Length of a constructive logical plan; an upper bound on the shortest.
  std::size_t witness_length = 0;
};

/// Deterministic in the spec. Throws InfeasibleSpec if the objects do not fit.
GeneratedProblem generate_problem(const ProblemSpec& spec, const Geometry2D& geometry = {});

/// Three bodies on t0: b0, a tall blocker b2 and b1, each within the reach
/// clearance of the next. Goal: b0 and b1 on t1.
GeneratedProblem fig2_problem(const Geometry2D& geometry = {});

/// Problem text for a scene and goal.
std::string problem_text(const std::string& name, const Scene2D& scene, const std::vector<Goal2D>& goal);

}  // namespace lazytamp::domains2d
