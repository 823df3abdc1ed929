#pragma once

#include <string>
#include <vector>

namespace lazytamp::domains2d {

struct TableSpec {
  std::string id;
  double lo = 0.0;
  double hi = 1.0;
};

/// Every geometric constant of the tabletop domain, in metres.
struct Geometry2D {
  double block_width = 0.1;
  double block_height = 0.1;
  double blocker_width = 0.1;
  double blocker_height_min = 0.25;
  double blocker_height_max = 0.30;
  /// A grasp fails if a strictly taller neighbour on the same support is
  /// closer than this.
  double reach_clearance = 0.03;
  /// Free gap kept around placed objects. Larger than reach_clearance, so a
  /// placed object never obstructs a later grasp.
  double placement_margin = 0.04;
  /// Rejection-sampling tries per placement call.
  int placement_tries = 16;
  /// Grasp offsets are uniform in +-fraction * width around the centre.
  double grasp_offset_fraction = 0.25;
  /// IK adds a uniform approach height in [0, ik_height_jitter].
  double ik_height_jitter = 0.05;
  /// Half-width of the stack-placement jitter.
  double stack_jitter = 0.01;
  /// Reachable interval of the gripper along the table line.
  double reach_lo = -0.2;
  double reach_hi = 3.6;
  double q_init_x = 1.1;
  double q_init_y = 0.8;
  /// Minimum centre distance of clutter placements (ordered Poisson disc).
  double poisson_radius = 0.12;
  /// Gap drawn between a blocker and the block it is meant to obstruct.
  double obstruct_gap_max = 0.02;
  std::vector<TableSpec> tables = {{"t0", 0.0, 1.0}, {"t1", 1.2, 2.2}, {"t2", 2.4, 3.4}};
  /// Extra table holding distractor objects.
  TableSpec distractor_table = {"t3", 3.6, 4.6};
};

}  // namespace lazytamp::domains2d
