#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "lazytamp/stream_planner.hpp"

namespace lazytamp {

struct StreamStats {
  std::size_t attempts = 0;
  std::size_t successes = 0;

  friend bool operator==(const StreamStats&, const StreamStats&) = default;
};

/// Feasibility statistics keyed by computation-graph key. Empty at solver
/// start; counts only grow.
class FeasibilityDB {
 public:
  void record(const std::string& key, bool success);
  StreamStats get(const std::string& key) const;
  bool contains(const std::string& key) const { return stats_.count(key) != 0; }
  std::size_t size() const { return stats_.size(); }
  const std::map<std::string, StreamStats>& entries() const { return stats_; }

 private:
  std::map<std::string, StreamStats> stats_;
};

/// (successes + 1) / (attempts + 1) for one stream key.
double stream_feasibility(const StreamStats& stats);

/// min over `streams` of the smoothed success ratio; 1 for an action
/// without streams or with only unseen streams.
double phi(std::span<const StreamInstance> streams, const FeasibilityDB& db);
double phi(std::span<const StreamStats> stats);

/// c(a|s) = 1 / phi.
inline double feedback_cost(double phi_value) { return 1.0 / phi_value; }

/// pi_bar(a) = pi(a) phi(a) / sum_a' pi(a') phi(a').
std::vector<double> renormalize_policy(std::span<const double> pi, std::span<const double> phi_values);

}  // namespace lazytamp
