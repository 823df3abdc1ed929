#include "lazytamp/feasibility.hpp"

#include <algorithm>
#include <stdexcept>

namespace lazytamp {

void FeasibilityDB::record(const std::string& key, bool success) {
  StreamStats& s = stats_[key];
  ++s.attempts;
  if (success) ++s.successes;
}

StreamStats FeasibilityDB::get(const std::string& key) const {
  auto it = stats_.find(key);
  return it == stats_.end() ? StreamStats{} : it->second;
}

double stream_feasibility(const StreamStats& stats) {
  return (static_cast<double>(stats.successes) + 1.0) / (static_cast<double>(stats.attempts) + 1.0);
}

double phi(std::span<const StreamInstance> streams, const FeasibilityDB& db) {
  double value = 1.0;
  for (const StreamInstance& s : streams) value = std::min(value, stream_feasibility(db.get(s.key)));
  return value;
}

double phi(std::span<const StreamStats> stats) {
  double value = 1.0;
  for (const StreamStats& s : stats) value = std::min(value, stream_feasibility(s));
  return value;
}

std::vector<double> renormalize_policy(std::span<const double> pi, std::span<const double> phi_values) {
  if (pi.size() != phi_values.size()) throw std::invalid_argument("renormalize_policy: size mismatch");
  std::vector<double> out(pi.size());
  double z = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (!(phi_values[i] > 0.0 && phi_values[i] <= 1.0)) throw std::invalid_argument("phi must lie in (0, 1]");
    out[i] = pi[i] * phi_values[i];
    z += out[i];
  }
  if (!(z > 0.0)) throw std::logic_error("renormalize_policy: policy mass vanished");
  for (double& v : out) v /= z;
  return out;
}

}  // namespace lazytamp
