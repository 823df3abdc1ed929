#include "lazytamp/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lazytamp {

std::vector<double> uniform_policy(std::size_t n) {
  if (n == 0) throw std::invalid_argument("policy over an empty action set");
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

std::vector<double> boltzmann_policy(std::span<const double> h, double temperature) {
  if (h.empty()) throw std::invalid_argument("policy over an empty action set");
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  double lo = std::numeric_limits<double>::infinity();
  for (double v : h) lo = std::min(lo, v);
  if (std::isinf(lo)) return uniform_policy(h.size());
  std::vector<double> p(h.size());
  double z = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    p[i] = std::isinf(h[i]) ? 0.0 : std::exp(-(h[i] - lo) / temperature);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

BoltzmannPolicy::BoltzmannPolicy(double temperature) : temperature_(temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
}

std::vector<double> BoltzmannPolicy::distribution(const PolicyContext& ctx) const {
  if (ctx.child_h.size() != ctx.actions.size()) throw std::logic_error("boltzmann policy needs child heuristics");
  return boltzmann_policy(ctx.child_h, temperature_);
}

}  // namespace lazytamp
