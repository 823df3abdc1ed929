#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lazytamp/clock.hpp"
#include "lazytamp/feasibility.hpp"
#include "lazytamp/model.hpp"
#include "lazytamp/policy.hpp"
#include "lazytamp/stream_planner.hpp"

namespace lazytamp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Generic best-first and beam search

struct SearchStats {
  std::size_t pops = 0;
  std::size_t expansions = 0;
  std::size_t generated = 0;
  bool timed_out = false;
};

template <typename Node>
struct SearchOutcome {
  std::optional<Node> goal;
  SearchStats stats;
};

/// What best_first_search and beam_search need from a search space. `f` is
/// computed once per node; nodes must be cheap to copy (handles).
template <typename S>
concept SearchSpace = requires(S& s, const typename S::Node& n) {
  { s.expand(n) } -> std::convertible_to<std::vector<typename S::Node>>;
  { s.priority(n) } -> std::convertible_to<double>;
  { s.depth(n) } -> std::convertible_to<std::size_t>;
  { s.is_goal(n) } -> std::convertible_to<bool>;
  { s.state_key(n) };
  { s.on_pop(n, 0.0) };
  { s.expired() } -> std::convertible_to<bool>;
};

namespace detail {

template <typename Node>
struct QueueEntry {
  double f;
  std::size_t depth;
  std::size_t seq;
  Node node;
};

/// Orders by f, then lower depth, then insertion order.
struct EntryAfter {
  template <typename E>
  bool operator()(const E& a, const E& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.depth != b.depth) return a.depth > b.depth;
    return a.seq > b.seq;
  }
};

template <typename S>
using KeyOf = std::decay_t<decltype(std::declval<S&>().state_key(std::declval<const typename S::Node&>()))>;

}  // namespace detail

/// Pops argmin f, returns the first popped node satisfying the goal, prunes
/// popped nodes whose state was already expanded. With `check_monotone` a
/// decreasing popped f raises std::logic_error.
template <SearchSpace S>
SearchOutcome<typename S::Node> best_first_search(S& space, const typename S::Node& root, bool check_monotone = false) {
  using Node = typename S::Node;
  using Entry = detail::QueueEntry<Node>;
  SearchOutcome<Node> out;
  std::priority_queue<Entry, std::vector<Entry>, detail::EntryAfter> queue;
  std::unordered_set<detail::KeyOf<S>, typename S::KeyHash> closed;
  std::size_t seq = 0;
  queue.push(Entry{space.priority(root), space.depth(root), seq++, root});
  double last_f = -kInfinity;
  while (!queue.empty()) {
    if (space.expired()) {
      out.stats.timed_out = true;
      return out;
    }
    Entry e = queue.top();
    queue.pop();
    ++out.stats.pops;
    if (check_monotone && e.f < last_f) throw std::logic_error("popped priorities decreased");
    last_f = e.f;
    space.on_pop(e.node, e.f);
    if (space.is_goal(e.node)) {
      out.goal = std::move(e.node);
      return out;
    }
    auto key = space.state_key(e.node);
    if (closed.count(key)) continue;
    ++out.stats.expansions;
    for (Node& child : space.expand(e.node)) {
      ++out.stats.generated;
      const double f = space.priority(child);
      const std::size_t d = space.depth(child);
      queue.push(Entry{f, d, seq++, std::move(child)});
    }
    closed.insert(std::move(key));
  }
  return out;
}

/// Beam width meaning "unbounded"; the beam then degenerates to
/// best_first_search and is run as such.
inline constexpr std::size_t kUnboundedBeam = 0;

/// Each round takes up to `width` lowest-f nodes from the frontier, clears the
/// frontier and expands the selected nodes in f order; their children form
/// the next frontier.
template <SearchSpace S>
SearchOutcome<typename S::Node> beam_search(S& space, const typename S::Node& root, std::size_t width) {
  if (width == kUnboundedBeam) return best_first_search(space, root);
  using Node = typename S::Node;
  using Entry = detail::QueueEntry<Node>;
  SearchOutcome<Node> out;
  std::priority_queue<Entry, std::vector<Entry>, detail::EntryAfter> queue;
  std::unordered_set<detail::KeyOf<S>, typename S::KeyHash> closed;
  std::size_t seq = 0;
  queue.push(Entry{space.priority(root), space.depth(root), seq++, root});
  while (!queue.empty()) {
    std::vector<Entry> beam;
    while (beam.size() < width && !queue.empty()) {
      beam.push_back(queue.top());
      queue.pop();
    }
    queue = {};
    for (Entry& e : beam) {
      if (space.expired()) {
        out.stats.timed_out = true;
        return out;
      }
      ++out.stats.pops;
      space.on_pop(e.node, e.f);
      if (space.is_goal(e.node)) {
        out.goal = std::move(e.node);
        return out;
      }
      auto key = space.state_key(e.node);
      if (closed.count(key)) continue;
      ++out.stats.expansions;
      for (Node& child : space.expand(e.node)) {
        ++out.stats.generated;
        const double f = space.priority(child);
        const std::size_t d = space.depth(child);
        queue.push(Entry{f, d, seq++, std::move(child)});
      }
      closed.insert(std::move(key));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Priorities

/// f = g + h.
inline double f_astar(double g, double h) { return g + h; }

/// f = d / pi with pi = exp(log_pi); +inf when the path probability is zero.
inline double f_levints(std::size_t depth, double log_pi) {
  if (depth == 0) return 0.0;
  if (std::isinf(log_pi) && log_pi < 0) return kInfinity;
  return static_cast<double>(depth) * std::exp(-log_pi);
}

/// Additive delete-relaxation heuristic. Parameters that only streams can
/// produce are relaxed to a wildcard object that unifies with anything;
/// stream-certified preconditions are free. Values are memoized per state.
class HAdd {
 public:
  HAdd(const DomainDefinition& domain, std::vector<Fact> goal);

  /// Sum over goal facts of their relaxed cost, or kInfinity.
  double operator()(const LogicalState& state);
  std::size_t evaluations() const { return evaluations_; }

 private:
  double compute(const LogicalState& state) const;

  const DomainDefinition& domain_;
  std::vector<Fact> goal_;
  std::unordered_map<std::size_t, double> memo_;
  std::size_t evaluations_ = 0;
};

double h_add(const LogicalState& state, std::span<const Fact> goal, const DomainDefinition& domain);

// ---------------------------------------------------------------------------
// Skeleton search over the planning model

struct SearchNode {
  std::shared_ptr<const SearchNode> parent;
  std::optional<ActionInstance> action;
  std::vector<StreamInstance> streams;  // a.streams of the incoming action
  LogicalState state;
  ComputationGraph cg;
  std::size_t depth = 0;
  double g = 0.0;
  double log_pi = 0.0;
  double h = 0.0;
  double f = 0.0;
};

using NodePtr = std::shared_ptr<const SearchNode>;

/// Nodes from the root to `node`, inclusive.
std::vector<const SearchNode*> node_path(const NodePtr& node);

enum class PriorityKind { kAStar, kLevinTS };

struct SkeletonSearchConfig {
  PriorityKind priority = PriorityKind::kAStar;
  const Policy* policy = nullptr;  // required for kLevinTS
};

/// The lazy search space: successors are fluent-applicable actions whose
/// stream-certified preconditions the stream planner can certify.
class SkeletonSpace {
 public:
  using Node = NodePtr;
  using KeyHash = LogicalStateHash;

  SkeletonSpace(const DomainDefinition& domain, const ProblemInstance& problem, StreamPlanner& planner,
                const FeasibilityDB& db, SkeletonSearchConfig config, Deadline deadline = {});

  NodePtr root() const;
  std::vector<NodePtr> expand(const NodePtr& node);
  double priority(const NodePtr& node) const { return node->f; }
  std::size_t depth(const NodePtr& node) const { return node->depth; }
  bool is_goal(const NodePtr& node) const { return goal_satisfied(node->state, problem_.goal); }
  const LogicalState& state_key(const NodePtr& node) const { return node->state; }
  void on_pop(const NodePtr& node, double f);
  bool expired() const { return deadline_.expired(); }

  /// Writes one JSON line per popped node.
  void set_trace(std::ostream* out) { trace_ = out; }
  HAdd& heuristic() { return hadd_; }
  std::size_t policy_queries() const { return policy_queries_; }

 private:
  const std::vector<double>& policy_for(const NodePtr& node, const std::vector<ActionInstance>& actions,
                                        const std::vector<double>& child_h);

  const DomainDefinition& domain_;
  const ProblemInstance& problem_;
  StreamPlanner& planner_;
  const FeasibilityDB& db_;
  SkeletonSearchConfig config_;
  Deadline deadline_;
  std::vector<ObjectId> objects_;
  HAdd hadd_;
  std::ostream* trace_ = nullptr;
  std::size_t policy_queries_ = 0;
  struct PolicyMemo {
    std::vector<ActionInstance> actions;
    std::vector<double> pi;
  };
  std::unordered_map<std::size_t, PolicyMemo> policy_memo_;
};

}  // namespace lazytamp
