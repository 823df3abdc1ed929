#include <benchmark/benchmark.h>

#include <random>

#include "lazytamp/domains2d/generator.hpp"
#include "lazytamp/domains2d/tabletop.hpp"
#include "lazytamp/gat.hpp"
#include "lazytamp/parser.hpp"
#include "lazytamp/search.hpp"
#include "lazytamp/solver.hpp"
#include "lazytamp/stream_planner.hpp"

using namespace lazytamp;

namespace {

/// Complete tree with branching `b`, every node its own state, no goal.
class TreeSpace {
 public:
  using Node = std::uint64_t;
  using KeyHash = std::hash<std::uint64_t>;

  TreeSpace(std::size_t b, std::size_t depth) : b_(b), depth_(depth) {}

  std::vector<Node> expand(Node n) const {
    if (level(n) == depth_) return {};
    std::vector<Node> out;
    for (std::size_t i = 0; i < b_; ++i) out.push_back(n * b_ + 1 + i);
    return out;
  }
  double priority(Node n) const { return static_cast<double>(level(n)) + static_cast<double>(n % 7) * 0.01; }
  std::size_t depth(Node n) const { return level(n); }
  bool is_goal(Node) const { return false; }
  Node state_key(Node n) const { return n; }
  void on_pop(Node, double) {}
  bool expired() const { return false; }

 private:
  std::size_t level(Node n) const {
    std::size_t d = 0;
    while (n > 0) {
      n = (n - 1) / b_;
      ++d;
    }
    return d;
  }
  std::size_t b_, depth_;
};

struct Fig2 {
  DomainDefinition domain = parse_domain(domains2d::domain_text());
  ProblemInstance problem = parse_problem(domains2d::fig2_problem().problem_text, domain);
};

const Fig2& fig2() {
  static const Fig2 f;
  return f;
}

void BM_BestFirstTree(benchmark::State& state) {
  const auto depth = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    TreeSpace space(3, depth);
    benchmark::DoNotOptimize(best_first_search(space, 0).stats.expansions);
  }
}
BENCHMARK(BM_BestFirstTree)->Arg(6)->Arg(8);

void BM_BeamTree(benchmark::State& state) {
  for (auto _ : state) {
    TreeSpace space(3, 10);
    benchmark::DoNotOptimize(beam_search(space, 0, static_cast<std::size_t>(state.range(0))).stats.expansions);
  }
}
BENCHMARK(BM_BeamTree)->Arg(1)->Arg(8);

void BM_HAdd(benchmark::State& state) {
  const auto gp = domains2d::generate_problem({domains2d::Family::kRandom, 3, 1, 1});
  const auto domain = parse_domain(domains2d::domain_text());
  const auto problem = parse_problem(gp.problem_text, domain);
  const LogicalState s = problem.initial_state(domain);
  for (auto _ : state) benchmark::DoNotOptimize(h_add(s, problem.goal, domain));
}
BENCHMARK(BM_HAdd);

void BM_CertifyInitialActions(benchmark::State& state) {
  const auto& f = fig2();
  const LogicalState s = f.problem.initial_state(f.domain);
  const auto actions = fluent_applicable(s, f.domain, f.problem.initial_objects());
  for (auto _ : state) {
    ObjectTable objects = f.problem.objects;
    StreamPlanner planner(f.domain, objects);
    std::size_t certified = 0;
    for (const auto& a : actions) certified += planner.certify(a, s, {}).has_value();
    benchmark::DoNotOptimize(certified);
  }
}
BENCHMARK(BM_CertifyInitialActions);

void BM_GatForward(benchmark::State& state) {
  const auto& f = fig2();
  ObjectTable objects = f.problem.objects;
  StreamPlanner planner(f.domain, objects);
  const LogicalState s = f.problem.initial_state(f.domain);
  const GraphEncoder enc(f.domain, f.problem);
  std::vector<ActionCandidate> cands;
  for (const auto& a : fluent_applicable(s, f.domain, f.problem.initial_objects())) {
    if (auto c = planner.certify(a, s, {})) cands.push_back(enc.candidate(c->action));
  }
  const SceneGraph g = enc.encode(s);
  const auto model =
      PolicyModel::initialized(ModelShape::for_domain(f.domain, 2, static_cast<std::size_t>(state.range(0))), 0);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(g, cands));
}
BENCHMARK(BM_GatForward)->Arg(16)->Arg(32)->Arg(64);

void BM_SolveFig2(benchmark::State& state) {
  const auto& f = fig2();
  const domains2d::TabletopEvaluator evaluator(f.domain);
  UniformPolicy uniform;
  SolverConfig c;
  c.priority = state.range(0) == 0 ? PriorityKind::kAStar : PriorityKind::kLevinTS;
  c.policy = &uniform;
  c.deterministic_clock = true;
  for (auto _ : state) benchmark::DoNotOptimize(solve(f.domain, f.problem, evaluator, c).plan.size());
}
BENCHMARK(BM_SolveFig2)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
