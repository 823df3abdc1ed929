#include <doctest.h>

#include <cmath>
#include <random>

#include "json.hpp"
#include "lazytamp/domains2d/generator.hpp"
#include "lazytamp/domains2d/tabletop.hpp"
#include "lazytamp/feasibility.hpp"
#include "lazytamp/parser.hpp"
#include "lazytamp/refinement.hpp"
#include "lazytamp/solver.hpp"
#include "support.hpp"

using namespace lazytamp;
using testing::ScriptedEvaluator;

using testing::stats_of;
using testing::ToySkeleton;

TEST_CASE("refine: every sampler succeeds") {
  ToySkeleton t;
  ScriptedEvaluator ev;
  FeasibilityDB db;
  const auto r = t.run(ev, db, 10);
  REQUIRE(r.binding);
  CHECK(r.passes == 1);
  CHECK(r.stream_evals == 2);
  CHECK(db.size() == 2);
  for (const auto& [key, s] : db.entries()) CHECK(s == StreamStats{1, 1});
  CHECK(!validate_plan(t.skeleton, *r.binding, {t.domain, t.problem, t.objects, ev}));
}

TEST_CASE("refine: grasp fails once, then succeeds") {
  ToySkeleton t;
  ScriptedEvaluator ev;
  ev.scripts["grasp"] = [](std::size_t call, Rng&) { return call > 0; };
  FeasibilityDB db;
  const auto r = t.run(ev, db, 2);
  REQUIRE(r.binding);
  CHECK(r.passes == 2);
  CHECK(stats_of(db, "grasp") == StreamStats{2, 1});
  CHECK(stats_of(db, "pose") == StreamStats{1, 1});
}

TEST_CASE("refine: a stream that always fails") {
  ToySkeleton t;
  ScriptedEvaluator ev;
  ev.scripts["pose"] = [](std::size_t, Rng&) { return false; };
  FeasibilityDB db;
  const auto r = t.run(ev, db, 3);
  CHECK(!r.binding);
  CHECK(r.passes == 3);
  CHECK(stats_of(db, "pose") == StreamStats{3, 0});
  // The place step never succeeded, so it has no partial grounding to fall
  // back on: every pass restarts from the pick.
  CHECK(stats_of(db, "grasp") == StreamStats{3, 3});

  FeasibilityDB fresh;
  t.run(ev, fresh, 3, 0, false);
  CHECK(stats_of(fresh, "pose") == StreamStats{3, 0});
  CHECK(stats_of(fresh, "grasp") == StreamStats{3, 3});
}

TEST_CASE("refine: with-replacement success bound") {
  // k = 2 streams, each draw succeeds with p = 0.5, N_max = 5 passes.
  const double p = 0.5;
  const double bound = 1.0 - std::pow(1.0 - p * p, 5);
  const double sigma = std::sqrt(bound * (1.0 - bound) / 1000.0);
  ToySkeleton t;
  ScriptedEvaluator ev;
  const auto coin = [p](std::size_t, Rng& rng) { return std::bernoulli_distribution(p)(rng); };
  ev.scripts["grasp"] = coin;
  ev.scripts["pose"] = coin;
  for (bool reuse : {false, true}) {
    std::size_t solved = 0;
    for (std::uint64_t trial = 0; trial < 1000; ++trial) {
      FeasibilityDB db;
      solved += t.run(ev, db, 5, trial, reuse).binding.has_value();
    }
    const double rate = static_cast<double>(solved) / 1000.0;
    CAPTURE(reuse);
    CAPTURE(rate);
    CHECK(rate >= bound - 3.0 * sigma);
    // Without partial groundings every pass is an independent p^k trial.
    if (!reuse) CHECK(std::abs(rate - bound) <= 3.0 * sigma);
  }
}

TEST_CASE("refine is deterministic and statistics only grow") {
  ToySkeleton t;
  ScriptedEvaluator ev;
  const auto coin = [](std::size_t, Rng& rng) { return std::bernoulli_distribution(0.3)(rng); };
  ev.scripts["grasp"] = coin;
  ev.scripts["pose"] = coin;
  FeasibilityDB a, b;
  const auto ra = t.run(ev, a, 6, 17);
  const auto rb = t.run(ev, b, 6, 17);
  CHECK(ra.binding == rb.binding);
  CHECK(a.entries() == b.entries());

  FeasibilityDB db;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto before = db.entries();
    t.run(ev, db, 3, seed);
    for (const auto& [key, s] : before) CHECK(db.get(key).attempts >= s.attempts);
    for (const auto& [key, s] : db.entries()) CHECK(s.successes <= s.attempts);
  }
}

TEST_CASE("phi") {
  CHECK(stream_feasibility({}) == 1.0);
  const std::vector<StreamStats> stats = {{4, 0}, {3, 3}};
  CHECK(phi(stats) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(phi(std::vector<StreamStats>{{5, 5}}) == 1.0);
  CHECK(phi(std::vector<StreamStats>{}) == 1.0);
  CHECK(feedback_cost(0.2) == doctest::Approx(5.0));

  // Antitone in failures.
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    std::vector<StreamStats> s(1 + rng() % 4);
    for (auto& x : s) {
      x.attempts = rng() % 10;
      x.successes = x.attempts ? rng() % (x.attempts + 1) : 0;
    }
    const double before = phi(s);
    s[rng() % s.size()].attempts += 1;
    CHECK(phi(s) <= before);
  }
}

TEST_CASE("phi of stream instances reads the database by key") {
  FeasibilityDB db;
  StreamInstance a, b;
  a.key = "a(x)";
  b.key = "b(x)";
  const std::vector<StreamInstance> streams = {a, b};
  CHECK(phi(streams, db) == 1.0);
  for (int i = 0; i < 4; ++i) db.record("a(x)", false);
  for (int i = 0; i < 3; ++i) db.record("b(x)", true);
  CHECK(phi(streams, db) == doctest::Approx(0.2));
}

TEST_CASE("renormalize_policy") {
  const std::vector<double> pi = {0.6, 0.4};
  const auto same = renormalize_policy(pi, std::vector<double>{1.0, 1.0});
  CHECK(same[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(same[1] == doctest::Approx(0.4).epsilon(1e-15));
  const auto bar = renormalize_policy(pi, std::vector<double>{0.5, 1.0});
  CHECK(bar[0] == doctest::Approx(0.3 / 0.7).epsilon(1e-12));
  CHECK(bar[1] == doctest::Approx(0.4 / 0.7).epsilon(1e-12));
  CHECK(renormalize_policy(std::vector<double>{1.0}, std::vector<double>{0.01})[0] == 1.0);
}

namespace {

SolverConfig config_for(PriorityKind kind, const Policy* policy) {
  SolverConfig c;
  c.priority = kind;
  c.policy = policy;
  c.deterministic_clock = true;
  c.timeout_s = 60.0;
  return c;
}

}  // namespace

TEST_CASE("solve: feedback moves the search to the feasible route") {
  const auto domain = parse_domain(testing::kTwoRouteDomain);
  const auto problem = parse_problem(testing::kTwoRouteProblem, domain);
  ScriptedEvaluator ev;
  ev.scripts["a"] = [](std::size_t, Rng&) { return false; };
  UniformPolicy uniform;
  for (PriorityKind kind : {PriorityKind::kAStar, PriorityKind::kLevinTS}) {
    const auto r = solve(domain, problem, ev, config_for(kind, &uniform));
    REQUIRE(r.solved());
    CHECK(r.outer_iterations == 2);
    CHECK(r.plan.size() == 2);
    CHECK(r.iterations[0].skeleton.size() == 1);
    CHECK(!r.iterations[0].refined);
  }
}

TEST_CASE("solve: trivial goal returns the empty plan without refinement") {
  const auto domain = parse_domain(testing::kToyDomain);
  const auto problem = parse_problem(testing::toy_problem("(Block b0) (Free)", "(Free)"), domain);
  ScriptedEvaluator ev;
  const auto r = solve(domain, problem, ev, config_for(PriorityKind::kAStar, nullptr));
  REQUIRE(r.solved());
  CHECK(r.plan.empty());
  CHECK(r.stream_evals == 0);
  CHECK(ev.calls.empty());
}

TEST_CASE("solve: exhausted optimistic space") {
  const auto domain = parse_domain(testing::kToyDomain);
  const auto problem = parse_problem(testing::toy_problem("(Block b0)", "(Placed b0)"), domain);
  ScriptedEvaluator ev;
  const auto r = solve(domain, problem, ev, config_for(PriorityKind::kAStar, nullptr));
  CHECK(r.status == SolveStatus::kUnsolvable);
  CHECK(r.time_s < 60.0);
}

TEST_CASE("solve: timeout") {
  const auto domain = parse_domain(testing::kToyDomain);
  const auto problem = parse_problem(testing::toy_problem("(Block b0) (Free)", "(Placed b0)"), domain);
  ScriptedEvaluator ev;
  ev.scripts["pose"] = [](std::size_t, Rng&) { return false; };
  auto c = config_for(PriorityKind::kAStar, nullptr);
  c.timeout_s = 0.5;
  const auto r = solve(domain, problem, ev, c);
  CHECK(r.status == SolveStatus::kTimeout);
  CHECK(r.time_s >= 0.5);
  CHECK(r.time_s <= 0.5 + WorkCosts{}.expansion + 16 * WorkCosts{}.child);
}

TEST_CASE("solve: the blocked-grasp scene") {
  const auto domain = parse_domain(domains2d::domain_text());
  const domains2d::TabletopEvaluator ev(domain);
  const auto problem = parse_problem(domains2d::fig2_problem().problem_text, domain);
  UniformPolicy uniform;
  for (PriorityKind kind : {PriorityKind::kAStar, PriorityKind::kLevinTS}) {
    const auto r = solve(domain, problem, ev, config_for(kind, &uniform));
    REQUIRE(r.solved());
    CHECK(r.plan.size() == 6);
    CHECK(r.outer_iterations <= 5);
    REQUIRE(!r.iterations.empty());
    CHECK(!r.iterations[0].refined);
    const std::string& first = r.iterations[0].skeleton.front();
    CHECK((first.rfind("(pick b0 ", 0) == 0 || first.rfind("(pick b1 ", 0) == 0));
    CHECK(r.plan.actions[0].args[0].value == decltype(r.plan.actions[0].args[0].value){std::string("b2")});
    const std::string text = serialize_plan(r.plan);
    CHECK(std::count(text.begin(), text.end(), '\n') == 6);
  }
}

TEST_CASE("result JSON") {
  const auto domain = parse_domain(testing::kTwoRouteDomain);
  const auto problem = parse_problem(testing::kTwoRouteProblem, domain);
  ScriptedEvaluator ev;
  const auto r = solve(domain, problem, ev, config_for(PriorityKind::kAStar, nullptr));
  const auto j = nlohmann::json::parse(result_json(r));
  CHECK(j.at("status") == "solved");
  CHECK(j.at("outer_iterations") == 1);
  CHECK(j.at("plan").size() == 1);
  for (const char* k : {"wall_time", "expansions", "stream_evaluations"}) CHECK(j.contains(k));
}

TEST_CASE("grounding without values leaves parameters unbound") {
  ToySkeleton t;
  const GroundedPlan plan = ground(t.skeleton, {}, t.domain, t.objects);
  CHECK(plan.actions[0].args[1].value == decltype(plan.actions[0].args[1].value){Unbound{}});
  CHECK_THROWS_AS(serialize_plan(plan), UnboundParameterError);
}

TEST_CASE("partial groundings rescue a later dead end") {
  // pick b0, place b0, pick b1, place b1. Pass 1 fails at the last pose;
  // pass 2 fails the first grasp, which falls back on its pass-1 grounding.
  ToySkeleton t("(Block b0) (Block b1) (Free)", "(Placed b0) (Placed b1)");
  REQUIRE(t.skeleton.size() == 4);
  ScriptedEvaluator ev;
  ev.scripts["grasp"] = [](std::size_t call, Rng&) { return call != 2; };
  ev.scripts["pose"] = [](std::size_t call, Rng&) { return call != 1; };
  FeasibilityDB db;
  const auto r = t.run(ev, db, 2);
  REQUIRE(r.binding);
  CHECK(r.passes == 2);
  CHECK(r.stream_evals == 8);

  ScriptedEvaluator again;
  again.scripts = ev.scripts;
  FeasibilityDB plain;
  CHECK(!t.run(again, plain, 2, 0, false).binding);
}
