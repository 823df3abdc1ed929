#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lazytamp/bench.hpp"
#include "lazytamp/domains2d/generator.hpp"
#include "lazytamp/domains2d/tabletop.hpp"
#include "lazytamp/parser.hpp"

using namespace lazytamp;

namespace {

struct Suite {
  DomainDefinition domain = parse_domain(domains2d::domain_text());
  domains2d::TabletopEvaluator evaluator{domain};

  SuiteResult run(const std::vector<NamedProblem>& problems, const std::vector<RunConfig>& configs,
                  std::vector<std::uint64_t> seeds = {0}, std::size_t threads = 1) const {
    SuiteOptions o;
    o.seeds = std::move(seeds);
    o.threads = threads;
    return run_suite(domain, evaluator, problems, configs, o);
  }
};

NamedProblem named(const domains2d::GeneratedProblem& gp) { return {gp.name, gp.problem_text}; }

RunConfig config(Algorithm a, std::string policy = "", Ablation ablation = Ablation::kNone) {
  RunConfig c;
  c.algorithm = a;
  c.policy = std::move(policy);
  c.ablation = ablation;
  c.timeout_s = 30.0;
  return c;
}

RunRecord record(const std::string& config, const std::string& problem, std::uint64_t seed, bool solved,
                 double time = 0.0) {
  RunRecord r;
  r.config = config;
  r.problem_id = problem;
  r.seed = seed;
  r.status = solved ? "solved" : "timeout";
  r.wall_time_s = time;
  return r;
}

}  // namespace

TEST_CASE("one problem, one config, three seeds") {
  const Suite s;
  const auto r = s.run({named(domains2d::fig2_problem())}, {config(Algorithm::kAStarHAdd)}, {0, 1, 2});
  REQUIRE(r.records.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.records[i].seed == i);
    CHECK(r.records[i].config == "astar-hadd");
    CHECK(r.records[i].problem_id == "fig2");
    CHECK(r.records[i].status == "solved");
    CHECK(r.records[i].plan_len == 6);
  }
  REQUIRE(!r.summary.empty());
  CHECK(r.summary[0].family == "all");
  CHECK(r.summary[0].runs == 3);
  CHECK(r.summary[0].solve_rate_mean == 100.0);
  CHECK(r.summary[0].solve_rate_std == 0.0);
}

TEST_CASE("summary statistics over seeds") {
  RunConfig c = config(Algorithm::kAStarHAdd);
  c.timeout_s = 3.0;
  // Per seed: 2/2, 1/2, 0/2 solved.
  const std::vector<RunRecord> records = {
      record("astar-hadd", "stacking-0", 0, true, 0.5), record("astar-hadd", "sorting-0", 0, true, 2.5),
      record("astar-hadd", "stacking-0", 1, true, 1.0), record("astar-hadd", "sorting-0", 1, false),
      record("astar-hadd", "stacking-0", 2, false),      record("astar-hadd", "sorting-0", 2, false)};
  const auto summary = summarize(records, {c});
  REQUIRE(summary.size() == 3);
  const auto& all = summary[0];
  CHECK(all.family == "all");
  CHECK(all.runs == 6);
  CHECK(all.solved == 3);
  CHECK(all.solve_rate_mean == doctest::Approx(50.0));
  CHECK(all.solve_rate_std == doctest::Approx(std::sqrt((2500.0 + 0.0 + 2500.0) / 3.0)));
  REQUIRE(all.mean_solve_time);
  CHECK(*all.mean_solve_time == doctest::Approx(4.0 / 3.0));
  // Solved by t = 0, 1, 2, 3 seconds, as a percentage of all six runs.
  CHECK(all.curve == std::vector<double>{0.0, 200.0 / 6, 200.0 / 6, 300.0 / 6});
  CHECK(summary[1].family == "sorting");
  CHECK(summary[1].solved == 1);
  CHECK(summary[2].family == "stacking");
  CHECK(summary[2].solved == 2);

  const auto none = summarize({record("x", "a-1", 0, false), record("x", "a-2", 0, false)},
                              {RunConfig{.name = "x", .timeout_s = 1.0}});
  CHECK(none[0].solve_rate_mean == 0.0);
  CHECK(!none[0].mean_solve_time);
  CHECK(summary_json(none).find("\"mean_solve_time\": null") != std::string::npos);
}

TEST_CASE("search-only is LevinTS best-first with a uniform policy") {
  const Suite s;
  std::vector<NamedProblem> problems;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    problems.push_back(named(domains2d::generate_problem({domains2d::kAllFamilies[seed], 2, 1, seed})));
  }
  const auto a = s.run(problems, {config(Algorithm::kAStarHAdd, "", Ablation::kSearchOnly)});
  const auto b = s.run(problems, {config(Algorithm::kLevinTSBestFirst, "uniform")});
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].config == "search-only");
    CHECK(b.records[i].config == "levints-bfs");
    auto x = a.records[i];
    x.config = b.records[i].config;
    CHECK(x.status == b.records[i].status);
    CHECK(x.expansions == b.records[i].expansions);
    CHECK(x.stream_evals == b.records[i].stream_evals);
    CHECK(x.wall_time_s == b.records[i].wall_time_s);
    CHECK(x.plan_len == b.records[i].plan_len);
  }
}

TEST_CASE("policy-only refines a single skeleton") {
  const Suite s;
  // One free block to move: the greedy skeleton is feasible.
  const auto gp = domains2d::generate_problem({domains2d::Family::kStacking, 1, 0, 0});
  const auto r = s.run({named(gp)}, {config(Algorithm::kAStarHAdd, "uniform", Ablation::kPolicyOnly)});
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].status == "solved");
  CHECK(r.records[0].outer_iters == 1);
  CHECK(r.records[0].plan_len == 2);

  // The blocked instance: the first greedy skeleton is infeasible and is never replaced.
  RunConfig short_run = config(Algorithm::kAStarHAdd, "uniform", Ablation::kPolicyOnly);
  short_run.timeout_s = 3.0;
  const auto fig2 = s.run({named(domains2d::fig2_problem())}, {short_run});
  CHECK(fig2.records[0].status == "timeout");
  CHECK(fig2.records[0].outer_iters == 1);
}

TEST_CASE("csv layout and reproducibility") {
  const Suite s;
  std::vector<NamedProblem> problems = {named(domains2d::fig2_problem()),
                                        named(domains2d::generate_problem({domains2d::Family::kRandom, 2, 1, 3}))};
  std::vector<RunConfig> configs = {config(Algorithm::kAStarHAdd), config(Algorithm::kLevinTSBeam, "boltzmann")};
  for (auto& c : configs) c.timeout_s = 2.0;
  std::ostringstream one, two;
  write_csv(one, s.run(problems, configs, {0, 1}, 1).records);
  write_csv(two, s.run(problems, configs, {0, 1}, 2).records);
  CHECK(one.str() == two.str());
  const std::string text = one.str();
  CHECK(text.rfind("config,problem_id,seed,status,wall_time_s,expansions,stream_evals,outer_iters,plan_len\n", 0) ==
        0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 2 * 2 * 2);
  CHECK(text.find("\nlevints-beam1,fig2,1,") != std::string::npos);

  std::ostringstream quoted;
  write_csv(quoted, {record("a,b", "p\"q", 0, true)});
  CHECK(quoted.str().find("\"a,b\",\"p\"\"q\",0,solved,0.000000,") != std::string::npos);
}

TEST_CASE("broken problems are recorded, not fatal") {
  const Suite s;
  const auto r = s.run({{"bad-0", "(define (problem p"}, named(domains2d::fig2_problem())},
                       {config(Algorithm::kAStarHAdd)});
  REQUIRE(r.records.size() == 2);
  CHECK(r.records[0].status == "error");
  CHECK(r.records[1].status == "solved");
}

TEST_CASE("config validation and names") {
  CHECK_THROWS_AS(config(Algorithm::kLevinTSBestFirst).validate(), std::invalid_argument);
  CHECK_THROWS_AS(config(Algorithm::kAStarHAdd, "", Ablation::kPolicyOnly).validate(), std::invalid_argument);
  RunConfig bad_timeout = config(Algorithm::kAStarHAdd);
  bad_timeout.timeout_s = 0.0;
  CHECK_THROWS_AS(bad_timeout.validate(), std::invalid_argument);
  CHECK_NOTHROW(config(Algorithm::kAStarHAdd, "", Ablation::kSearchOnly).validate());

  RunConfig beam = config(Algorithm::kLevinTSBeam, "uniform");
  beam.beam_width = 4;
  CHECK(beam.label() == "levints-beam4");
  beam.beam_width = kUnboundedBeam;
  CHECK(beam.label() == "levints-beaminf");
  beam.name = "custom";
  CHECK(beam.label() == "custom");
  CHECK(algorithm_from_string("levints-bfs") == Algorithm::kLevinTSBestFirst);
  CHECK(ablation_from_string("policy-only") == Ablation::kPolicyOnly);
  CHECK_THROWS_AS(algorithm_from_string("dijkstra"), std::invalid_argument);
  CHECK(family_of("clutter-17") == "clutter");
  CHECK(family_of("fig2") == "fig2");

  const Suite s;
  CHECK_THROWS_AS(make_policy("/nonexistent/model.bin", s.domain), std::exception);
}
