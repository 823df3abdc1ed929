// Acceptance checks. Prints one `CRITERION n: PASS|FAIL` line per criterion
// and exits non-zero if any selected criterion fails.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "abstract2d.hpp"
#include "graphs.hpp"
#include "lazytamp/bench.hpp"
#include "lazytamp/domains2d/generator.hpp"
#include "lazytamp/domains2d/tabletop.hpp"
#include "lazytamp/feasibility.hpp"
#include "lazytamp/gat.hpp"
#include "lazytamp/learning.hpp"
#include "lazytamp/parser.hpp"
#include "lazytamp/solver.hpp"
#include "lazytamp/stream_planner.hpp"
#include "support.hpp"

using namespace lazytamp;
namespace fs = std::filesystem;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Collects failed checks and notes for one criterion.
struct Report {
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  bool check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
    return ok;
  }
  void note(const std::string& text) { notes.push_back(text); }
  bool pass() const { return failures.empty(); }
};

double rel_err(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------------------
// 1. Search fidelity

void criterion1(Report& r) {
  const Stopwatch clock;
  const auto graphs = testing::traced_graphs();
  for (const auto& t : graphs) {
    testing::GraphSpace bfs(t.graph);
    const auto a = best_first_search(bfs, 0, true);
    r.check(bfs.popped == t.best_first, t.graph.name + ": best-first pop order");
    r.check(a.goal.value_or(-1) == t.best_first_result, t.graph.name + ": best-first result");

    testing::GraphSpace beam(t.graph);
    const auto b = beam_search(beam, 0, t.beam_width);
    r.check(beam.popped == t.beam, t.graph.name + ": beam pop order");
    r.check(b.goal.value_or(-1) == t.beam_result, t.graph.name + ": beam result");

    testing::GraphSpace inf(t.graph);
    const auto c = beam_search(inf, 0, kUnboundedBeam);
    r.check(inf.popped == bfs.popped && c.goal == a.goal, t.graph.name + ": unbounded beam equals best-first");
  }
  // Unbounded beam on random trees, node for node.
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    testing::ExplicitGraph g;
    g.name = "random";
    const int n = 2 + static_cast<int>(rng() % 11);
    g.children.resize(n);
    g.f.resize(n);
    g.state.resize(n);
    for (int v = 0; v < n; ++v) {
      g.state[v] = v;
      if (v > 0) g.children[rng() % v].push_back(v);
    }
    // Monotone along edges: f(child) = f(parent) + non-negative step.
    g.f[0] = 0.0;
    for (int v = 0; v < n; ++v) {
      for (int c : g.children[v]) g.f[c] = g.f[v] + static_cast<double>(rng() % 3);
    }
    if (rng() % 2) g.goals.insert(static_cast<int>(rng() % n));
    testing::GraphSpace x(g), y(g);
    const auto a = best_first_search(x, 0);
    const auto b = beam_search(y, 0, kUnboundedBeam);
    if (!r.check(x.popped == y.popped && a.goal == b.goal, "random tree " + std::to_string(trial))) break;
  }
  r.note(std::to_string(graphs.size()) + " traced graphs");
  r.check(clock.seconds() < 1.0, "runtime under 1 s");
  r.note("runtime " + fmt(clock.seconds()) + " s");
}

// ---------------------------------------------------------------------------
// 2. Formulas

void criterion2(Report& r) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  auto agree = [&](double got, double want, const std::string& what) {
    const double e = rel_err(got, want);
    worst = std::max(worst, e);
    r.check(e <= 1e-12, what + ": " + fmt(got, 17) + " vs " + fmt(want, 17));
  };
  for (int i = 0; i < 20; ++i) {
    const std::string tag = "case " + std::to_string(i);
    // phi and the 1/phi cost.
    std::vector<StreamStats> stats(1 + rng() % 4);
    double direct = 1.0;
    for (auto& s : stats) {
      s.attempts = rng() % 12;
      s.successes = s.attempts ? rng() % (s.attempts + 1) : 0;
      direct = std::min(direct, (s.successes + 1.0) / (s.attempts + 1.0));
    }
    agree(phi(stats), direct, tag + " phi");
    agree(feedback_cost(phi(stats)), 1.0 / direct, tag + " cost");

    // Database lookups give the same value.
    FeasibilityDB db;
    std::vector<StreamInstance> streams(stats.size());
    for (std::size_t k = 0; k < stats.size(); ++k) {
      streams[k].key = "s" + std::to_string(k) + "(x)";
      for (std::size_t a = 0; a < stats[k].attempts; ++a) db.record(streams[k].key, a < stats[k].successes);
    }
    agree(phi(streams, db), direct, tag + " phi by key");

    // LevinTS priority: depth over the product of the path probabilities.
    const std::size_t d = 1 + rng() % 10;
    double prod = 1.0, log_pi = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double p = 0.01 + 0.99 * unit(rng);
      prod *= p;
      log_pi += std::log(p);
    }
    agree(f_levints(d, log_pi), static_cast<double>(d) / prod, tag + " f_levints");

    // Feasibility-renormalized policy.
    const std::size_t n = 1 + rng() % 6;
    std::vector<double> pi(n), ph(n);
    for (auto& p : pi) p = 0.05 + unit(rng);
    const double z = std::accumulate(pi.begin(), pi.end(), 0.0);
    for (auto& p : pi) p /= z;
    for (auto& p : ph) p = 1.0 / (1.0 + static_cast<double>(rng() % 8));
    double norm = 0.0;
    for (std::size_t k = 0; k < n; ++k) norm += pi[k] * ph[k];
    const auto bar = renormalize_policy(pi, ph);
    for (std::size_t k = 0; k < n; ++k) agree(bar[k], pi[k] * ph[k] / norm, tag + " renormalize");
  }
  // Anchored cases.
  r.check(phi(std::vector<StreamStats>{StreamStats{}}) == 1.0, "unseen stream: phi = 1");
  FeasibilityDB empty;
  std::vector<StreamInstance> unseen(2);
  unseen[0].key = "grasp(b0)";
  unseen[1].key = "ik(b0)";
  r.check(phi(unseen, empty) == 1.0, "unseen keys: phi = 1");
  const std::vector<double> pi = {0.1, 0.2, 0.3, 0.4};
  const auto same = renormalize_policy(pi, std::vector<double>(4, 1.0));
  for (std::size_t k = 0; k < 4; ++k) agree(same[k], pi[k], "renormalize with phi = 1");
  agree(f_levints(2, std::log(0.25)), 8.0, "f(d = 2, pi = 0.25)");
  r.note("worst relative error " + fmt(worst));
}

// ---------------------------------------------------------------------------
// 3. Feedback on the blocked-grasp scene

void criterion3(Report& r) {
  const auto gp = domains2d::fig2_problem();
  const auto domain = parse_domain(domains2d::domain_text());
  const domains2d::TabletopEvaluator evaluator(domain);
  const auto problem = parse_problem(gp.problem_text, domain);
  const testing::Abstract oracle(gp);
  const int shortest = oracle.shortest();
  r.check(shortest == 6, "exhaustive oracle finds 6 actions (got " + std::to_string(shortest) + ")");

  UniformPolicy uniform;
  for (const auto& [label, kind] :
       std::vector<std::pair<std::string, PriorityKind>>{{"astar-hadd", PriorityKind::kAStar},
                                                        {"levints-uniform", PriorityKind::kLevinTS}}) {
    SolverConfig c;
    c.priority = kind;
    c.policy = kind == PriorityKind::kLevinTS ? &uniform : nullptr;
    c.deterministic_clock = true;
    c.timeout_s = 60.0;
    const Stopwatch clock;
    const auto res = solve(domain, problem, evaluator, c);
    const double secs = clock.seconds();
    if (!r.check(res.solved(), label + ": solved")) continue;
    r.check(secs < 10.0, label + ": under 10 s");
    r.check(res.outer_iterations <= 5, label + ": at most 5 outer iterations");
    r.check(res.plan.size() == 6 && static_cast<int>(res.plan.size()) == shortest, label + ": 6-action plan");
    auto s = oracle.start();
    r.check(oracle.replay(res.plan, s) && oracle.satisfied(s), label + ": plan valid in the abstract model");

    // Iteration 1 is refuted by the blocked grasp of its first block.
    const auto& first = res.iterations.front();
    r.check(!first.refined, label + ": first skeleton refuted");
    const std::string head = first.skeleton.front();
    const bool blocked_block = head.rfind("(pick b0 ", 0) == 0 || head.rfind("(pick b1 ", 0) == 0;
    r.check(blocked_block, label + ": first skeleton starts with a blocked pick: " + head);
    const std::string block = head.substr(6, 2);
    bool refuted = false;
    for (const auto& [key, st] : res.feasibility.entries()) {
      refuted |= key.rfind("grasp(" + block + ",", 0) == 0 && st.attempts > 0 && st.successes == 0;
    }
    r.check(refuted, label + ": grasp of " + block + " recorded as failing");
    r.note(label + ": " + std::to_string(res.outer_iterations) + " iterations, " + fmt(secs) + " s");
  }
}

// ---------------------------------------------------------------------------
// 4. Refinement statistics

void criterion4(Report& r) {
  using testing::ScriptedEvaluator;
  using testing::stats_of;
  const Stopwatch clock;
  const testing::ToySkeleton t;
  {
    ScriptedEvaluator ev;
    FeasibilityDB db;
    const auto res = t.run(ev, db, 10);
    r.check(res.binding && res.passes == 1, "trace 1: one pass");
    r.check(stats_of(db, "grasp") == StreamStats{1, 1} && stats_of(db, "pose") == StreamStats{1, 1},
            "trace 1: grasp 1/1, pose 1/1");
  }
  {
    ScriptedEvaluator ev;
    ev.scripts["grasp"] = [](std::size_t call, Rng&) { return call > 0; };
    FeasibilityDB db;
    const auto res = t.run(ev, db, 2);
    r.check(res.binding && res.passes == 2, "trace 2: two passes");
    r.check(stats_of(db, "grasp") == StreamStats{2, 1} && stats_of(db, "pose") == StreamStats{1, 1},
            "trace 2: grasp 2/1, pose 1/1");
  }
  {
    ScriptedEvaluator ev;
    ev.scripts["pose"] = [](std::size_t, Rng&) { return false; };
    FeasibilityDB db;
    const auto res = t.run(ev, db, 3);
    r.check(!res.binding && res.passes == 3, "trace 3: three failed passes");
    r.check(stats_of(db, "pose") == StreamStats{3, 0} && stats_of(db, "grasp") == StreamStats{3, 3},
            "trace 3: pose 3/0, grasp 3/3");
  }
  // Success bound with replacement: k = 2 streams, p = 0.5, N_max = 5.
  const double p = 0.5;
  const double bound = 1.0 - std::pow(1.0 - p * p, 5);
  const double sigma = std::sqrt(bound * (1.0 - bound) / 1000.0);
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
    const std::string tag = reuse ? "with partial reuse" : "independent passes";
    if (reuse) {
      r.check(rate >= bound - 3 * sigma, tag + ": rate " + fmt(rate) + " below bound " + fmt(bound));
    } else {
      r.check(std::abs(rate - bound) <= 3 * sigma, tag + ": rate " + fmt(rate) + " vs bound " + fmt(bound));
    }
    r.note(tag + " " + fmt(rate) + " (bound " + fmt(bound) + ", sigma " + fmt(sigma) + ")");
  }
  r.check(clock.seconds() < 30.0, "runtime under 30 s");
  r.note("runtime " + fmt(clock.seconds()) + " s");
}

// ---------------------------------------------------------------------------
// 5. Policy numerics

struct Scene {
  DomainDefinition domain = parse_domain(domains2d::domain_text());
  ProblemInstance problem;
  ObjectTable objects;

  explicit Scene(const std::string& text) : problem(parse_problem(text, domain)), objects(problem.objects) {}

  std::vector<ActionInstance> candidates() {
    StreamPlanner planner(domain, objects);
    const LogicalState s = problem.initial_state(domain);
    std::vector<ActionInstance> out;
    for (const auto& a : fluent_applicable(s, domain, problem.initial_objects())) {
      if (auto c = planner.certify(a, s, {})) out.push_back(c->action);
    }
    return out;
  }
  EncodedDemo encoded(std::size_t label = 0) {
    const GraphEncoder enc(domain, problem);
    EncodedDemo d;
    d.graph = enc.encode(std::span<const ActionInstance>{});
    for (const auto& a : candidates()) d.candidates.push_back(enc.candidate(a));
    d.label = std::min(label, d.candidates.size() - 1);
    return d;
  }
};

void criterion5(Report& r) {
  const Stopwatch clock;
  std::mt19937_64 rng(55);
  double worst_sum = 0.0, worst_order = 0.0, worst_relabel = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Scene sc(domains2d::generate_problem({domains2d::kAllFamilies[trial % 5], 2 + rng() % 2, rng() % 2, rng()})
                 .problem_text);
    const auto d = sc.encoded();
    const auto model = PolicyModel::initialized(ModelShape::for_domain(sc.domain, 2, 32), rng());
    const auto p = model.forward(d.graph, d.candidates);
    worst_sum = std::max(worst_sum, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));

    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<ActionCandidate> shuffled;
    for (std::size_t i : order) shuffled.push_back(d.candidates[i]);
    const auto q = model.forward(d.graph, shuffled);
    for (std::size_t k = 0; k < order.size(); ++k) worst_order = std::max(worst_order, std::abs(q[k] - p[order[k]]));

    std::vector<int> perm(d.graph.num_nodes());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    SceneGraph g = d.graph;
    for (std::size_t n = 0; n < perm.size(); ++n) {
      g.features.col(perm[n]) = d.graph.features.col(n);
      g.objects[perm[n]] = d.graph.objects[n];
    }
    for (auto& e : g.edges) {
      e.src = perm[e.src];
      e.dst = perm[e.dst];
    }
    std::shuffle(g.edges.begin(), g.edges.end(), rng);
    auto relabeled = d.candidates;
    for (auto& c : relabeled) {
      for (int& s : c.slots) s = s < 0 ? s : perm[s];
    }
    const auto u = model.forward(g, relabeled);
    for (std::size_t k = 0; k < p.size(); ++k) worst_relabel = std::max(worst_relabel, std::abs(u[k] - p[k]));
  }
  r.check(worst_sum <= 1e-9, "forward sums to 1 (worst " + fmt(worst_sum) + ")");
  r.check(worst_order <= 1e-9, "candidate-order invariance (worst " + fmt(worst_order) + ")");
  r.check(worst_relabel <= 1e-9, "relabeling invariance (worst " + fmt(worst_relabel) + ")");

  // Gradients against central differences, per parameter slice.
  {
    Scene sc(domains2d::generate_problem({domains2d::Family::kRandom, 3, 1, 2}).problem_text);
    const auto d = sc.encoded(1);
    auto model = PolicyModel::initialized(ModelShape::for_domain(sc.domain, 2, 32), 11);
    std::uniform_real_distribution<double> jitter(-0.3, 0.3);
    for (double& v : model.params()) v += jitter(rng);
    std::vector<double> grad(model.params().size(), 0.0);
    model.loss(d.graph, d.candidates, d.label, &grad);
    const double h = 1e-5;
    double worst = 0.0;
    std::size_t checked = 0;
    for (const auto& s : model.slices()) {
      double diff = 0.0, scale = 0.0;
      for (std::size_t i = s.offset; i < s.offset + s.size(); ++i) {
        const double keep = model.params()[i];
        model.params()[i] = keep + h;
        const double up = model.loss(d.graph, d.candidates, d.label);
        model.params()[i] = keep - h;
        const double down = model.loss(d.graph, d.candidates, d.label);
        model.params()[i] = keep;
        const double numeric = (up - down) / (2 * h);
        diff = std::max(diff, std::abs(numeric - grad[i]));
        scale = std::max({scale, std::abs(numeric), std::abs(grad[i])});
      }
      if (scale == 0.0) continue;  // slots beyond the largest arity
      ++checked;
      const double rel = diff / std::max(scale, 1e-3);
      worst = std::max(worst, rel);
      r.check(rel <= 1e-4, "gradient slice " + s.name + ": relative error " + fmt(rel));
    }
    r.note("gradients: " + std::to_string(checked) + " slices, worst relative error " + fmt(worst));
  }

  // Behaviour cloning on one demonstration, repeated.
  {
    Scene sc(domains2d::fig2_problem().problem_text);
    const auto d = sc.encoded(1);
    TrainConfig c;
    c.epochs = 200;
    const auto res = bc_train(sc.domain, std::vector<EncodedDemo>(4, d), c);
    const double final_loss = mean_loss(res.model, {d});
    r.check(final_loss < 0.05, "single demonstration loss " + fmt(final_loss) + " after 200 epochs");
    r.note("single-demo loss " + fmt(res.loss_trace.front()) + " -> " + fmt(final_loss));
  }
  r.check(clock.seconds() < 60.0, "runtime under 60 s");
  r.note("runtime " + fmt(clock.seconds()) + " s");
}

// ---------------------------------------------------------------------------
// 6 and 7. Learning effect and reproducibility

struct PipelineOptions {
  std::size_t train_per_family = 10;
  std::size_t test_per_family = 100;
  std::size_t blocks = 3;
  std::size_t blockers = 1;
  double timeout_s = 30.0;
  std::size_t threads = 1;
  std::size_t epochs = 50;
};

struct PipelineRun {
  SuiteResult suite;
  std::string csv;
  std::size_t demos = 0;
  std::size_t skipped = 0;
  double seconds = 0.0;
};

PipelineRun run_pipeline(const PipelineOptions& o, const fs::path& dir) {
  const Stopwatch clock;
  fs::create_directories(dir);
  const auto domain = parse_domain(domains2d::domain_text());
  const domains2d::TabletopEvaluator evaluator(domain);
  std::vector<NamedProblem> train, test;
  for (auto f : domains2d::kAllFamilies) {
    for (std::size_t s = 0; s < o.train_per_family; ++s) {
      const auto gp = domains2d::generate_problem({f, o.blocks, o.blockers, s});
      train.push_back({gp.name, gp.problem_text});
    }
    // Held out: disjoint seeds.
    for (std::size_t s = 0; s < o.test_per_family; ++s) {
      const auto gp = domains2d::generate_problem({f, o.blocks, o.blockers, 100000 + s});
      test.push_back({gp.name, gp.problem_text});
    }
  }
  RunConfig teacher;
  teacher.algorithm = Algorithm::kAStarHAdd;
  teacher.timeout_s = o.timeout_s;
  const auto demos = collect_demos(domain, train, evaluator, solver_config(teacher, nullptr, 0));
  {
    std::ofstream out(dir / "demos.jsonl");
    write_demos(out, demos.demos);
  }
  TrainConfig tc;
  tc.epochs = o.epochs;
  const auto trained = bc_train(domain, demos.demos, tc);
  const std::string model_path = (dir / "model.lzpm").string();
  trained.model.save(model_path);

  std::vector<RunConfig> configs(3);
  configs[0].algorithm = Algorithm::kLevinTSBeam;
  configs[0].beam_width = 1;
  configs[0].policy = model_path;
  configs[1].ablation = Ablation::kSearchOnly;
  configs[2].ablation = Ablation::kPolicyOnly;
  configs[2].policy = model_path;
  for (auto& c : configs) c.timeout_s = o.timeout_s;
  SuiteOptions so;
  so.threads = o.threads;
  PipelineRun run;
  run.suite = run_suite(domain, evaluator, test, configs, so);
  std::ostringstream csv;
  write_csv(csv, run.suite.records);
  run.csv = csv.str();
  std::ofstream(dir / "records.csv") << run.csv;
  std::ofstream(dir / "summary.json") << summary_json(run.suite.summary) << '\n';
  std::ofstream curve(dir / "curve.dat");
  write_curve(curve, run.suite.summary);
  run.demos = demos.demos.size();
  run.skipped = demos.skipped.size();
  run.seconds = clock.seconds();
  return run;
}

const GroupSummary* find(const SuiteResult& s, const std::string& config, const std::string& family) {
  for (const auto& g : s.summary) {
    if (g.config == config && g.family == family) return &g;
  }
  return nullptr;
}

void criterion6(Report& r, const PipelineRun& run) {
  r.note(std::to_string(run.demos) + " demonstrations, " + std::to_string(run.skipped) + " problems skipped");
  const auto* beam = find(run.suite, "levints-beam1", "all");
  const auto* search = find(run.suite, "search-only", "all");
  const auto* policy = find(run.suite, "policy-only", "all");
  if (!r.check(beam && search && policy, "summary has all three configurations")) return;
  r.check(beam->solve_rate_mean > search->solve_rate_mean,
          "beam1 " + fmt(beam->solve_rate_mean) + "% exceeds search-only " + fmt(search->solve_rate_mean) + "%");
  r.check(policy->solve_rate_mean <= beam->solve_rate_mean,
          "policy-only " + fmt(policy->solve_rate_mean) + "% at most beam1 " + fmt(beam->solve_rate_mean) + "%");
  for (const auto& g : run.suite.summary) {
    if (g.config != "levints-beam1") continue;
    const auto* s = find(run.suite, "search-only", g.family);
    const auto* p = find(run.suite, "policy-only", g.family);
    r.note(g.family + ": beam1 " + fmt(g.solve_rate_mean) + "%, search-only " + fmt(s ? s->solve_rate_mean : -1) +
           "%, policy-only " + fmt(p ? p->solve_rate_mean : -1) + "%");
  }
  r.check(run.seconds <= 3600.0, "runtime within an hour");
  r.note("runtime " + fmt(run.seconds, 4) + " s");
}

void criterion7(Report& r, const PipelineRun& first, const PipelineRun& second) {
  r.check(!first.csv.empty() && first.csv == second.csv, "rerun CSV is byte-identical");
  r.note(std::to_string(first.suite.records.size()) + " records, " + std::to_string(first.csv.size()) + " bytes");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> criteria = {1, 2, 3, 4, 5, 6, 7};
  std::string out_dir = "acceptance_out";
  PipelineOptions po;
  app.add_option("--criteria", criteria, "Criteria to run")->check(CLI::Range(1, 7));
  app.add_option("--out", out_dir, "Directory for demonstrations, models and CSV files");
  app.add_option("--threads", po.threads, "Worker threads for the benchmark runs");
  app.add_option("--test-per-family", po.test_per_family, "Held-out problems per family");
  CLI11_PARSE(app, argc, argv);

  const std::set<int> selected(criteria.begin(), criteria.end());
  bool all_pass = true;
  auto emit = [&](int n, const Report& r) {
    std::cout << "CRITERION " << n << ": " << (r.pass() ? "PASS" : "FAIL") << '\n';
    for (const auto& f : r.failures) std::cout << "  failed: " << f << '\n';
    for (const auto& x : r.notes) std::cout << "  " << x << '\n';
    std::cout.flush();
    all_pass &= r.pass();
  };
  const std::vector<std::function<void(Report&)>> fast = {criterion1, criterion2, criterion3, criterion4,
                                                          criterion5};
  for (int n = 1; n <= 5; ++n) {
    if (!selected.count(n)) continue;
    Report r;
    try {
      fast[n - 1](r);
    } catch (const std::exception& e) {
      r.check(false, std::string("exception: ") + e.what());
    }
    emit(n, r);
  }
  if (selected.count(6) || selected.count(7)) {
    std::optional<PipelineRun> first;
    try {
      first = run_pipeline(po, fs::path(out_dir) / "run");
    } catch (const std::exception& e) {
      Report r;
      r.check(false, std::string("exception: ") + e.what());
      for (int n : {6, 7}) {
        if (selected.count(n)) emit(n, r);
      }
      return 1;
    }
    if (selected.count(6)) {
      Report r;
      criterion6(r, *first);
      emit(6, r);
    }
    if (selected.count(7)) {
      Report r;
      try {
        criterion7(r, *first, run_pipeline(po, fs::path(out_dir) / "rerun"));
      } catch (const std::exception& e) {
        r.check(false, std::string("exception: ") + e.what());
      }
      emit(7, r);
    }
  }
  return all_pass ? 0 : 1;
}
