#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lazytamp/bench.hpp"
#include "lazytamp/domains2d/generator.hpp"
#include "lazytamp/domains2d/tabletop.hpp"
#include "lazytamp/learning.hpp"
#include "lazytamp/parser.hpp"
#include "lazytamp/solver.hpp"

namespace fs = std::filesystem;
using namespace lazytamp;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

struct GenOptions {
  std::vector<std::string> families = {"stacking", "sorting", "random", "clutter", "distractors"};
  std::size_t blocks = 3;
  std::size_t blockers = 1;
  std::size_t count = 1;
  std::uint64_t seed = 0;
};

void add_gen_options(CLI::App* app, GenOptions& g) {
  app->add_option("--family", g.families, "Problem families")->check(CLI::IsMember(
      {"stacking", "sorting", "random", "clutter", "distractors"}));
  app->add_option("--blocks", g.blocks, "Blocks per problem");
  app->add_option("--blockers", g.blockers, "Blockers per problem");
  app->add_option("--count", g.count, "Problems per family");
}

/// Problems for seeds seed, seed + 1, ... of every family.
std::vector<domains2d::GeneratedProblem> generate(const GenOptions& g) {
  std::vector<domains2d::GeneratedProblem> out;
  for (const std::string& f : g.families) {
    for (std::size_t i = 0; i < g.count; ++i) {
      out.push_back(domains2d::generate_problem({domains2d::family_from_string(f), g.blocks, g.blockers, g.seed + i}));
    }
  }
  return out;
}

std::vector<NamedProblem> load_problems(const std::vector<std::string>& files) {
  std::vector<NamedProblem> out;
  for (const std::string& f : files) out.push_back({fs::path(f).stem().string(), read_file(f)});
  return out;
}

/// `label=kind[,key=value...]` where kind is an algorithm or an ablation.
RunConfig parse_config(const std::string& spec, double timeout, std::size_t n_max) {
  RunConfig c;
  c.timeout_s = timeout;
  c.n_max = n_max;
  std::string rest = spec;
  if (auto eq = spec.find('='); eq != std::string::npos && spec.find(',') > eq) {
    c.name = spec.substr(0, eq);
    rest = spec.substr(eq + 1);
  }
  std::vector<std::string> parts;
  std::stringstream ss(rest);
  for (std::string p; std::getline(ss, p, ',');) parts.push_back(p);
  if (parts.empty()) throw std::invalid_argument("empty config '" + spec + "'");
  if (parts[0] == "policy-only" || parts[0] == "search-only") {
    c.ablation = ablation_from_string(parts[0]);
    c.algorithm = Algorithm::kLevinTSBeam;
  } else {
    c.algorithm = algorithm_from_string(parts[0]);
  }
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected key=value in '" + parts[i] + "'");
    const std::string key = parts[i].substr(0, eq), value = parts[i].substr(eq + 1);
    if (key == "width") {
      c.beam_width = value == "inf" ? kUnboundedBeam : std::stoul(value);
    } else if (key == "policy") {
      c.policy = value;
    } else if (key == "nmax") {
      c.n_max = std::stoul(value);
    } else if (key == "timeout") {
      c.timeout_s = std::stod(value);
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lazy bi-level task and motion planner"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string out;

  // gen
  auto* gen = app.add_subcommand("gen", "Generate tabletop problems (.dom, .prob and scene .json files)");
  GenOptions gen_opts;
  bool gen_motion = false, gen_fig2 = false;
  add_gen_options(gen, gen_opts);
  gen->add_flag("--motion", gen_motion, "Domain with motion streams");
  gen->add_flag("--fig2", gen_fig2, "Emit the three-body blocked-grasp instance only");
  gen->add_option("--seed", seed, "First seed");
  gen->add_option("--out", out, "Output directory")->required();

  // solve
  auto* sol = app.add_subcommand("solve", "Solve one problem");
  std::string domain_file, problem_file, algorithm = "astar-hadd", policy, dot_file, trace_file, result_file;
  std::size_t beam_width = 1, n_max = 10;
  double timeout = 90.0;
  bool deterministic = false, fig2 = false;
  sol->add_option("--domain", domain_file, "Domain file (default: built-in tabletop domain)");
  sol->add_option("--problem", problem_file, "Problem file");
  sol->add_flag("--fig2", fig2, "Solve the built-in three-body blocked-grasp instance");
  sol->add_option("--algorithm", algorithm, "astar-hadd | levints-bfs | levints-beam")
      ->check(CLI::IsMember({"astar-hadd", "levints-bfs", "levints-beam"}));
  sol->add_option("--beam-width", beam_width, "Beam width, 0 = unbounded");
  sol->add_option("--policy", policy, "uniform | boltzmann | model file");
  sol->add_option("--n-max", n_max, "Refinement passes per skeleton");
  sol->add_option("--timeout", timeout, "Seconds");
  sol->add_flag("--deterministic", deterministic, "Charge virtual time per unit of work");
  sol->add_option("--seed", seed, "Sampler seed");
  sol->add_option("--out", out, "Plan file (default: stdout)");
  sol->add_option("--dot", dot_file, "Write the final computation graph as Graphviz");
  sol->add_option("--trace", trace_file, "Write one JSON line per expansion");
  sol->add_option("--result", result_file, "Write the result summary as JSON");

  // demos
  auto* dem = app.add_subcommand("demos", "Collect demonstrations with astar-hadd");
  GenOptions dem_gen;
  std::vector<std::string> dem_files;
  double dem_timeout = 30.0;
  add_gen_options(dem, dem_gen);
  dem->add_option("problems", dem_files, "Problem files (default: generate)");
  dem->add_option("--timeout", dem_timeout, "Seconds per problem");
  dem->add_option("--seed", seed, "Generator and sampler seed");
  dem->add_option("--out", out, "Demonstrations (JSON lines)")->required();

  // train
  auto* trn = app.add_subcommand("train", "Behaviour-clone a policy model");
  std::string demos_file;
  TrainConfig tc;
  trn->add_option("--demos", demos_file, "Demonstrations (JSON lines)")->required();
  trn->add_option("--layers", tc.layers, "Attention layers");
  trn->add_option("--width", tc.width, "Feature width");
  trn->add_option("--lr", tc.learning_rate, "Learning rate");
  trn->add_option("--epochs", tc.epochs, "Epochs");
  trn->add_option("--batch", tc.batch_size, "Batch size");
  trn->add_option("--seed", seed, "Initialization and shuffling seed");
  trn->add_option("--out", out, "Model file")->required();

  // bench
  auto* ben = app.add_subcommand("bench", "Run solver configurations over a problem set");
  GenOptions ben_gen;
  std::vector<std::string> ben_files, config_specs;
  std::vector<std::uint64_t> seeds = {0};
  std::size_t threads = 1, ben_nmax = 10;
  double ben_timeout = 90.0;
  add_gen_options(ben, ben_gen);
  ben->add_option("problems", ben_files, "Problem files (default: generate)");
  ben->add_option("--config", config_specs,
                  "label=kind[,width=W][,policy=P][,nmax=N][,timeout=T]; kind is astar-hadd, levints-bfs, "
                  "levints-beam, policy-only or search-only")
      ->required();
  ben->add_option("--seeds", seeds, "Solver seeds (replications)")->delimiter(',');
  ben->add_option("--threads", threads, "Worker threads");
  ben->add_option("--timeout", ben_timeout, "Seconds per run");
  ben->add_option("--n-max", ben_nmax, "Refinement passes per skeleton");
  ben->add_option("--seed", seed, "Generator seed");
  ben->add_option("--out", out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const std::string dom_text = domains2d::domain_text(gen_motion);
      write_file(fs::path(out) / "tabletop2d.dom", dom_text);
      std::vector<domains2d::GeneratedProblem> problems;
      if (gen_fig2) {
        problems.push_back(domains2d::fig2_problem());
      } else {
        gen_opts.seed = seed;
        problems = generate(gen_opts);
      }
      for (const auto& p : problems) {
        write_file(fs::path(out) / (p.name + ".prob"), p.problem_text);
        write_file(fs::path(out) / (p.name + ".json"), domains2d::scene_json(p.scene, p.goal) + "\n");
      }
      std::cout << "wrote " << problems.size() << " problems to " << out << "\n";
      return 0;
    }

    if (*sol) {
      const DomainDefinition domain = domain_file.empty() ? parse_domain(domains2d::domain_text(), "tabletop2d.dom")
                                                          : parse_domain(read_file(domain_file), domain_file);
      if (fig2 == !problem_file.empty()) throw std::invalid_argument("give exactly one of --problem and --fig2");
      const std::string text = fig2 ? domains2d::fig2_problem().problem_text : read_file(problem_file);
      const ProblemInstance problem = parse_problem(text, domain, fig2 ? "fig2" : problem_file);
      const domains2d::TabletopEvaluator evaluator(domain);
      RunConfig rc;
      rc.algorithm = algorithm_from_string(algorithm);
      rc.beam_width = beam_width;
      rc.policy = policy;
      rc.n_max = n_max;
      rc.timeout_s = timeout;
      rc.deterministic_clock = deterministic;
      rc.validate();
      const auto pol = rc.algorithm == Algorithm::kAStarHAdd ? nullptr : make_policy(policy, domain);
      SolverConfig sc = solver_config(rc, pol.get(), seed);
      std::ofstream trace;
      if (!trace_file.empty()) {
        trace.open(trace_file);
        sc.trace = &trace;
      }
      const SolveResult result = solve(domain, problem, evaluator, sc);
      if (!result_file.empty()) write_file(result_file, result_json(result) + "\n");
      if (!dot_file.empty()) write_file(dot_file, to_dot(result.cg, domain, result.objects));
      std::cerr << to_string(result.status) << " after " << result.outer_iterations << " outer iterations, "
                << result.expansions << " expansions, " << result.stream_evals << " stream evaluations, "
                << result.time_s << " s\n";
      if (!result.message.empty()) std::cerr << result.message << "\n";
      if (result.solved()) {
        if (out.empty()) {
          std::cout << serialize_plan(result.plan);
        } else {
          write_file(out, serialize_plan(result.plan));
        }
      }
      return result.solved() ? 0 : 2;
    }

    if (*dem) {
      const DomainDefinition domain = parse_domain(domains2d::domain_text(), "tabletop2d.dom");
      const domains2d::TabletopEvaluator evaluator(domain);
      std::vector<NamedProblem> problems;
      if (dem_files.empty()) {
        dem_gen.seed = seed;
        for (const auto& p : generate(dem_gen)) problems.push_back({p.name, p.problem_text});
      } else {
        problems = load_problems(dem_files);
      }
      RunConfig rc;
      rc.timeout_s = dem_timeout;
      const DemoSet set = collect_demos(domain, problems, evaluator, solver_config(rc, nullptr, seed));
      std::ostringstream os;
      write_demos(os, set.demos);
      write_file(out, os.str());
      for (const SkipRecord& s : set.skipped) std::cerr << "skipped " << s.problem << ": " << s.reason << "\n";
      std::cout << set.demos.size() << " demonstrations from " << problems.size() - set.skipped.size() << " of "
                << problems.size() << " problems\n";
      return 0;
    }

    if (*trn) {
      const DomainDefinition domain = parse_domain(domains2d::domain_text(), "tabletop2d.dom");
      std::ifstream in(demos_file);
      if (!in) throw std::runtime_error("cannot open " + demos_file);
      tc.seed = seed;
      const TrainResult result = bc_train(domain, read_demos(in), tc);
      result.model.save(out);
      for (std::size_t e = 0; e < result.loss_trace.size(); ++e) {
        std::cout << "epoch " << e << " loss " << result.loss_trace[e] << "\n";
      }
      return 0;
    }

    if (*ben) {
      const DomainDefinition domain = parse_domain(domains2d::domain_text(), "tabletop2d.dom");
      const domains2d::TabletopEvaluator evaluator(domain);
      std::vector<NamedProblem> problems;
      if (ben_files.empty()) {
        ben_gen.seed = seed;
        for (const auto& p : generate(ben_gen)) problems.push_back({p.name, p.problem_text});
      } else {
        problems = load_problems(ben_files);
      }
      std::vector<RunConfig> configs;
      for (const std::string& s : config_specs) configs.push_back(parse_config(s, ben_timeout, ben_nmax));
      SuiteOptions options;
      options.seeds = seeds;
      options.threads = threads;
      const SuiteResult result = run_suite(domain, evaluator, problems, configs, options);
      std::ostringstream csv, curve;
      write_csv(csv, result.records);
      write_curve(curve, result.summary);
      write_file(fs::path(out) / "records.csv", csv.str());
      write_file(fs::path(out) / "summary.json", summary_json(result.summary) + "\n");
      write_file(fs::path(out) / "curve.dat", curve.str());
      for (const GroupSummary& g : result.summary) {
        if (g.family != "all") continue;
        std::cout << g.config << ": " << g.solve_rate_mean << "% +- " << g.solve_rate_std << " solved";
        if (g.mean_solve_time) std::cout << ", mean time " << *g.mean_solve_time << " s";
        std::cout << "\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
