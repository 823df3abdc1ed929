#include "lazytamp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "json.hpp"
#include "lazytamp/gat.hpp"
#include "lazytamp/parser.hpp"

namespace lazytamp {

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kAStarHAdd: return "astar-hadd";
    case Algorithm::kLevinTSBestFirst: return "levints-bfs";
    case Algorithm::kLevinTSBeam: return "levints-beam";
  }
  return "astar-hadd";
}

std::string_view to_string(Ablation ablation) {
  switch (ablation) {
    case Ablation::kNone: return "none";
    case Ablation::kPolicyOnly: return "policy-only";
    case Ablation::kSearchOnly: return "search-only";
  }
  return "none";
}

Algorithm algorithm_from_string(std::string_view name) {
  for (Algorithm a : {Algorithm::kAStarHAdd, Algorithm::kLevinTSBestFirst, Algorithm::kLevinTSBeam}) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

Ablation ablation_from_string(std::string_view name) {
  for (Ablation a : {Ablation::kNone, Ablation::kPolicyOnly, Ablation::kSearchOnly}) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown ablation '" + std::string(name) + "'");
}

std::string RunConfig::label() const {
  if (!name.empty()) return name;
  if (ablation != Ablation::kNone) return std::string(to_string(ablation));
  std::string out(to_string(algorithm));
  if (algorithm == Algorithm::kLevinTSBeam) {
    out += beam_width == kUnboundedBeam ? std::string("inf") : std::to_string(beam_width);
  }
  return out;
}

void RunConfig::validate() const {
  const bool levints = algorithm != Algorithm::kAStarHAdd;
  if (ablation == Ablation::kPolicyOnly && policy.empty()) {
    throw std::invalid_argument("config " + label() + ": policy-only needs a policy");
  }
  if (levints && ablation == Ablation::kNone && policy.empty()) {
    throw std::invalid_argument("config " + label() + ": " + std::string(to_string(algorithm)) +
                                " needs a policy source (model file, uniform or boltzmann)");
  }
  if (timeout_s <= 0.0) throw std::invalid_argument("config " + label() + ": timeout must be positive");
}

std::shared_ptr<const Policy> make_policy(const std::string& source, const DomainDefinition& domain) {
  if (source.empty()) return nullptr;
  if (source == "uniform") return std::make_shared<UniformPolicy>();
  if (source == "boltzmann") return std::make_shared<BoltzmannPolicy>();
  return std::make_shared<GatPolicy>(std::make_shared<PolicyModel>(PolicyModel::load(source, domain)));
}

SolverConfig solver_config(const RunConfig& config, const Policy* policy, std::uint64_t seed) {
  SolverConfig s;
  s.n_max = config.n_max;
  s.timeout_s = config.timeout_s;
  s.deterministic_clock = config.deterministic_clock;
  s.work_costs = config.work_costs;
  s.seed = seed;
  s.policy = policy;
  switch (config.ablation) {
    case Ablation::kSearchOnly:
      s.search = SearchKind::kBestFirst;
      s.priority = PriorityKind::kLevinTS;
      return s;
    case Ablation::kPolicyOnly:
      s.policy_only = true;
      s.search = SearchKind::kBeam;
      s.beam_width = 1;
      s.priority = PriorityKind::kLevinTS;
      return s;
    case Ablation::kNone: break;
  }
  switch (config.algorithm) {
    case Algorithm::kAStarHAdd:
      s.search = SearchKind::kBestFirst;
      s.priority = PriorityKind::kAStar;
      s.policy = nullptr;
      break;
    case Algorithm::kLevinTSBestFirst:
      s.search = SearchKind::kBestFirst;
      s.priority = PriorityKind::kLevinTS;
      break;
    case Algorithm::kLevinTSBeam:
      s.search = SearchKind::kBeam;
      s.beam_width = config.beam_width;
      s.priority = PriorityKind::kLevinTS;
      break;
  }
  return s;
}

SuiteResult run_suite(const DomainDefinition& domain, const StreamEvaluator& evaluator,
                      const std::vector<NamedProblem>& problems, const std::vector<RunConfig>& configs,
                      const SuiteOptions& options) {
  std::vector<std::shared_ptr<const Policy>> policies;
  for (const RunConfig& c : configs) {
    c.validate();
    const std::string source = c.ablation == Ablation::kSearchOnly ? "uniform" : c.policy;
    policies.push_back(c.algorithm == Algorithm::kAStarHAdd && c.ablation == Ablation::kNone
                           ? nullptr
                           : make_policy(source, domain));
  }
  std::vector<std::optional<ProblemInstance>> parsed(problems.size());
  std::vector<std::string> parse_errors(problems.size());
  for (std::size_t i = 0; i < problems.size(); ++i) {
    try {
      parsed[i] = parse_problem(problems[i].text, domain, problems[i].name);
    } catch (const std::exception& e) {
      parse_errors[i] = e.what();
    }
  }

  const std::size_t n_seeds = options.seeds.size();
  const std::size_t total = configs.size() * problems.size() * n_seeds;
  std::vector<RunRecord> records(total);
  std::atomic<std::size_t> next{0};
  std::mutex lock;
  auto worker = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      const std::size_t ci = job / (problems.size() * n_seeds);
      const std::size_t pi = (job / n_seeds) % problems.size();
      const std::size_t si = job % n_seeds;
      RunRecord& r = records[job];
      r.config = configs[ci].label();
      r.problem_id = problems[pi].name;
      r.seed = options.seeds[si];
      if (!parsed[pi]) {
        r.status = "error";
      } else {
        try {
          const SolverConfig sc = solver_config(configs[ci], policies[ci].get(), r.seed);
          const SolveResult res = solve(domain, *parsed[pi], evaluator, sc);
          r.status = std::string(to_string(res.status));
          r.wall_time_s = res.time_s;
          r.expansions = res.expansions;
          r.stream_evals = res.stream_evals;
          r.outer_iters = res.outer_iterations;
          r.plan_len = res.solved() ? res.plan.size() : 0;
        } catch (const std::exception&) {
          r.status = "error";
        }
      }
      if (options.on_record) {
        std::lock_guard<std::mutex> g(lock);
        options.on_record(r);
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(options.threads, total));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  SuiteResult result;
  result.records = std::move(records);
  result.summary = summarize(result.records, configs);
  return result;
}

std::string family_of(const std::string& problem_id) { return problem_id.substr(0, problem_id.find('-')); }

std::vector<GroupSummary> summarize(const std::vector<RunRecord>& records, const std::vector<RunConfig>& configs) {
  std::vector<GroupSummary> out;
  for (const RunConfig& c : configs) {
    const std::string label = c.label();
    std::vector<std::string> families = {"all"};
    for (const RunRecord& r : records) {
      if (r.config != label) continue;
      const std::string f = family_of(r.problem_id);
      if (std::find(families.begin(), families.end(), f) == families.end()) families.push_back(f);
    }
    std::sort(families.begin() + 1, families.end());
    for (const std::string& family : families) {
      GroupSummary g;
      g.config = label;
      g.family = family;
      std::map<std::uint64_t, std::pair<std::size_t, std::size_t>> by_seed;  // solved, runs
      double time_sum = 0.0;
      std::vector<double> times;
      for (const RunRecord& r : records) {
        if (r.config != label || (family != "all" && family_of(r.problem_id) != family)) continue;
        ++g.runs;
        auto& s = by_seed[r.seed];
        ++s.second;
        if (r.status == "solved") {
          ++g.solved;
          ++s.first;
          time_sum += r.wall_time_s;
          times.push_back(r.wall_time_s);
        }
      }
      if (g.runs == 0) continue;
      std::vector<double> rates;
      for (const auto& [seed, s] : by_seed) rates.push_back(100.0 * static_cast<double>(s.first) / s.second);
      double mean = 0.0;
      for (double v : rates) mean += v;
      mean /= static_cast<double>(rates.size());
      double var = 0.0;
      for (double v : rates) var += (v - mean) * (v - mean);
      g.solve_rate_mean = mean;
      g.solve_rate_std = std::sqrt(var / static_cast<double>(rates.size()));
      if (g.solved > 0) g.mean_solve_time = time_sum / static_cast<double>(g.solved);
      const auto horizon = static_cast<std::size_t>(std::ceil(c.timeout_s));
      for (std::size_t t = 0; t <= horizon; ++t) {
        const auto n = std::count_if(times.begin(), times.end(), [&](double x) { return x <= static_cast<double>(t); });
        g.curve.push_back(100.0 * static_cast<double>(n) / static_cast<double>(g.runs));
      }
      out.push_back(std::move(g));
    }
  }
  return out;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << "config,problem_id,seed,status,wall_time_s,expansions,stream_evals,outer_iters,plan_len\n";
  for (const RunRecord& r : records) {
    out << csv_field(r.config) << ',' << csv_field(r.problem_id) << ',' << r.seed << ',' << r.status << ','
        << fixed(r.wall_time_s, 6) << ',' << r.expansions << ',' << r.stream_evals << ',' << r.outer_iters << ','
        << r.plan_len << '\n';
  }
}

std::string summary_json(const std::vector<GroupSummary>& summary) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const GroupSummary& g : summary) {
    nlohmann::ordered_json e;
    e["config"] = g.config;
    e["family"] = g.family;
    e["runs"] = g.runs;
    e["solved"] = g.solved;
    e["solve_rate_mean"] = g.solve_rate_mean;
    e["solve_rate_std"] = g.solve_rate_std;
    e["mean_solve_time"] = g.mean_solve_time ? nlohmann::ordered_json(*g.mean_solve_time) : nullptr;
    e["curve"] = g.curve;
    j.push_back(std::move(e));
  }
  return j.dump(2);
}

void write_curve(std::ostream& out, const std::vector<GroupSummary>& summary) {
  std::vector<const GroupSummary*> cols;
  std::size_t rows = 0;
  for (const GroupSummary& g : summary) {
    if (g.family != "all") continue;
    cols.push_back(&g);
    rows = std::max(rows, g.curve.size());
  }
  out << "# t";
  for (const GroupSummary* g : cols) out << ' ' << g->config;
  out << '\n';
  for (std::size_t t = 0; t < rows; ++t) {
    out << t;
    for (const GroupSummary* g : cols) {
      out << ' ' << fixed(t < g->curve.size() ? g->curve[t] : g->curve.back(), 2);
    }
    out << '\n';
  }
}

}  // namespace lazytamp
