#include "lazytamp/learning.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>

#include "json.hpp"
#include "lazytamp/parser.hpp"
#include "lazytamp/stream_planner.hpp"
#include "sexpr.hpp"

namespace lazytamp {

namespace {

/// Arguments that are not initial objects are replaced by kNoObject: the
/// part of an action a policy can tell apart.
std::vector<ObjectId> projection(const ActionInstance& a, const ObjectTable& objects, std::size_t initial_count) {
  std::vector<ObjectId> out = a.args;
  for (ObjectId& o : out) {
    if (o >= initial_count || objects[o].optimistic()) o = kNoObject;
  }
  return out;
}

ActionInstance read_action(std::string_view text, const DomainDefinition& domain, ObjectTable& objects) {
  auto exprs = detail::read_sexprs(text, "<demo>");
  if (exprs.size() != 1 || !exprs[0].is_list || exprs[0].items.empty() || !exprs[0].items[0].is_atom()) {
    throw std::invalid_argument("malformed demonstration action '" + std::string(text) + "'");
  }
  const auto& items = exprs[0].items;
  auto schema = domain.find_action(items[0].atom);
  if (!schema) throw std::invalid_argument("unknown action '" + items[0].atom + "' in demonstration");
  ActionInstance a;
  a.schema = *schema;
  if (items.size() - 1 != domain.actions[*schema].params.size()) {
    throw std::invalid_argument("wrong argument count in demonstration action '" + std::string(text) + "'");
  }
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (!items[i].is_atom()) throw std::invalid_argument("nested term in demonstration action");
    a.args.push_back(objects.intern(items[i].atom));
  }
  return a;
}

EncodedDemo encode_with(const DomainDefinition& domain, const Demonstration& demo, ProblemInstance problem) {
  std::vector<ActionInstance> prefix;
  for (const std::string& s : demo.prefix) prefix.push_back(read_action(s, domain, problem.objects));
  std::vector<ActionInstance> candidates;
  for (const std::string& s : demo.candidates) candidates.push_back(read_action(s, domain, problem.objects));
  if (demo.label >= candidates.size()) throw std::invalid_argument("demonstration label out of range");
  const GraphEncoder encoder(domain, problem);
  EncodedDemo out;
  out.graph = encoder.encode(prefix);
  for (const ActionInstance& a : candidates) out.candidates.push_back(encoder.candidate(a));
  out.label = demo.label;
  return out;
}

}  // namespace

std::vector<Demonstration> demos_from_result(const DomainDefinition& domain, const ProblemInstance& problem,
                                             const std::string& problem_text, const SolveResult& result) {
  if (!result.solved()) return {};
  ObjectTable objects = result.objects;
  const std::size_t initial_count = problem.objects.size();
  StreamPlanner planner(domain, objects);
  const std::vector<ObjectId> initial = problem.initial_objects();
  LogicalState state = problem.initial_state(domain);
  ComputationGraph cg;
  std::vector<std::string> prefix;
  std::vector<Demonstration> out;
  for (const SkeletonStep& step : result.skeleton) {
    Demonstration d;
    d.problem = problem.name;
    d.problem_text = problem_text;
    d.prefix = prefix;
    const auto target = projection(step.action, objects, initial_count);
    std::optional<std::size_t> label;
    for (const ActionInstance& a : fluent_applicable(state, domain, initial)) {
      auto cert = planner.certify(a, state, cg);
      if (!cert) continue;
      if (!label && projection(cert->action, objects, initial_count) == target) label = d.candidates.size();
      d.candidates.push_back(to_string(cert->action, domain, objects));
    }
    if (!label) {
      throw std::runtime_error("plan step " + to_string(step.action, domain, objects) +
                               " is not among the actions available to the search");
    }
    d.label = *label;
    out.push_back(std::move(d));
    state = apply(state, domain, step.action);
    cg = cg.extend(step.streams, objects);
    prefix.push_back(to_string(step.action, domain, objects));
  }
  return out;
}

DemoSet collect_demos(const DomainDefinition& domain, const std::vector<NamedProblem>& problems,
                      const StreamEvaluator& evaluator, const SolverConfig& config) {
  DemoSet set;
  for (const NamedProblem& p : problems) {
    try {
      const ProblemInstance problem = parse_problem(p.text, domain, p.name);
      const SolveResult result = solve(domain, problem, evaluator, config);
      if (!result.solved()) {
        set.skipped.push_back({p.name, std::string(to_string(result.status))});
        continue;
      }
      auto demos = demos_from_result(domain, problem, p.text, result);
      for (auto& d : demos) {
        d.problem = p.name;
        set.demos.push_back(std::move(d));
      }
    } catch (const std::exception& e) {
      set.skipped.push_back({p.name, e.what()});
    }
  }
  return set;
}

void write_demos(std::ostream& out, const std::vector<Demonstration>& demos) {
  for (const Demonstration& d : demos) {
    nlohmann::ordered_json j;
    j["problem"] = d.problem;
    j["problem_text"] = d.problem_text;
    j["prefix"] = d.prefix;
    j["candidates"] = d.candidates;
    j["label"] = d.label;
    out << j.dump() << '\n';
  }
}

std::vector<Demonstration> read_demos(std::istream& in) {
  std::vector<Demonstration> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Demonstration d;
      d.problem = j.at("problem").get<std::string>();
      d.problem_text = j.at("problem_text").get<std::string>();
      d.prefix = j.at("prefix").get<std::vector<std::string>>();
      d.candidates = j.at("candidates").get<std::vector<std::string>>();
      d.label = j.at("label").get<std::size_t>();
      out.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("demonstration line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

EncodedDemo encode_demo(const DomainDefinition& domain, const Demonstration& demo) {
  return encode_with(domain, demo, parse_problem(demo.problem_text, domain, demo.problem));
}

double mean_loss(const PolicyModel& model, const std::vector<EncodedDemo>& demos) {
  if (demos.empty()) return 0.0;
  double total = 0.0;
  for (const EncodedDemo& d : demos) total += model.loss(d.graph, d.candidates, d.label);
  return total / static_cast<double>(demos.size());
}

TrainResult bc_train(const DomainDefinition& domain, const std::vector<EncodedDemo>& demos,
                     const TrainConfig& config) {
  if (demos.empty()) throw std::invalid_argument("behaviour cloning needs at least one demonstration");
  if (config.batch_size == 0) throw std::invalid_argument("batch size must be positive");
  TrainResult result{PolicyModel::initialized(ModelShape::for_domain(domain, config.layers, config.width), config.seed),
                     {}};
  PolicyModel& model = result.model;
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(demos.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[std::uniform_int_distribution<std::size_t>(0, i - 1)(rng)]);
    }
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      grad.assign(model.params().size(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const EncodedDemo& d = demos[order[k]];
        const double l = model.loss(d.graph, d.candidates, d.label, &grad);
        if (!std::isfinite(l)) {
          throw std::runtime_error("non-finite loss " + std::to_string(l) + " at epoch " + std::to_string(epoch) +
                                   " on demonstration " + std::to_string(order[k]) + " with " +
                                   std::to_string(d.candidates.size()) + " candidates");
        }
        total += l;
      }
      const double step = config.learning_rate / static_cast<double>(end - start);
      auto& p = model.params();
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= step * grad[i];
    }
    result.loss_trace.push_back(total / static_cast<double>(demos.size()));
  }
  return result;
}

TrainResult bc_train(const DomainDefinition& domain, const std::vector<Demonstration>& demos,
                     const TrainConfig& config) {
  std::map<std::string, ProblemInstance> parsed;
  std::vector<EncodedDemo> encoded;
  for (const Demonstration& d : demos) {
    auto it = parsed.find(d.problem_text);
    if (it == parsed.end()) it = parsed.emplace(d.problem_text, parse_problem(d.problem_text, domain, d.problem)).first;
    encoded.push_back(encode_with(domain, d, it->second));
  }
  return bc_train(domain, encoded, config);
}

}  // namespace lazytamp
