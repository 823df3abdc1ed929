#include "lazytamp/stream_planner.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <cstdio>
#include <sstream>
#include <unordered_map>

namespace lazytamp {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

using ProducerFn = std::function<const StreamInstance*(ObjectId)>;

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix(h);
}

/// Keys are written as `stream(token, ...)`. An initial object's token is its
/// name; an optimistic object's token is a 64-bit structural hash of its
/// producer's key followed by the output slot. Identical sub-graphs thus get
/// identical keys whatever their objects are called, and a key has constant
/// size however deep its sub-graph is.
class KeyWriter {
 public:
  KeyWriter(ProducerFn producer, const DomainDefinition& domain, const ObjectTable& objects,
            std::unordered_map<ObjectId, std::string>* cache = nullptr)
      : producer_(std::move(producer)), domain_(domain), objects_(objects), cache_(cache ? cache : &local_) {}

  std::string token(ObjectId o) {
    if (!objects_[o].optimistic()) return objects_.name(o);
    if (auto it = cache_->find(o); it != cache_->end()) return it->second;
    const StreamInstance* e = producer_(o);
    if (!e) throw CGError("optimistic object " + objects_.name(o) + " has no producer");
    const std::string key = e->key.empty() ? instance(*e) : e->key;
    const auto slot = std::find(e->outputs.begin(), e->outputs.end(), o) - e->outputs.begin();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx.%d", static_cast<unsigned long long>(fnv1a(key)), static_cast<int>(slot));
    return cache_->emplace(o, buf).first->second;
  }

  std::string instance(const StreamInstance& e) {
    std::string out = domain_.streams.at(e.schema).name + "(";
    for (std::size_t i = 0; i < e.inputs.size(); ++i) {
      if (i) out += ',';
      out += token(e.inputs[i]);
    }
    return out + ")";
  }

  std::string object(ObjectId o) {
    if (!objects_[o].optimistic()) return objects_.name(o);
    const StreamInstance* e = producer_(o);
    if (!e) throw CGError("optimistic object " + objects_.name(o) + " has no producer");
    const auto slot = std::find(e->outputs.begin(), e->outputs.end(), o) - e->outputs.begin();
    return instance(*e) + "." + std::to_string(slot);
  }

 private:
  ProducerFn producer_;
  const DomainDefinition& domain_;
  const ObjectTable& objects_;
  std::unordered_map<ObjectId, std::string> local_;
  std::unordered_map<ObjectId, std::string>* cache_;
};

bool sorted_has(const std::vector<Fact>& v, const Fact& f) { return std::binary_search(v.begin(), v.end(), f); }

}  // namespace

std::vector<ObjectId> StreamInstance::binding() const {
  std::vector<ObjectId> b = inputs;
  b.insert(b.end(), outputs.begin(), outputs.end());
  return b;
}

// ---------------------------------------------------------------------------
// ComputationGraph

ComputationGraph ComputationGraph::extend(std::span<const StreamInstance> fragment, const ObjectTable& objects) const {
  if (fragment.empty()) return *this;
  auto layer = std::make_shared<Layer>();
  layer->parent = top_;
  layer->total = size() + fragment.size();
  std::uint64_t fp = fingerprint();
  std::set<ObjectId> produced_here;
  for (const StreamInstance& e : fragment) {
    for (ObjectId in : e.inputs) {
      if (in >= objects.size()) throw CGError("stream input is not a known object");
      if (objects[in].optimistic() && !produced_here.count(in) && !producer(in)) {
        throw CGError("stream input " + objects.name(in) + " is not produced by an earlier edge");
      }
    }
    for (ObjectId out : e.outputs) {
      if (out >= objects.size() || !objects[out].optimistic()) throw CGError("stream output must be optimistic");
      if (produced_here.count(out) || producer(out)) {
        throw CGError("object " + objects.name(out) + " already has a producer");
      }
      produced_here.insert(out);
    }
    layer->edges.push_back(e);
    layer->certified.insert(layer->certified.end(), e.certified.begin(), e.certified.end());
    fp = mix(fp ^ std::hash<std::string>{}(e.key));
    for (ObjectId out : e.outputs) fp = mix(fp ^ out);
  }
  std::sort(layer->certified.begin(), layer->certified.end());
  layer->certified.erase(std::unique(layer->certified.begin(), layer->certified.end()), layer->certified.end());
  layer->fingerprint = fp;
  layer->depth = top_ ? top_->depth + 1 : 1;
  if (layer->depth % kSnapshotPeriod == 0) {
    auto snap = std::make_unique<Snapshot>();
    std::vector<const Layer*> pending = {layer.get()};
    const Layer* l = top_.get();
    for (; l && !l->snapshot; l = l->parent.get()) pending.push_back(l);
    if (l) *snap = *l->snapshot;
    for (auto it = pending.rbegin(); it != pending.rend(); ++it) {
      for (const StreamInstance& e : (*it)->edges) {
        for (ObjectId o : e.outputs) snap->producers[o] = &e;
        ++snap->key_counts[e.key];
      }
      for (const Fact& f : (*it)->certified) snap->certified[f] = true;
    }
    layer->snapshot = std::move(snap);
  }
  ComputationGraph g;
  g.top_ = std::move(layer);
  return g;
}

std::vector<const StreamInstance*> ComputationGraph::edges() const {
  std::vector<const Layer*> chain;
  for (const Layer* l = top_.get(); l; l = l->parent.get()) chain.push_back(l);
  std::vector<const StreamInstance*> out;
  out.reserve(size());
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    for (const StreamInstance& e : (*it)->edges) out.push_back(&e);
  }
  return out;
}

const StreamInstance* ComputationGraph::producer(ObjectId object) const {
  for (const Layer* l = top_.get(); l; l = l->parent.get()) {
    if (l->snapshot) {
      auto it = l->snapshot->producers.find(object);
      return it == l->snapshot->producers.end() ? nullptr : it->second;
    }
    for (const StreamInstance& e : l->edges) {
      if (std::find(e.outputs.begin(), e.outputs.end(), object) != e.outputs.end()) return &e;
    }
  }
  return nullptr;
}

bool ComputationGraph::certifies(const Fact& fact) const {
  for (const Layer* l = top_.get(); l; l = l->parent.get()) {
    if (l->snapshot) return l->snapshot->certified.count(fact) > 0;
    if (sorted_has(l->certified, fact)) return true;
  }
  return false;
}

std::size_t ComputationGraph::count_key(const std::string& key) const {
  std::size_t n = 0;
  for (const Layer* l = top_.get(); l; l = l->parent.get()) {
    if (l->snapshot) {
      auto it = l->snapshot->key_counts.find(key);
      return n + (it == l->snapshot->key_counts.end() ? 0 : it->second);
    }
    for (const StreamInstance& e : l->edges) n += e.key == key;
  }
  return n;
}

bool operator==(const ComputationGraph& a, const ComputationGraph& b) {
  if (a.size() != b.size()) return false;
  auto ea = a.edges();
  auto eb = b.edges();
  for (std::size_t i = 0; i < ea.size(); ++i) {
    if (!(*ea[i] == *eb[i])) return false;
  }
  return true;
}

std::string cg_key(ObjectId object, const ComputationGraph& cg, const DomainDefinition& domain,
                   const ObjectTable& objects) {
  KeyWriter w([&cg](ObjectId o) { return cg.producer(o); }, domain, objects);
  return w.object(object);
}

std::string cg_key(const StreamInstance& instance, const ComputationGraph& cg, const DomainDefinition& domain,
                   const ObjectTable& objects) {
  KeyWriter w([&cg](ObjectId o) { return cg.producer(o); }, domain, objects);
  return w.instance(instance);
}

std::string to_dot(const ComputationGraph& cg, const DomainDefinition& domain, const ObjectTable& objects) {
  std::ostringstream os;
  os << "digraph cg {\n  rankdir=LR;\n";
  std::set<ObjectId> nodes;
  auto edges = cg.edges();
  for (const StreamInstance* e : edges) {
    nodes.insert(e->inputs.begin(), e->inputs.end());
    nodes.insert(e->outputs.begin(), e->outputs.end());
  }
  for (ObjectId o : nodes) {
    os << "  o" << o << " [label=\"" << objects.name(o) << "\""
       << (objects[o].optimistic() ? ", shape=ellipse" : ", shape=box, style=filled, fillcolor=lightgrey") << "];\n";
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const StreamInstance& e = *edges[i];
    os << "  s" << i << " [label=\"" << domain.streams.at(e.schema).name << "\", shape=diamond];\n";
    for (ObjectId in : e.inputs) os << "  o" << in << " -> s" << i << ";\n";
    for (ObjectId out : e.outputs) os << "  s" << i << " -> o" << out << ";\n";
  }
  os << "}\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// StreamPlanner

StreamPlanner::StreamPlanner(const DomainDefinition& domain, ObjectTable& objects, std::size_t max_instances)
    : domain_(domain), objects_(objects), max_instances_(max_instances) {}

std::vector<ObjectId> StreamPlanner::outputs_for(const std::string& key, std::size_t occurrence,
                                                 const StreamSchema& schema) {
  auto [it, inserted] = registry_.try_emplace({key, occurrence});
  if (inserted) {
    for (const Parameter& p : schema.outputs) it->second.push_back(objects_.mint_optimistic(schema.name + "." + p.name));
  }
  return it->second;
}

/// Backward chaining from the action's stream-certified preconditions.
/// Goals are taken in "first ready" order: the first goal that is either
/// fully bound, or whose unbound arguments a stream can produce from bound
/// inputs. Unbound arguments are always produced by fresh stream outputs;
/// fully bound facts must hold already or be certified by an output-free
/// (test) stream.
struct StreamPlanner::Search {
  StreamPlanner& planner;
  const ActionSchema& schema;
  const LogicalState& state;
  const ComputationGraph& cg;
  std::vector<ObjectId> binding;
  std::vector<StreamInstance> fragment;
  std::vector<Fact> fragment_certified;
  std::vector<Fact> fact_goals;  // stream domain facts, fully bound

  bool held(const Fact& f) const {
    return state.contains(f) || cg.certifies(f) ||
           std::find(fragment_certified.begin(), fragment_certified.end(), f) != fragment_certified.end();
  }

  const StreamInstance* producer(ObjectId o) const {
    for (const StreamInstance& e : fragment) {
      if (std::find(e.outputs.begin(), e.outputs.end(), o) != e.outputs.end()) return &e;
    }
    return cg.producer(o);
  }

  /// Unifies `goal` with a certified atom of `stream`. Returns the stream
  /// binding (inputs then outputs, kNoObject for outputs) and the action
  /// variables each output must bind, or nothing if not ready.
  struct Unifier {
    std::vector<ObjectId> stream_binding;
    std::vector<int> output_to_action;  // per stream variable, -1 if none
  };

  std::optional<Unifier> unify(const Fact& goal, const std::vector<int>* action_vars, const StreamSchema& stream,
                               const AtomTemplate& certified) const {
    if (certified.predicate != goal.predicate) return std::nullopt;
    Unifier u;
    u.stream_binding.assign(stream.variable_count(), kNoObject);
    u.output_to_action.assign(stream.variable_count(), -1);
    for (std::size_t i = 0; i < goal.arity; ++i) {
      const int v = certified.args[i];
      const auto vi = static_cast<std::size_t>(v);
      const ObjectId value = goal.args[i];
      if (value != kNoObject) {
        if (stream.is_output(v)) return std::nullopt;  // outputs are always fresh
        if (u.stream_binding[vi] != kNoObject && u.stream_binding[vi] != value) return std::nullopt;
        u.stream_binding[vi] = value;
      } else {
        if (!stream.is_output(v)) return std::nullopt;  // input would stay unbound
        const int av = (*action_vars)[i];
        if (u.output_to_action[vi] != -1 && u.output_to_action[vi] != av) return std::nullopt;
        u.output_to_action[vi] = av;
      }
    }
    for (std::size_t i = 0; i < stream.inputs.size(); ++i) {
      if (u.stream_binding[i] == kNoObject) return std::nullopt;
    }
    // Two action variables may not be mapped to one output and vice versa.
    for (std::size_t a = stream.inputs.size(); a < stream.variable_count(); ++a) {
      for (std::size_t b = a + 1; b < stream.variable_count(); ++b) {
        if (u.output_to_action[a] != -1 && u.output_to_action[a] == u.output_to_action[b]) return std::nullopt;
      }
    }
    return u;
  }

  /// Adds an instance and returns an undo token (sizes before the push).
  struct Undo {
    std::vector<ObjectId> binding;
    std::size_t certified_size;
    std::size_t goals_size;
  };

  Undo push(std::size_t stream_index, const Unifier& u) {
    Undo undo{binding, fragment_certified.size(), fact_goals.size()};
    const StreamSchema& stream = planner.domain_.streams[stream_index];
    StreamInstance inst;
    inst.schema = stream_index;
    inst.inputs.assign(u.stream_binding.begin(), u.stream_binding.begin() + static_cast<long>(stream.inputs.size()));
    KeyWriter w([this](ObjectId o) { return producer(o); }, planner.domain_, planner.objects_, &planner.tokens_);
    inst.key = w.instance(inst);
    std::size_t occurrence = cg.count_key(inst.key);
    for (const StreamInstance& e : fragment) occurrence += e.key == inst.key;
    inst.outputs = planner.outputs_for(inst.key, occurrence, stream);
    std::vector<ObjectId> full = inst.binding();
    for (const AtomTemplate& d : stream.domain) inst.domain_facts.push_back(instantiate(d, full));
    for (const AtomTemplate& c : stream.certified) inst.certified.push_back(instantiate(c, full));
    for (std::size_t k = 0; k < stream.outputs.size(); ++k) {
      const int av = u.output_to_action[stream.inputs.size() + k];
      if (av >= 0) binding[static_cast<std::size_t>(av)] = inst.outputs[k];
    }
    fragment_certified.insert(fragment_certified.end(), inst.certified.begin(), inst.certified.end());
    fact_goals.insert(fact_goals.end(), inst.domain_facts.begin(), inst.domain_facts.end());
    fragment.push_back(std::move(inst));
    return undo;
  }

  void pop(Undo&& undo) {
    fragment.pop_back();
    binding = std::move(undo.binding);
    fragment_certified.resize(undo.certified_size);
    fact_goals.resize(undo.goals_size);
  }

  bool run(std::size_t budget) {
    // Collect open goals in order: action preconditions, then stream domains.
    struct Open {
      Fact fact;
      const std::vector<int>* vars;  // action variables for unbound positions
    };
    std::vector<Open> open;
    for (const AtomTemplate& g : schema.pre_certified) {
      Fact f = instantiate(g, binding);
      if (f.arguments().end() == std::find(f.arguments().begin(), f.arguments().end(), kNoObject) && held(f)) continue;
      open.push_back({f, &g.args});
    }
    for (const Fact& f : fact_goals) {
      if (!held(f)) open.push_back({f, nullptr});
    }
    if (open.empty()) return true;
    if (budget == 0) return false;

    for (const Open& goal : open) {
      const bool bound = std::find(goal.fact.arguments().begin(), goal.fact.arguments().end(), kNoObject) ==
                         goal.fact.arguments().end();
      bool ready = false;
      for (std::size_t s : planner.stream_order_) {
        const StreamSchema& stream = planner.domain_.streams[s];
        if (bound && !stream.outputs.empty()) continue;
        for (const AtomTemplate& c : stream.certified) {
          auto u = unify(goal.fact, goal.vars, stream, c);
          if (!u) continue;
          ready = true;
          Undo undo = push(s, *u);
          if (run(budget - 1)) return true;
          pop(std::move(undo));
        }
      }
      if (ready) return false;  // the first ready goal was explored exhaustively
    }
    return false;
  }
};

std::optional<Certification> StreamPlanner::certify(const ActionInstance& action, const LogicalState& state,
                                                    const ComputationGraph& cg) {
  const ActionSchema& schema = domain_.actions.at(action.schema);
  if (schema.pre_certified.empty()) return Certification{action, {}};

  MemoKey mk{action.schema, action.args, state.hash(), cg.fingerprint()};
  if (auto it = memo_.find(mk); it != memo_.end()) return it->second;

  if (stream_order_.size() != domain_.streams.size()) {
    stream_order_.resize(domain_.streams.size());
    for (std::size_t i = 0; i < stream_order_.size(); ++i) stream_order_[i] = i;
    std::sort(stream_order_.begin(), stream_order_.end(),
              [&](std::size_t a, std::size_t b) { return domain_.streams[a].name < domain_.streams[b].name; });
  }

  std::optional<Certification> result;
  for (std::size_t budget = 0; budget <= max_instances_ && !result; ++budget) {
    Search search{*this, schema, state, cg, action.args, {}, {}, {}};
    if (!search.run(budget)) continue;
    if (std::find(search.binding.begin(), search.binding.end(), kNoObject) != search.binding.end()) continue;
    result = Certification{ActionInstance{action.schema, search.binding}, std::move(search.fragment)};
  }
  if (result) prune_redundant(*result, state, cg);
  memo_.emplace(std::move(mk), result);
  return result;
}

void StreamPlanner::prune_redundant(Certification& cert, const LogicalState& state, const ComputationGraph& cg) const {
  const ActionSchema& schema = domain_.actions[cert.action.schema];
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = cert.streams.size(); i-- > 0;) {
      const StreamInstance& cand = cert.streams[i];
      auto used = [&](ObjectId o) {
        if (std::find(cert.action.args.begin(), cert.action.args.end(), o) != cert.action.args.end()) return true;
        for (std::size_t j = 0; j < cert.streams.size(); ++j) {
          if (j == i) continue;
          const auto& in = cert.streams[j].inputs;
          if (std::find(in.begin(), in.end(), o) != in.end()) return true;
        }
        return false;
      };
      if (std::any_of(cand.outputs.begin(), cand.outputs.end(), used)) continue;
      auto held_without = [&](const Fact& f) {
        if (state.contains(f) || cg.certifies(f)) return true;
        for (std::size_t j = 0; j < cert.streams.size(); ++j) {
          if (j == i) continue;
          const auto& c = cert.streams[j].certified;
          if (std::find(c.begin(), c.end(), f) != c.end()) return true;
        }
        return false;
      };
      bool needed = false;
      for (const AtomTemplate& g : schema.pre_certified) needed |= !held_without(instantiate(g, cert.action.args));
      for (std::size_t j = 0; j < cert.streams.size() && !needed; ++j) {
        if (j == i) continue;
        for (const Fact& f : cert.streams[j].domain_facts) needed |= !held_without(f);
      }
      if (!needed) {
        cert.streams.erase(cert.streams.begin() + static_cast<long>(i));
        changed = true;
        break;
      }
    }
  }
}

}  // namespace lazytamp
