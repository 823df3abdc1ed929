#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lazytamp/model.hpp"

namespace lazytamp {

/// One application of a stream schema: bound inputs, fresh optimistic
/// outputs and the instantiated domain/certified facts.
struct StreamInstance {
  std::size_t schema = 0;
  std::vector<ObjectId> inputs;
  std::vector<ObjectId> outputs;
  std::vector<Fact> domain_facts;
  std::vector<Fact> certified;
  /// Rename-canonical key of the producing sub-graph (see cg_key).
  std::string key;

  /// inputs followed by outputs, matching the schema's variable numbering.
  std::vector<ObjectId> binding() const;
  friend bool operator==(const StreamInstance& a, const StreamInstance& b) {
    return a.schema == b.schema && a.inputs == b.inputs && a.outputs == b.outputs;
  }
};

struct CGError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Directed acyclic hypergraph of stream instances. Roots are initial
/// objects; every optimistic object is produced by exactly one edge. Graphs
/// are persistent: extend() shares the parent and never modifies it.
class ComputationGraph {
 public:
  ComputationGraph() = default;

  /// Appends `fragment` in order. Throws CGError if an input is neither an
  /// initial object nor produced by an earlier edge, or if an output already
  /// has a producer.
  ComputationGraph extend(std::span<const StreamInstance> fragment, const ObjectTable& objects) const;

  std::size_t size() const { return top_ ? top_->total : 0; }
  bool empty() const { return size() == 0; }
  /// All edges in insertion order, which is a topological order.
  std::vector<const StreamInstance*> edges() const;
  const StreamInstance* producer(ObjectId object) const;
  bool certifies(const Fact& fact) const;
  /// Number of edges whose key equals `key`.
  std::size_t count_key(const std::string& key) const;
  std::size_t fingerprint() const { return top_ ? top_->fingerprint : 0; }

  friend bool operator==(const ComputationGraph& a, const ComputationGraph& b);

 private:
  /// Lookup tables covering a layer and all its ancestors. Every
  /// kSnapshotPeriod-th layer carries one, so lookups visit a bounded number
  /// of layers however deep the graph is.
  struct Snapshot {
    std::unordered_map<Fact, bool, FactHash> certified;
    std::unordered_map<ObjectId, const StreamInstance*> producers;
    std::unordered_map<std::string, std::size_t> key_counts;
  };
  static constexpr std::size_t kSnapshotPeriod = 32;

  struct Layer {
    std::shared_ptr<const Layer> parent;
    std::vector<StreamInstance> edges;
    std::vector<Fact> certified;  // sorted
    std::size_t total = 0;
    std::size_t fingerprint = 0;
    std::size_t depth = 0;
    std::unique_ptr<Snapshot> snapshot;
  };
  std::shared_ptr<const Layer> top_;
};

/// Canonical key of the sub-graph producing `object`:
/// `stream(token, ...).slot`, where initial objects are named and each
/// optimistic input is replaced by a structural hash of its own producer's
/// key. Equal for sub-graphs that differ only in object names.
std::string cg_key(ObjectId object, const ComputationGraph& cg, const DomainDefinition& domain,
                   const ObjectTable& objects);
/// Key of a stream instance whose inputs live in `cg`.
std::string cg_key(const StreamInstance& instance, const ComputationGraph& cg, const DomainDefinition& domain,
                   const ObjectTable& objects);

/// Graphviz rendering of a computation graph.
std::string to_dot(const ComputationGraph& cg, const DomainDefinition& domain, const ObjectTable& objects);

struct Certification {
  ActionInstance action;  // stream parameters bound to optimistic objects
  std::vector<StreamInstance> streams;
};

/// Lazy stream instantiation: finds stream instances that certify an
/// action's stream-certified preconditions. Owns the registry that maps
/// (instance key, occurrence) to optimistic objects, so identical stream
/// chains reached on different branches yield identical objects and states.
class StreamPlanner {
 public:
  StreamPlanner(const DomainDefinition& domain, ObjectTable& objects, std::size_t max_instances = 8);

  /// Absent if no chain of at most `max_instances` stream instances certifies
  /// every stream-certified precondition of `action`.
  std::optional<Certification> certify(const ActionInstance& action, const LogicalState& state,
                                       const ComputationGraph& cg);

  const DomainDefinition& domain() const { return domain_; }
  ObjectTable& objects() { return objects_; }
  std::size_t registry_size() const { return registry_.size(); }

 private:
  struct Search;

  std::vector<ObjectId> outputs_for(const std::string& key, std::size_t occurrence, const StreamSchema& schema);
  void prune_redundant(Certification& cert, const LogicalState& state, const ComputationGraph& cg) const;

  const DomainDefinition& domain_;
  ObjectTable& objects_;
  std::size_t max_instances_;
  std::vector<std::size_t> stream_order_;  // by name
  std::map<std::pair<std::string, std::size_t>, std::vector<ObjectId>> registry_;
  std::unordered_map<ObjectId, std::string> tokens_;  // key tokens of optimistic objects
  struct MemoKey {
    std::size_t schema;
    std::vector<ObjectId> args;
    std::size_t state_hash;
    std::size_t cg_fingerprint;
    auto operator<=>(const MemoKey&) const = default;
  };
  std::map<MemoKey, std::optional<Certification>> memo_;
};

}  // namespace lazytamp
