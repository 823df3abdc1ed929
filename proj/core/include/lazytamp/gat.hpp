#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "lazytamp/model.hpp"
#include "lazytamp/policy.hpp"

namespace lazytamp {

/// Action parameters beyond this many do not reach the action encoder.
inline constexpr std::size_t kActionSlots = 8;
inline constexpr std::uint32_t kModelVersion = 1;

/// Message from `src` to `dst`. Self loops have predicate -1; fact edges
/// carry the fact's predicate, the argument roles of both ends and whether
/// the fact belongs to the goal.
struct GraphEdge {
  int src = 0;
  int dst = 0;
  int predicate = -1;
  int recv_role = 0;
  int send_role = 0;
  int goal = 0;
};

/// One node per initial object. Feature rows: an indicator per unary
/// non-fluent predicate of the initial state, then the initial pose
/// (x, y, present) while the initial pose fact still holds, then the size
/// extents from the object's static value fact.
struct SceneGraph {
  Eigen::MatrixXd features;  // feature_dim x nodes
  std::vector<GraphEdge> edges;
  std::vector<ObjectId> objects;

  std::size_t num_nodes() const { return objects.size(); }
};

/// Operator index plus the graph node of each parameter (-1 if the argument
/// is not an initial object).
struct ActionCandidate {
  int op = 0;
  std::array<int, kActionSlots> slots;

  ActionCandidate() { slots.fill(-1); }
};

struct InvalidPrefix : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

class GraphEncoder {
 public:
  GraphEncoder(const DomainDefinition& domain, const ProblemInstance& problem);

  static std::size_t feature_dim(const DomainDefinition& domain) { return domain.predicates.size() + 5; }

  SceneGraph encode(const LogicalState& state) const;
  /// Graph of the state reached from the initial state by `prefix`.
  SceneGraph encode(std::span<const ActionInstance> prefix) const;
  ActionCandidate candidate(const ActionInstance& action) const;
  int node_of(ObjectId object) const;

 private:
  void add_fact(const Fact& fact, int goal, std::vector<GraphEdge>& edges) const;

  const DomainDefinition& domain_;
  const ProblemInstance& problem_;
  std::vector<ObjectId> nodes_;
  std::unordered_map<ObjectId, int> index_;
  Eigen::MatrixXd base_;
  std::vector<std::optional<Fact>> pose_fact_;
  Eigen::MatrixXd pose_value_;  // 2 x nodes
};

struct ModelShape {
  std::size_t layers = 2;
  std::size_t width = 32;
  std::size_t predicates = 0;
  std::size_t operators = 0;
  std::size_t max_arity = 0;
  std::size_t features = 0;

  static ModelShape for_domain(const DomainDefinition& domain, std::size_t layers, std::size_t width);
  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

struct ModelFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Graph-attention object encoder, attention-based action encoder and an MLP
/// scoring head, followed by a softmax over the candidate actions. All
/// parameters live in one flat vector with named slices.
class PolicyModel {
 public:
  struct Slice {
    std::string name;
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t size() const { return rows * cols; }
  };

  explicit PolicyModel(ModelShape shape);
  /// Xavier-uniform weights, zero biases.
  static PolicyModel initialized(ModelShape shape, std::uint64_t seed);

  const ModelShape& shape() const { return shape_; }
  const std::vector<Slice>& slices() const { return slices_; }
  const Slice& slice(std::string_view name) const;
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  /// Probability of each candidate. Throws std::invalid_argument if empty.
  std::vector<double> forward(const SceneGraph& graph, std::span<const ActionCandidate> candidates) const;
  /// Cross-entropy of `label`; adds d loss / d params into `grad` if given.
  double loss(const SceneGraph& graph, std::span<const ActionCandidate> candidates, std::size_t label,
              std::vector<double>* grad = nullptr) const;

  void save(std::ostream& out) const;
  void save(const std::string& path) const;
  /// Throws ModelFormatError if the header does not match `domain`.
  static PolicyModel load(std::istream& in, const DomainDefinition& domain);
  static PolicyModel load(const std::string& path, const DomainDefinition& domain);

 private:
  struct Cache;
  void run(const SceneGraph& graph, std::span<const ActionCandidate> candidates, Cache& cache) const;

  ModelShape shape_;
  std::vector<Slice> slices_;
  std::vector<double> params_;
};

class GatPolicy : public Policy {
 public:
  explicit GatPolicy(std::shared_ptr<const PolicyModel> model) : model_(std::move(model)) {}
  std::vector<double> distribution(const PolicyContext& ctx) const override;
  bool expensive() const override { return true; }
  std::string name() const override { return "gat"; }
  const PolicyModel& model() const { return *model_; }

 private:
  std::shared_ptr<const PolicyModel> model_;
};

}  // namespace lazytamp
