#include "lazytamp/gat.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace lazytamp {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using CMap = Eigen::Map<const MatrixXd>;
using MMap = Eigen::Map<MatrixXd>;

// ---------------------------------------------------------------------------
// Encoding

GraphEncoder::GraphEncoder(const DomainDefinition& domain, const ProblemInstance& problem)
    : domain_(domain), problem_(problem), nodes_(problem.initial_objects()) {
  const std::size_t n = nodes_.size();
  const std::size_t p = domain.predicates.size();
  for (std::size_t i = 0; i < n; ++i) index_[nodes_[i]] = static_cast<int>(i);
  base_ = MatrixXd::Zero(static_cast<Eigen::Index>(feature_dim(domain)), static_cast<Eigen::Index>(n));
  pose_fact_.assign(n, std::nullopt);
  pose_value_ = MatrixXd::Zero(2, static_cast<Eigen::Index>(n));
  std::vector<bool> has_extent(n, false);
  for (const Fact& f : problem.init) {
    const PredicateDecl& decl = domain.predicates.at(f.predicate);
    const int node = node_of(f[0]);
    if (f.arity == 0 || node < 0) continue;
    const bool fluent = decl.cls == PredicateClass::kFluent;
    if (f.arity == 1 && !fluent) base_(f.predicate, node) = 1.0;
    if (f.arity != 2) continue;
    const auto& payload = problem.objects[f[1]].payload;
    if (payload.empty()) continue;
    auto at = [&](std::size_t i) { return i < payload.size() ? payload[i] : 0.0; };
    if (fluent && !pose_fact_[static_cast<std::size_t>(node)]) {
      pose_fact_[static_cast<std::size_t>(node)] = f;
      pose_value_(0, node) = at(0);
      pose_value_(1, node) = at(1);
    } else if (!fluent && !has_extent[static_cast<std::size_t>(node)]) {
      has_extent[static_cast<std::size_t>(node)] = true;
      base_(static_cast<Eigen::Index>(p + 3), node) = at(0);
      base_(static_cast<Eigen::Index>(p + 4), node) = at(1);
    }
  }
}

int GraphEncoder::node_of(ObjectId object) const {
  auto it = index_.find(object);
  return it == index_.end() ? -1 : it->second;
}

void GraphEncoder::add_fact(const Fact& fact, int goal, std::vector<GraphEdge>& edges) const {
  std::array<int, kMaxArity> node{};
  for (std::size_t i = 0; i < fact.arity; ++i) node[i] = node_of(fact[i]);
  for (std::size_t i = 0; i < fact.arity; ++i) {
    if (node[i] < 0) continue;
    for (std::size_t j = 0; j < fact.arity; ++j) {
      if (node[j] < 0) continue;
      edges.push_back(GraphEdge{node[j], node[i], fact.predicate, static_cast<int>(i), static_cast<int>(j), goal});
    }
  }
}

SceneGraph GraphEncoder::encode(const LogicalState& state) const {
  SceneGraph g;
  g.objects = nodes_;
  g.features = base_;
  const auto p = static_cast<Eigen::Index>(domain_.predicates.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (pose_fact_[i] && state.contains(*pose_fact_[i])) {
      const auto n = static_cast<Eigen::Index>(i);
      g.features(p, n) = pose_value_(0, n);
      g.features(p + 1, n) = pose_value_(1, n);
      g.features(p + 2, n) = 1.0;
    }
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    g.edges.push_back(GraphEdge{static_cast<int>(i), static_cast<int>(i), -1, 0, 0, 0});
  }
  for (const Fact& f : state.facts()) add_fact(f, 0, g.edges);
  for (const Fact& f : problem_.goal) add_fact(f, 1, g.edges);
  return g;
}

SceneGraph GraphEncoder::encode(std::span<const ActionInstance> prefix) const {
  LogicalState state = problem_.initial_state(domain_);
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    try {
      state = apply(state, domain_, prefix[i]);
    } catch (const PreconditionViolation& e) {
      throw InvalidPrefix("prefix action " + std::to_string(i) + " is not applicable: " + e.what());
    }
  }
  return encode(state);
}

ActionCandidate GraphEncoder::candidate(const ActionInstance& action) const {
  ActionCandidate c;
  c.op = static_cast<int>(action.schema);
  for (std::size_t k = 0; k < action.args.size() && k < kActionSlots; ++k) c.slots[k] = node_of(action.args[k]);
  return c;
}

// ---------------------------------------------------------------------------
// Model layout

ModelShape ModelShape::for_domain(const DomainDefinition& domain, std::size_t layers, std::size_t width) {
  if (layers == 0 || width == 0) throw std::invalid_argument("model needs at least one layer of nonzero width");
  ModelShape s;
  s.layers = layers;
  s.width = width;
  s.predicates = domain.predicates.size();
  s.operators = domain.actions.size();
  for (const auto& p : domain.predicates) s.max_arity = std::max(s.max_arity, p.arity());
  s.max_arity = std::max<std::size_t>(s.max_arity, 1);
  s.features = GraphEncoder::feature_dim(domain);
  return s;
}

PolicyModel::PolicyModel(ModelShape shape) : shape_(shape) {
  std::size_t offset = 0;
  auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
    slices_.push_back(Slice{std::move(name), offset, rows, cols});
    offset += rows * cols;
  };
  const std::size_t h = shape.width;
  for (std::size_t l = 0; l < shape.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    add(p + "W", h, l == 0 ? shape.features : h);
    add(p + "attn", h, 1);
    add(p + "bias", h, 1);
    add(p + "pred", h, shape.predicates);
    add(p + "recv", h, shape.max_arity);
    add(p + "send", h, shape.max_arity);
    add(p + "goal", h, 2);
    add(p + "self", h, 1);
  }
  add("action.op", h, shape.operators);
  for (std::size_t k = 0; k < kActionSlots; ++k) add("action.slot" + std::to_string(k), h, h);
  add("action.bias", h, 1);
  add("action.key", h, h);
  add("action.value", h, h);
  add("head.U", h, 2 * h);
  add("head.bias", h, 1);
  add("head.w", h, 1);
  params_.assign(offset, 0.0);
}

PolicyModel PolicyModel::initialized(ModelShape shape, std::uint64_t seed) {
  PolicyModel m(shape);
  std::mt19937_64 rng(seed);
  for (const Slice& s : m.slices_) {
    const bool bias = s.name.ends_with("bias");
    if (bias) continue;
    const double limit = std::sqrt(6.0 / static_cast<double>(s.rows + s.cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < s.size(); ++i) m.params_[s.offset + i] = dist(rng);
  }
  return m;
}

const PolicyModel::Slice& PolicyModel::slice(std::string_view name) const {
  for (const Slice& s : slices_) {
    if (s.name == name) return s;
  }
  throw std::out_of_range("no parameter slice '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Forward and backward

struct PolicyModel::Cache {
  std::vector<MatrixXd> x;  // x[0] features, x[l + 1] layer outputs
  std::vector<MatrixXd> z;  // W x per layer
  std::vector<MatrixXd> r;  // edge vectors per layer, h x edges
  std::vector<MatrixXd> g;  // tanh(z_dst + z_src + r)
  std::vector<VectorXd> alpha;
  std::vector<std::vector<std::size_t>> incoming;
  MatrixXd keys, values;
  std::vector<VectorXd> q, beta, c, u;
  VectorXd logits, probs;
};

namespace {

VectorXd softmax(const VectorXd& v) {
  if (v.size() == 0) return v;
  const double m = v.maxCoeff();
  VectorXd e = (v.array() - m).exp();
  return e / e.sum();
}

}  // namespace

void PolicyModel::run(const SceneGraph& graph, std::span<const ActionCandidate> candidates, Cache& cache) const {
  if (candidates.empty()) throw std::invalid_argument("policy forward needs at least one candidate");
  const auto n = static_cast<Eigen::Index>(graph.num_nodes());
  const auto h = static_cast<Eigen::Index>(shape_.width);
  if (graph.features.rows() != static_cast<Eigen::Index>(shape_.features) || graph.features.cols() != n) {
    throw std::invalid_argument("scene graph features do not match the model shape");
  }
  const double* w = params_.data();
  auto mat = [&](const Slice& s) {
    return CMap(w + s.offset, static_cast<Eigen::Index>(s.rows), static_cast<Eigen::Index>(s.cols));
  };
  const auto& edges = graph.edges;
  const auto ne = static_cast<Eigen::Index>(edges.size());
  cache.incoming.assign(static_cast<std::size_t>(n), {});
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const GraphEdge& ed = edges[e];
    if (ed.src < 0 || ed.dst < 0 || ed.src >= n || ed.dst >= n) throw std::invalid_argument("edge references no node");
    cache.incoming[static_cast<std::size_t>(ed.dst)].push_back(e);
  }

  cache.x.assign(1, graph.features);
  cache.z.clear();
  cache.r.clear();
  cache.g.clear();
  cache.alpha.clear();
  std::size_t si = 0;
  for (std::size_t l = 0; l < shape_.layers; ++l) {
    const auto W = mat(slices_[si]), attn = mat(slices_[si + 1]), bias = mat(slices_[si + 2]),
               pred = mat(slices_[si + 3]), recv = mat(slices_[si + 4]), send = mat(slices_[si + 5]),
               goal = mat(slices_[si + 6]), self = mat(slices_[si + 7]);
    si += 8;
    MatrixXd z = W * cache.x.back();
    MatrixXd r(h, ne), g(h, ne);
    VectorXd score(ne);
    for (Eigen::Index e = 0; e < ne; ++e) {
      const GraphEdge& ed = edges[static_cast<std::size_t>(e)];
      if (ed.predicate < 0) {
        r.col(e) = self.col(0);
      } else {
        r.col(e) = pred.col(ed.predicate) + recv.col(ed.recv_role) + send.col(ed.send_role) + goal.col(ed.goal);
      }
      g.col(e) = (z.col(ed.dst) + z.col(ed.src) + r.col(e)).array().tanh();
      score(e) = attn.col(0).dot(g.col(e));
    }
    VectorXd alpha(ne);
    MatrixXd s = bias.col(0).replicate(1, n);
    for (Eigen::Index t = 0; t < n; ++t) {
      const auto& in = cache.incoming[static_cast<std::size_t>(t)];
      if (in.empty()) continue;
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t e : in) m = std::max(m, score(static_cast<Eigen::Index>(e)));
      double total = 0.0;
      for (std::size_t e : in) total += std::exp(score(static_cast<Eigen::Index>(e)) - m);
      for (std::size_t e : in) {
        const auto ei = static_cast<Eigen::Index>(e);
        alpha(ei) = std::exp(score(ei) - m) / total;
        s.col(t) += alpha(ei) * (z.col(edges[e].src) + r.col(ei));
      }
    }
    cache.z.push_back(std::move(z));
    cache.r.push_back(std::move(r));
    cache.g.push_back(std::move(g));
    cache.alpha.push_back(std::move(alpha));
    cache.x.push_back(s.array().tanh().matrix());
  }

  const MatrixXd& hn = cache.x.back();
  const auto op = mat(slices_[si]);
  const std::size_t slot0 = si + 1;
  const auto qbias = mat(slices_[slot0 + kActionSlots]), wk = mat(slices_[slot0 + kActionSlots + 1]),
             wv = mat(slices_[slot0 + kActionSlots + 2]), U = mat(slices_[slot0 + kActionSlots + 3]),
             hbias = mat(slices_[slot0 + kActionSlots + 4]), hw = mat(slices_[slot0 + kActionSlots + 5]);
  cache.keys = wk * hn;
  cache.values = wv * hn;
  const double scale = 1.0 / std::sqrt(static_cast<double>(h));
  const std::size_t m = candidates.size();
  cache.q.assign(m, VectorXd());
  cache.beta.assign(m, VectorXd());
  cache.c.assign(m, VectorXd());
  cache.u.assign(m, VectorXd());
  cache.logits.resize(static_cast<Eigen::Index>(m));
  for (std::size_t a = 0; a < m; ++a) {
    const ActionCandidate& cand = candidates[a];
    if (cand.op < 0 || static_cast<std::size_t>(cand.op) >= shape_.operators) {
      throw std::invalid_argument("candidate operator out of range");
    }
    VectorXd qpre = op.col(cand.op) + qbias.col(0);
    for (std::size_t k = 0; k < kActionSlots; ++k) {
      const int node = cand.slots[k];
      if (node < 0) continue;
      if (node >= n) throw std::invalid_argument("candidate parameter references no node");
      qpre += mat(slices_[slot0 + k]) * hn.col(node);
    }
    VectorXd q = qpre.array().tanh();
    VectorXd beta = softmax((cache.keys.transpose() * q) * scale);
    VectorXd c = n > 0 ? VectorXd(cache.values * beta) : VectorXd(VectorXd::Zero(h));
    VectorXd qc(2 * h);
    qc << q, c;
    VectorXd u = (U * qc + hbias.col(0)).array().tanh();
    cache.logits(static_cast<Eigen::Index>(a)) = hw.col(0).dot(u);
    cache.q[a] = std::move(q);
    cache.beta[a] = std::move(beta);
    cache.c[a] = std::move(c);
    cache.u[a] = std::move(u);
  }
  cache.probs = softmax(cache.logits);
}

std::vector<double> PolicyModel::forward(const SceneGraph& graph, std::span<const ActionCandidate> candidates) const {
  Cache cache;
  run(graph, candidates, cache);
  return {cache.probs.data(), cache.probs.data() + cache.probs.size()};
}

double PolicyModel::loss(const SceneGraph& graph, std::span<const ActionCandidate> candidates, std::size_t label,
                         std::vector<double>* grad) const {
  if (label >= candidates.size()) throw std::out_of_range("demonstrated action index out of range");
  Cache cache;
  run(graph, candidates, cache);
  const auto& lg = cache.logits;
  const double mx = lg.maxCoeff();
  const double log_z = mx + std::log((lg.array() - mx).exp().sum());
  const double value = log_z - lg(static_cast<Eigen::Index>(label));
  if (!grad) return value;
  if (grad->size() != params_.size()) grad->assign(params_.size(), 0.0);

  const auto n = static_cast<Eigen::Index>(graph.num_nodes());
  const auto h = static_cast<Eigen::Index>(shape_.width);
  const double* w = params_.data();
  double* gw = grad->data();
  auto mat = [&](const Slice& s) {
    return CMap(w + s.offset, static_cast<Eigen::Index>(s.rows), static_cast<Eigen::Index>(s.cols));
  };
  auto gmat = [&](const Slice& s) {
    return MMap(gw + s.offset, static_cast<Eigen::Index>(s.rows), static_cast<Eigen::Index>(s.cols));
  };

  // Head and action encoder.
  const std::size_t si = 8 * shape_.layers;
  const std::size_t slot0 = si + 1;
  const Slice &s_op = slices_[si], &s_qb = slices_[slot0 + kActionSlots], &s_k = slices_[slot0 + kActionSlots + 1],
              &s_v = slices_[slot0 + kActionSlots + 2], &s_u = slices_[slot0 + kActionSlots + 3],
              &s_hb = slices_[slot0 + kActionSlots + 4], &s_hw = slices_[slot0 + kActionSlots + 5];
  const auto U = mat(s_u), hw = mat(s_hw);
  const MatrixXd& hn = cache.x.back();
  MatrixXd d_hn = MatrixXd::Zero(h, n);
  MatrixXd d_keys = MatrixXd::Zero(h, n), d_values = MatrixXd::Zero(h, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(h));
  for (std::size_t a = 0; a < candidates.size(); ++a) {
    const double d_logit = cache.probs(static_cast<Eigen::Index>(a)) - (a == label ? 1.0 : 0.0);
    const VectorXd& u = cache.u[a];
    const VectorXd& q = cache.q[a];
    const VectorXd& beta = cache.beta[a];
    gmat(s_hw).col(0) += d_logit * u;
    VectorXd d_upre = (d_logit * hw.col(0)).array() * (1.0 - u.array().square());
    VectorXd qc(2 * h);
    qc << q, cache.c[a];
    gmat(s_u) += d_upre * qc.transpose();
    gmat(s_hb).col(0) += d_upre;
    VectorXd d_qc = U.transpose() * d_upre;
    VectorXd d_q = d_qc.head(h);
    const VectorXd d_c = d_qc.tail(h);
    if (n > 0) {
      d_values += d_c * beta.transpose();
      const VectorXd d_beta = cache.values.transpose() * d_c;
      const VectorXd d_s = beta.array() * (d_beta.array() - beta.dot(d_beta));
      d_q += scale * (cache.keys * d_s);
      d_keys += scale * (q * d_s.transpose());
    }
    const VectorXd d_qpre = d_q.array() * (1.0 - q.array().square());
    const ActionCandidate& cand = candidates[a];
    gmat(s_op).col(cand.op) += d_qpre;
    gmat(s_qb).col(0) += d_qpre;
    for (std::size_t k = 0; k < kActionSlots; ++k) {
      const int node = cand.slots[k];
      if (node < 0) continue;
      gmat(slices_[slot0 + k]) += d_qpre * hn.col(node).transpose();
      d_hn.col(node) += mat(slices_[slot0 + k]).transpose() * d_qpre;
    }
  }
  gmat(s_k) += d_keys * hn.transpose();
  gmat(s_v) += d_values * hn.transpose();
  d_hn += mat(s_k).transpose() * d_keys + mat(s_v).transpose() * d_values;

  // Graph attention layers, last to first.
  const auto& edges = graph.edges;
  MatrixXd d_x = std::move(d_hn);
  for (std::size_t li = shape_.layers; li-- > 0;) {
    const std::size_t b = 8 * li;
    const auto W = mat(slices_[b]), attn = mat(slices_[b + 1]);
    const MatrixXd& out = cache.x[li + 1];
    const MatrixXd& z = cache.z[li];
    const MatrixXd& r = cache.r[li];
    const MatrixXd& g = cache.g[li];
    const VectorXd& alpha = cache.alpha[li];
    const MatrixXd d_s = d_x.array() * (1.0 - out.array().square());
    gmat(slices_[b + 2]).col(0) += d_s.rowwise().sum();
    MatrixXd d_z = MatrixXd::Zero(h, n);
    auto g_attn = gmat(slices_[b + 1]);
    auto g_pred = gmat(slices_[b + 3]), g_recv = gmat(slices_[b + 4]), g_send = gmat(slices_[b + 5]),
         g_goal = gmat(slices_[b + 6]), g_self = gmat(slices_[b + 7]);
    for (Eigen::Index t = 0; t < n; ++t) {
      const auto& in = cache.incoming[static_cast<std::size_t>(t)];
      if (in.empty()) continue;
      std::vector<double> d_alpha(in.size());
      double mean = 0.0;
      for (std::size_t k = 0; k < in.size(); ++k) {
        const auto e = static_cast<Eigen::Index>(in[k]);
        d_alpha[k] = d_s.col(t).dot(z.col(edges[in[k]].src) + r.col(e));
        mean += alpha(e) * d_alpha[k];
      }
      for (std::size_t k = 0; k < in.size(); ++k) {
        const auto e = static_cast<Eigen::Index>(in[k]);
        const GraphEdge& ed = edges[in[k]];
        const double d_score = alpha(e) * (d_alpha[k] - mean);
        g_attn.col(0) += d_score * g.col(e);
        const VectorXd d_pre = (d_score * attn.col(0)).array() * (1.0 - g.col(e).array().square());
        const VectorXd d_msg = alpha(e) * d_s.col(t);
        d_z.col(ed.dst) += d_pre;
        d_z.col(ed.src) += d_pre + d_msg;
        const VectorXd d_r = d_pre + d_msg;
        if (ed.predicate < 0) {
          g_self.col(0) += d_r;
        } else {
          g_pred.col(ed.predicate) += d_r;
          g_recv.col(ed.recv_role) += d_r;
          g_send.col(ed.send_role) += d_r;
          g_goal.col(ed.goal) += d_r;
        }
      }
    }
    gmat(slices_[b]) += d_z * cache.x[li].transpose();
    if (li > 0) d_x = W.transpose() * d_z;
  }
  return value;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kMagic[4] = {'L', 'Z', 'P', 'M'};

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(b, 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw ModelFormatError("truncated model header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw ModelFormatError("truncated model parameters");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace

void PolicyModel::save(std::ostream& out) const {
  out.write(kMagic, 4);
  put_u32(out, kModelVersion);
  put_u32(out, static_cast<std::uint32_t>(shape_.layers));
  put_u32(out, static_cast<std::uint32_t>(shape_.width));
  put_u32(out, static_cast<std::uint32_t>(shape_.predicates));
  put_u32(out, static_cast<std::uint32_t>(shape_.operators));
  for (double v : params_) put_f64(out, v);
  if (!out) throw std::runtime_error("failed to write model");
}

void PolicyModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save(out);
}

PolicyModel PolicyModel::load(std::istream& in, const DomainDefinition& domain) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw ModelFormatError("not a policy model file");
  const std::uint32_t version = get_u32(in);
  if (version != kModelVersion) {
    throw ModelFormatError("unsupported model version " + std::to_string(version));
  }
  const std::uint32_t layers = get_u32(in), width = get_u32(in), preds = get_u32(in), ops = get_u32(in);
  if (preds != domain.predicates.size() || ops != domain.actions.size()) {
    throw ModelFormatError("model was trained for a domain with " + std::to_string(preds) + " predicates and " +
                           std::to_string(ops) + " operators; the active domain has " +
                           std::to_string(domain.predicates.size()) + " and " + std::to_string(domain.actions.size()));
  }
  if (layers == 0 || width == 0 || layers > 64 || width > 4096) throw ModelFormatError("implausible model shape");
  PolicyModel m(ModelShape::for_domain(domain, layers, width));
  for (double& v : m.params_) v = get_f64(in);
  if (in.peek() != std::char_traits<char>::eof()) throw ModelFormatError("trailing bytes after model parameters");
  return m;
}

PolicyModel PolicyModel::load(const std::string& path, const DomainDefinition& domain) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model " + path);
  return load(in, domain);
}

// ---------------------------------------------------------------------------

std::vector<double> GatPolicy::distribution(const PolicyContext& ctx) const {
  const GraphEncoder encoder(ctx.domain, ctx.problem);
  const SceneGraph graph = encoder.encode(ctx.state);
  std::vector<ActionCandidate> candidates;
  candidates.reserve(ctx.actions.size());
  for (const ActionInstance& a : ctx.actions) candidates.push_back(encoder.candidate(a));
  return model_->forward(graph, candidates);
}

}  // namespace lazytamp
