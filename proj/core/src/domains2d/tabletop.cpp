#include "lazytamp/domains2d/tabletop.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace lazytamp::domains2d {

std::string domain_text(bool with_motion) {
  std::string place_params = with_motion ? "(?b ?g ?t ?q0 ?p ?q ?tr)" : "(?b ?g ?t ?q0 ?p ?q)";
  std::string stack_params = with_motion ? "(?b ?g ?c ?pc ?q0 ?p ?q ?tr)" : "(?b ?g ?c ?pc ?q0 ?p ?q)";
  std::string motion_pre = with_motion ? "\n                       (Motion ?q0 ?q ?tr)" : "";
  std::string text = R"((define (domain tabletop2d)
  (:requirements :strips)
  (:predicates
    (Table ?t) (Region ?t ?r) (Block ?b) (Size ?b ?s)
    (Pose ?p) (Conf ?q) (GraspOf ?b ?g)
    (Grasp ?b ?p ?q0 ?g) (Kin ?b ?p ?g ?q)
    (Placement ?b ?t ?p) (StackPlacement ?b ?c ?pc ?p))" +
                     std::string(with_motion ? "\n    (Motion ?q1 ?q2 ?tr)" : "") + R"(
    (On ?b ?s) (AtPose ?b ?p) (Clear ?b) (HandEmpty) (Holding ?b ?g) (AtConf ?q))

  (:action pick
    :parameters (?b ?t ?p ?q0 ?g ?q)
    :precondition (and (Block ?b) (Table ?t) (On ?b ?t) (AtPose ?b ?p) (Clear ?b)
                       (HandEmpty) (AtConf ?q0)
                       (Grasp ?b ?p ?q0 ?g) (Kin ?b ?p ?g ?q))
    :effect (and (Holding ?b ?g) (AtConf ?q)
                 (not (On ?b ?t)) (not (AtPose ?b ?p)) (not (Clear ?b))
                 (not (HandEmpty)) (not (AtConf ?q0))))

  (:action unstack
    :parameters (?b ?c ?p ?q0 ?g ?q)
    :precondition (and (Block ?b) (Block ?c) (On ?b ?c) (AtPose ?b ?p) (Clear ?b)
                       (HandEmpty) (AtConf ?q0)
                       (Grasp ?b ?p ?q0 ?g) (Kin ?b ?p ?g ?q))
    :effect (and (Holding ?b ?g) (Clear ?c) (AtConf ?q)
                 (not (On ?b ?c)) (not (AtPose ?b ?p)) (not (Clear ?b))
                 (not (HandEmpty)) (not (AtConf ?q0))))

  (:action place
    :parameters )" + place_params +
                     R"(
    :precondition (and (Table ?t) (Holding ?b ?g) (AtConf ?q0)
                       (Placement ?b ?t ?p) (Kin ?b ?p ?g ?q))" +
                     motion_pre + R"()
    :effect (and (On ?b ?t) (AtPose ?b ?p) (Clear ?b) (HandEmpty) (AtConf ?q)
                 (not (Holding ?b ?g)) (not (AtConf ?q0))))

  (:action stack
    :parameters )" + stack_params +
                     R"(
    :precondition (and (Block ?c) (Holding ?b ?g) (Clear ?c) (AtPose ?c ?pc) (AtConf ?q0)
                       (StackPlacement ?b ?c ?pc ?p) (Kin ?b ?p ?g ?q))" +
                     motion_pre + R"()
    :effect (and (On ?b ?c) (AtPose ?b ?p) (Clear ?b) (HandEmpty) (AtConf ?q)
                 (not (Clear ?c)) (not (Holding ?b ?g)) (not (AtConf ?q0))))

  (:stream grasp
    :inputs (?b ?p ?q0)
    :domain (and (Block ?b) (Pose ?p) (Conf ?q0))
    :outputs (?g)
    :certified (and (GraspOf ?b ?g) (Grasp ?b ?p ?q0 ?g)))

  (:stream ik
    :inputs (?b ?p ?g)
    :domain (and (Pose ?p) (GraspOf ?b ?g))
    :outputs (?q)
    :certified (and (Conf ?q) (Kin ?b ?p ?g ?q)))

  (:stream placement
    :inputs (?b ?t)
    :domain (and (Block ?b) (Table ?t))
    :outputs (?p)
    :certified (and (Pose ?p) (Placement ?b ?t ?p)))

  (:stream stack-placement
    :inputs (?b ?c ?pc)
    :domain (and (Block ?b) (Block ?c) (Pose ?pc))
    :outputs (?p)
    :certified (and (Pose ?p) (StackPlacement ?b ?c ?pc ?p))))";
  if (with_motion) {
    text += R"(

  (:stream motion
    :inputs (?q1 ?q2)
    :domain (and (Conf ?q1) (Conf ?q2))
    :outputs (?tr)
    :certified (Motion ?q1 ?q2 ?tr)))";
  }
  text += ")\n";
  return text;
}

namespace {

struct BodyState {
  double w = 0.1;
  double h = 0.1;
  double x = 0.0;
  double y = 0.0;
  ObjectId support = kNoObject;
  bool held = false;
};

class World2D : public WorldState {
 public:
  std::unique_ptr<WorldState> clone() const override { return std::make_unique<World2D>(*this); }

  std::map<ObjectId, BodyState> bodies;
  std::map<ObjectId, std::pair<double, double>> tables;
  double qx = 0.0;
  double qy = 0.0;
};

const World2D& as_world(const WorldState& w) { return dynamic_cast<const World2D&>(w); }
World2D& as_world(WorldState& w) { return dynamic_cast<World2D&>(w); }

constexpr double kEps = 1e-7;

const BodyState& body_at(const World2D& w, ObjectId b, const ObjectTable& objects) {
  auto it = w.bodies.find(b);
  if (it == w.bodies.end()) throw std::invalid_argument(objects.name(b) + " is not a body");
  return it->second;
}

/// A strictly taller neighbour on the same support closer than the reach
/// clearance blocks every grasp.
bool obstructed(const World2D& w, ObjectId b, double x, double y, const Geometry2D& g) {
  const BodyState& bs = w.bodies.at(b);
  const double top = y + bs.h;
  for (const auto& [o, os] : w.bodies) {
    if (o == b || os.held || os.support != bs.support) continue;
    const double gap = std::abs(os.x - x) - (os.w + bs.w) / 2;
    if (gap < g.reach_clearance && os.y + os.h > top + kEps) return true;
  }
  return false;
}

bool free_on_table(const World2D& w, ObjectId b, ObjectId t, double x, const Geometry2D& g) {
  const BodyState& bs = w.bodies.at(b);
  auto tt = w.tables.find(t);
  if (tt == w.tables.end()) return false;
  if (x - bs.w / 2 < tt->second.first - kEps || x + bs.w / 2 > tt->second.second + kEps) return false;
  for (const auto& [o, os] : w.bodies) {
    if (o == b || os.held || os.support != t) continue;
    if (std::abs(os.x - x) < (os.w + bs.w) / 2 + g.placement_margin - kEps) return false;
  }
  return true;
}

bool reachable(double x, const Geometry2D& g) { return x >= g.reach_lo - kEps && x <= g.reach_hi + kEps; }

bool sweep_free(const World2D& w, const Values& q1, const Values& q2) {
  const double lo = std::min(q1[0], q2[0]);
  const double hi = std::max(q1[0], q2[0]);
  const double height = std::max(q1[1], q2[1]);
  for (const auto& [o, os] : w.bodies) {
    if (os.held) continue;
    if (os.x + os.w / 2 < lo || os.x - os.w / 2 > hi) continue;
    if (os.y + os.h > height + kEps) return false;
  }
  return true;
}

std::size_t param_index(const ActionSchema& a, std::string_view name) {
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    if (a.params[i].name == name) return i;
  }
  throw std::invalid_argument("action " + a.name + " has no parameter ?" + std::string(name));
}

void require(std::span<const Values> values, std::size_t i, std::size_t n, const char* what) {
  if (values.size() <= i || values[i].size() < n) throw std::invalid_argument(std::string("missing value for ") + what);
}

}  // namespace

TabletopEvaluator::TabletopEvaluator(const DomainDefinition& domain, Geometry2D geometry)
    : domain_(domain), geometry_(std::move(geometry)) {}

std::unique_ptr<WorldState> TabletopEvaluator::initial_world(const ProblemInstance& problem) const {
  const Scene2D scene = scene_from_problem(problem, domain_);
  auto w = std::make_unique<World2D>();
  auto id = [&](const std::string& name) {
    auto o = problem.objects.find(name);
    if (!o) throw std::invalid_argument("unknown object " + name);
    return *o;
  };
  for (const Table2D& t : scene.tables) w->tables[id(t.id)] = {t.lo, t.hi};
  for (const Body2D& b : scene.bodies) {
    BodyState s;
    s.w = b.width;
    s.h = b.height;
    s.x = b.x;
    s.y = scene.base_y(b);
    s.support = id(b.support);
    w->bodies[id(b.id)] = s;
  }
  w->qx = scene.q_x;
  w->qy = scene.q_y;
  return w;
}

std::optional<std::vector<Values>> TabletopEvaluator::sample(const SampleRequest& r, Rng& rng) const {
  const World2D& w = as_world(r.world);
  const Geometry2D& g = geometry_;
  const std::string& name = r.schema.name;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  if (name == "grasp") {  // (?b ?p ?q0) -> ?g
    const ObjectId b = r.inputs[0];
    require(r.input_values, 1, 2, "grasp pose");
    const BodyState& bs = body_at(w, b, r.objects);
    const Values& p = r.input_values[1];
    const double offset = uniform(-g.grasp_offset_fraction * bs.w, g.grasp_offset_fraction * bs.w);
    if (obstructed(w, b, p[0], p[1], g)) return std::nullopt;
    return std::vector<Values>{{offset}};
  }
  if (name == "ik") {  // (?b ?p ?g) -> ?q
    const BodyState& bs = body_at(w, r.inputs[0], r.objects);
    require(r.input_values, 1, 2, "ik pose");
    require(r.input_values, 2, 1, "ik grasp");
    const Values& p = r.input_values[1];
    const double x = p[0] + r.input_values[2][0];
    const double y = p[1] + bs.h + uniform(0.0, g.ik_height_jitter);
    if (!reachable(x, g)) return std::nullopt;
    return std::vector<Values>{{x, y}};
  }
  if (name == "placement") {  // (?b ?t) -> ?p
    const ObjectId b = r.inputs[0];
    const ObjectId t = r.inputs[1];
    const BodyState& bs = body_at(w, b, r.objects);
    auto tt = w.tables.find(t);
    if (tt == w.tables.end()) return std::nullopt;
    const double lo = tt->second.first + bs.w / 2;
    const double hi = tt->second.second - bs.w / 2;
    if (hi < lo) return std::nullopt;
    for (int k = 0; k < g.placement_tries; ++k) {
      const double x = uniform(lo, hi);
      if (free_on_table(w, b, t, x, g)) return std::vector<Values>{{x, 0.0}};
    }
    return std::nullopt;
  }
  if (name == "stack-placement") {  // (?b ?c ?pc) -> ?p
    const BodyState& below = body_at(w, r.inputs[1], r.objects);
    require(r.input_values, 2, 2, "support pose");
    const Values& pc = r.input_values[2];
    return std::vector<Values>{{pc[0] + uniform(-g.stack_jitter, g.stack_jitter), pc[1] + below.h}};
  }
  if (name == "motion") {  // (?q1 ?q2) -> ?tr
    require(r.input_values, 0, 2, "motion start");
    require(r.input_values, 1, 2, "motion goal");
    const Values& q1 = r.input_values[0];
    const Values& q2 = r.input_values[1];
    if (!sweep_free(w, q1, q2)) return std::nullopt;
    return std::vector<Values>{{q1[0], q1[1], q2[0], q2[1]}};
  }
  throw std::invalid_argument("no sampler for stream " + name);
}

void TabletopEvaluator::apply(const ActionSchema& action, std::span<const ObjectId> args,
                              std::span<const Values> values, const ObjectTable& objects, WorldState& world) const {
  World2D& w = as_world(world);
  const ObjectId b = args[param_index(action, "b")];
  BodyState& bs = w.bodies.at(b);
  const std::size_t qi = param_index(action, "q");
  require(values, qi, 2, "configuration");
  if (action.name == "pick" || action.name == "unstack") {
    bs.held = true;
  } else if (action.name == "place" || action.name == "stack") {
    const std::size_t pi = param_index(action, "p");
    require(values, pi, 2, "placement pose");
    bs.held = false;
    bs.x = values[pi][0];
    bs.y = values[pi][1];
    bs.support = args[param_index(action, action.name == "place" ? "t" : "c")];
  } else {
    throw std::invalid_argument("no geometric effect for action " + action.name + " on " + objects.name(b));
  }
  w.qx = values[qi][0];
  w.qy = values[qi][1];
}

bool TabletopEvaluator::validate(const PredicateDecl& predicate, std::span<const ObjectId> args,
                                 std::span<const Values> values, const ObjectTable& objects,
                                 const WorldState& world) const {
  const World2D& w = as_world(world);
  const Geometry2D& g = geometry_;
  const std::string& name = predicate.name;
  auto size_is = [&](std::size_t i, std::size_t n) { return values.size() > i && values[i].size() == n; };

  if (name == "Pose" || name == "Conf") return size_is(0, 2);
  if (name == "GraspOf") {  // (?b ?g)
    const BodyState& bs = body_at(w, args[0], objects);
    return size_is(1, 1) && std::abs(values[1][0]) <= g.grasp_offset_fraction * bs.w + kEps;
  }
  if (name == "Grasp") {  // (?b ?p ?q0 ?g)
    const BodyState& bs = body_at(w, args[0], objects);
    if (!size_is(1, 2) || !size_is(3, 1)) return false;
    const Values& p = values[1];
    if (bs.held || std::abs(bs.x - p[0]) > kEps || std::abs(bs.y - p[1]) > kEps) return false;
    return std::abs(values[3][0]) <= g.grasp_offset_fraction * bs.w + kEps && !obstructed(w, args[0], p[0], p[1], g);
  }
  if (name == "Kin") {  // (?b ?p ?g ?q)
    const BodyState& bs = body_at(w, args[0], objects);
    if (!size_is(1, 2) || !size_is(2, 1) || !size_is(3, 2)) return false;
    const Values& p = values[1];
    const Values& q = values[3];
    const double lift = q[1] - (p[1] + bs.h);
    return std::abs(q[0] - (p[0] + values[2][0])) <= kEps && lift >= -kEps && lift <= g.ik_height_jitter + kEps &&
           reachable(q[0], g);
  }
  if (name == "Placement") {  // (?b ?t ?p)
    if (!size_is(2, 2)) return false;
    return std::abs(values[2][1]) <= kEps && free_on_table(w, args[0], args[1], values[2][0], g);
  }
  if (name == "StackPlacement") {  // (?b ?c ?pc ?p)
    const BodyState& below = body_at(w, args[1], objects);
    if (!size_is(2, 2) || !size_is(3, 2)) return false;
    return std::abs(values[3][0] - values[2][0]) <= g.stack_jitter + kEps &&
           std::abs(values[3][1] - (values[2][1] + below.h)) <= kEps;
  }
  if (name == "Motion") {  // (?q1 ?q2 ?tr)
    if (!size_is(0, 2) || !size_is(1, 2) || !size_is(2, 4)) return false;
    return sweep_free(w, values[0], values[1]);
  }
  throw std::invalid_argument("no validator for predicate " + name);
}

}  // namespace lazytamp::domains2d
