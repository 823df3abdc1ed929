#include "lazytamp/domains2d/scene.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

namespace lazytamp::domains2d {

const Table2D* Scene2D::table(const std::string& id) const {
  for (const Table2D& t : tables) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

const Body2D* Scene2D::body(const std::string& id) const {
  for (const Body2D& b : bodies) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

double Scene2D::base_y(const Body2D& b) const {
  double y = 0.0;
  const Body2D* cur = &b;
  for (std::size_t guard = 0; guard <= bodies.size(); ++guard) {
    const Body2D* below = body(cur->support);
    if (!below) return y;
    y += below->height;
    cur = below;
  }
  throw std::logic_error("support cycle at " + b.id);
}

const Table2D* Scene2D::root_table(const Body2D& b) const {
  const Body2D* cur = &b;
  for (std::size_t guard = 0; guard <= bodies.size(); ++guard) {
    if (const Table2D* t = table(cur->support)) return t;
    cur = body(cur->support);
    if (!cur) return nullptr;
  }
  return nullptr;
}

std::vector<const Body2D*> Scene2D::on(const std::string& support) const {
  std::vector<const Body2D*> out;
  for (const Body2D& b : bodies) {
    if (b.support == support) out.push_back(&b);
  }
  return out;
}

std::optional<std::string> Scene2D::invariant_violation() const {
  std::set<std::string> ids;
  for (const Table2D& t : tables) ids.insert(t.id);
  for (const Body2D& b : bodies) {
    if (!ids.insert(b.id).second) return "duplicate id " + b.id;
  }
  for (const Body2D& b : bodies) {
    if (!table(b.support) && !body(b.support)) return "body " + b.id + " has no support";
    if (!root_table(b)) return "body " + b.id + " has a cyclic support chain";
    if (const Table2D* t = table(b.support)) {
      if (b.x - b.width / 2 < t->lo - 1e-9 || b.x + b.width / 2 > t->hi + 1e-9) {
        return "body " + b.id + " overhangs table " + t->id;
      }
    }
  }
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    for (std::size_t j = i + 1; j < bodies.size(); ++j) {
      const Body2D& a = bodies[i];
      const Body2D& c = bodies[j];
      if (a.support != c.support) continue;
      if (std::abs(a.x - c.x) < (a.width + c.width) / 2 - 1e-9) return "bodies " + a.id + " and " + c.id + " overlap";
    }
  }
  return std::nullopt;
}

Scene2D scene_from_problem(const ProblemInstance& problem, const DomainDefinition& domain) {
  Scene2D scene;
  auto pid = [&](std::string_view n) { return domain.find_predicate(n); };
  const auto table_p = pid("Table"), region_p = pid("Region"), block_p = pid("Block"), size_p = pid("Size"),
             pose_p = pid("AtPose"), on_p = pid("On"), conf_p = pid("AtConf");
  const ObjectTable& objs = problem.objects;
  auto payload = [&](ObjectId o, std::size_t n) {
    const auto& v = objs[o].payload;
    if (v.size() < n) throw std::invalid_argument("object " + objs.name(o) + " lacks a value");
    return v;
  };
  for (const Fact& f : problem.init) {
    if (table_p && f.predicate == *table_p) scene.tables.push_back(Table2D{objs.name(f[0]), 0.0, 0.0});
    if (block_p && f.predicate == *block_p) {
      Body2D b;
      b.id = objs.name(f[0]);
      scene.bodies.push_back(b);
    }
  }
  auto find_table = [&](const std::string& id) -> Table2D* {
    for (auto& t : scene.tables) {
      if (t.id == id) return &t;
    }
    return nullptr;
  };
  auto find_body = [&](const std::string& id) -> Body2D* {
    for (auto& b : scene.bodies) {
      if (b.id == id) return &b;
    }
    return nullptr;
  };
  for (const Fact& f : problem.init) {
    if (region_p && f.predicate == *region_p) {
      if (Table2D* t = find_table(objs.name(f[0]))) {
        auto v = payload(f[1], 2);
        t->lo = v[0];
        t->hi = v[1];
      }
    } else if (size_p && f.predicate == *size_p) {
      if (Body2D* b = find_body(objs.name(f[0]))) {
        auto v = payload(f[1], 2);
        b->width = v[0];
        b->height = v[1];
      }
    } else if (pose_p && f.predicate == *pose_p) {
      if (Body2D* b = find_body(objs.name(f[0]))) b->x = payload(f[1], 1)[0];
    } else if (on_p && f.predicate == *on_p) {
      if (Body2D* b = find_body(objs.name(f[0]))) b->support = objs.name(f[1]);
    } else if (conf_p && f.predicate == *conf_p) {
      auto v = payload(f[0], 2);
      scene.q_x = v[0];
      scene.q_y = v[1];
    }
  }
  const Geometry2D defaults;
  for (Body2D& b : scene.bodies) b.blocker = b.height > defaults.block_height + 1e-9;
  return scene;
}

std::string scene_json(const Scene2D& scene, const std::vector<Goal2D>& goal) {
  nlohmann::ordered_json j;
  j["tables"] = nlohmann::ordered_json::array();
  for (const Table2D& t : scene.tables) j["tables"].push_back({{"id", t.id}, {"lo", t.lo}, {"hi", t.hi}});
  j["bodies"] = nlohmann::ordered_json::array();
  for (const Body2D& b : scene.bodies) {
    j["bodies"].push_back({{"id", b.id},
                           {"x", b.x},
                           {"y", scene.base_y(b)},
                           {"width", b.width},
                           {"height", b.height},
                           {"support", b.support},
                           {"blocker", b.blocker},
                           {"distractor", b.distractor}});
  }
  j["robot"] = {{"x", scene.q_x}, {"y", scene.q_y}};
  j["reach_clearance"] = scene.reach_clearance;
  j["goal"] = nlohmann::ordered_json::array();
  for (const Goal2D& g : goal) j["goal"].push_back({{"body", g.body}, {"on", g.target}});
  return j.dump(2);
}

}  // namespace lazytamp::domains2d
