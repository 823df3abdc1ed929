#include "lazytamp/domains2d/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "lazytamp/refinement.hpp"

namespace lazytamp::domains2d {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::kStacking: return "stacking";
    case Family::kSorting: return "sorting";
    case Family::kRandom: return "random";
    case Family::kClutter: return "clutter";
    case Family::kDistractors: return "distractors";
  }
  return "random";
}

Family family_from_string(std::string_view name) {
  for (Family f : kAllFamilies) {
    if (to_string(f) == name) return f;
  }
  throw std::invalid_argument("unknown problem family '" + std::string(name) + "'");
}

namespace {

std::string num(double v) {
  char buf[48];
  if (std::abs(v) < 5e-7) v = 0.0;
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

double round6(double v) { return std::round(v * 1e6) / 1e6; }

class Builder {
 public:
  Builder(const ProblemSpec& spec, const Geometry2D& g)
      : spec_(spec), g_(g), rng_(stable_hash(std::to_string(spec.seed), stable_hash(to_string(spec.family)))) {
    for (const TableSpec& t : g.tables) scene_.tables.push_back(Table2D{t.id, t.lo, t.hi});
    scene_.q_x = g.q_init_x;
    scene_.q_y = g.q_init_y;
    scene_.reach_clearance = g.reach_clearance;
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin(double p) { return uniform(0.0, 1.0) < p; }
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[pick(i)]);
  }

  Body2D make_block(std::size_t i) {
    Body2D b;
    b.id = "b" + std::to_string(i);
    b.width = g_.block_width;
    b.height = g_.block_height;
    return b;
  }
  Body2D make_blocker(std::size_t i) {
    Body2D b;
    b.id = "k" + std::to_string(i);
    b.width = g_.blocker_width;
    b.height = round6(uniform(g_.blocker_height_min, g_.blocker_height_max));
    b.blocker = true;
    return b;
  }

  bool fits(const Body2D& b, const Table2D& t, double x, double min_gap) const {
    if (x - b.width / 2 < t.lo || x + b.width / 2 > t.hi) return false;
    for (const Body2D* o : scene_.on(t.id)) {
      if (std::abs(o->x - x) < (o->width + b.width) / 2 + min_gap) return false;
    }
    return true;
  }

  /// Random free spot on some table; tries the tables in random order.
  bool place_randomly(Body2D b, const std::vector<const Table2D*>& tables) {
    std::vector<const Table2D*> order = tables;
    shuffle(order);
    for (const Table2D* t : order) {
      for (int attempt = 0; attempt < 200; ++attempt) {
        const double x = round6(uniform(t->lo + b.width / 2, t->hi - b.width / 2));
        if (fits(b, *t, x, 0.005)) {
          b.x = x;
          b.support = t->id;
          scene_.bodies.push_back(b);
          return true;
        }
      }
    }
    return false;
  }

  /// Next to a block on a table, closer than the reach clearance.
  bool place_obstructing(Body2D b) {
    std::vector<const Body2D*> targets;
    for (const Body2D& o : scene_.bodies) {
      if (!o.blocker && scene_.table(o.support)) targets.push_back(&o);
    }
    shuffle(targets);
    for (const Body2D* o : targets) {
      const Table2D* t = scene_.table(o->support);
      for (int side : {-1, 1}) {
        const double gap = uniform(0.005, g_.obstruct_gap_max);
        const double x = round6(o->x + side * ((o->width + b.width) / 2 + gap));
        if (fits(b, *t, x, 0.004)) {
          b.x = x;
          b.support = t->id;
          scene_.bodies.push_back(b);
          return true;
        }
      }
    }
    return false;
  }

  void place_on_top(Body2D b, const Body2D& below) {
    b.x = round6(below.x + uniform(-g_.stack_jitter, g_.stack_jitter));
    b.support = below.id;
    scene_.bodies.push_back(b);
  }

  std::vector<const Table2D*> work_tables() const {
    std::vector<const Table2D*> out;
    for (const TableSpec& t : g_.tables) out.push_back(scene_.table(t.id));
    return out;
  }

  bool has_on_top(const std::string& id) const { return !scene_.on(id).empty(); }

  void populate(std::size_t n_blocks, std::size_t n_blockers, bool allow_stacks) {
    for (std::size_t i = 0; i < n_blocks; ++i) {
      Body2D b = make_block(i);
      std::vector<const Body2D*> tops;
      for (const Body2D& o : scene_.bodies) {
        if (!o.blocker && !has_on_top(o.id)) tops.push_back(&o);
      }
      if (allow_stacks && !tops.empty() && coin(0.25)) {
        place_on_top(b, *tops[pick(tops.size())]);
      } else if (!place_randomly(b, work_tables())) {
        throw InfeasibleSpec("blocks do not fit on the tables");
      }
    }
    for (std::size_t i = 0; i < n_blockers; ++i) {
      Body2D k = make_blocker(i);
      if (coin(0.7) && place_obstructing(k)) continue;
      if (!place_randomly(k, work_tables())) throw InfeasibleSpec("blockers do not fit on the tables");
    }
  }

  /// Ordered Poisson-disc slots: centres increase left to right with a
  /// spacing of at least the radius.
  void populate_clutter(std::size_t n_blocks, std::size_t n_blockers) {
    const double r = g_.poisson_radius;
    const double w = std::max(g_.block_width, g_.blocker_width);
    if (r < w) throw InfeasibleSpec("poisson radius smaller than object width");
    std::vector<std::pair<const Table2D*, double>> slots;
    for (const Table2D* t : work_tables()) {
      double x = round6(t->lo + w / 2 + uniform(0.0, 0.05));
      while (x + w / 2 <= t->hi) {
        slots.emplace_back(t, x);
        x = round6(x + r + uniform(0.0, 0.5 * r));
      }
    }
    if (slots.size() < n_blocks + n_blockers) throw InfeasibleSpec("clutter objects do not fit");
    shuffle(slots);
    std::size_t s = 0;
    for (std::size_t i = 0; i < n_blocks; ++i, ++s) {
      Body2D b = make_block(i);
      b.support = slots[s].first->id;
      b.x = slots[s].second;
      scene_.bodies.push_back(b);
    }
    for (std::size_t i = 0; i < n_blockers; ++i, ++s) {
      Body2D k = make_blocker(i);
      k.support = slots[s].first->id;
      k.x = slots[s].second;
      scene_.bodies.push_back(k);
    }
  }

  void add_distractors(std::size_t n) {
    const TableSpec& ts = g_.distractor_table;
    scene_.tables.push_back(Table2D{ts.id, ts.lo, ts.hi});
    for (std::size_t i = 0; i < n; ++i) {
      Body2D d;
      d.id = "d" + std::to_string(i);
      d.width = g_.block_width;
      d.height = coin(0.5) ? g_.block_height : round6(uniform(g_.blocker_height_min, g_.blocker_height_max));
      d.blocker = d.height > g_.block_height;
      d.distractor = true;
      if (!place_randomly(d, {scene_.table(ts.id)})) throw InfeasibleSpec("distractors do not fit");
    }
  }

  std::vector<std::string> block_ids() const {
    std::vector<std::string> out;
    for (const Body2D& b : scene_.bodies) {
      if (!b.blocker && !b.distractor) out.push_back(b.id);
    }
    return out;
  }

  std::string other_table(const std::string& current) {
    std::vector<std::string> options;
    for (const TableSpec& t : g_.tables) {
      if (t.id != current) options.push_back(t.id);
    }
    return options[pick(options.size())];
  }

  bool satisfied(const Goal2D& goal) const {
    const Body2D* b = scene_.body(goal.body);
    return b && b->support == goal.target;
  }

  std::vector<Goal2D> towers() {
    auto ids = block_ids();
    shuffle(ids);
    std::vector<Goal2D> goal;
    if (ids.size() == 1) {
      goal.push_back({ids[0], other_table(scene_.root_table(*scene_.body(ids[0]))->id)});
      return goal;
    }
    std::size_t i = 0;
    while (i < ids.size()) {
      std::size_t height = std::min<std::size_t>(ids.size() - i, coin(0.5) ? 2 : 3);
      if (ids.size() - i - height == 1) ++height;  // no singleton left over
      for (std::size_t k = i; k + 1 < i + height; ++k) goal.push_back({ids[k], ids[k + 1]});
      i += height;
    }
    return goal;
  }

  std::vector<Goal2D> sorting() {
    std::vector<Goal2D> goal;
    for (const std::string& id : block_ids()) {
      goal.push_back({id, other_table(scene_.root_table(*scene_.body(id))->id)});
    }
    for (const Body2D& b : scene_.bodies) {
      if (b.blocker && !b.distractor) goal.push_back({b.id, scene_.root_table(b)->id});
    }
    return goal;
  }

  /// Each block goes to a table or onto a block earlier in a random order.
  std::vector<Goal2D> mixed() {
    auto ids = block_ids();
    shuffle(ids);
    std::vector<Goal2D> goal;
    std::vector<std::string> free_tops;
    for (const std::string& id : ids) {
      if (!free_tops.empty() && coin(0.5)) {
        const std::size_t j = pick(free_tops.size());
        goal.push_back({id, free_tops[j]});
        free_tops.erase(free_tops.begin() + static_cast<long>(j));
      } else {
        goal.push_back({id, other_table(scene_.root_table(*scene_.body(id))->id)});
      }
      free_tops.push_back(id);
    }
    return goal;
  }

  GeneratedProblem finish(std::vector<Goal2D> goal, std::size_t moved_bound) {
    if (auto v = scene_.invariant_violation()) throw std::logic_error("generator produced an invalid scene: " + *v);
    if (!goal.empty() && std::all_of(goal.begin(), goal.end(), [&](const Goal2D& gl) { return satisfied(gl); })) {
      // Make sure there is something to do.
      goal.front().target = other_table(scene_.root_table(*scene_.body(goal.front().body))->id);
    }
    GeneratedProblem out;
    out.name = std::string(to_string(spec_.family)) + "-" + std::to_string(spec_.seed);
    out.scene = std::move(scene_);
    out.goal = std::move(goal);
    out.problem_text = problem_text(out.name, out.scene, out.goal);
    out.witness_length = 2 * moved_bound;
    return out;
  }

  Scene2D& scene() { return scene_; }

 private:
  ProblemSpec spec_;
  const Geometry2D& g_;
  Rng rng_;
  Scene2D scene_;
};

}  // namespace

GeneratedProblem generate_problem(const ProblemSpec& spec, const Geometry2D& geometry) {
  Builder b(spec, geometry);
  const std::size_t nb = spec.n_blocks;
  std::size_t nk = spec.n_blockers;
  // Constructive plan: clear every block to a table, rebuild the goal,
  // moving each blocker out of the way and back at most once.
  std::vector<Goal2D> goal;
  switch (spec.family) {
    case Family::kStacking:
      if (nb == 0) throw InfeasibleSpec("stacking needs at least one block");
      b.populate(nb, nk, false);
      goal = b.towers();
      break;
    case Family::kSorting:
      b.populate(nb, nk, false);
      goal = b.sorting();
      break;
    case Family::kRandom:
      b.populate(nb, nk, true);
      goal = b.mixed();
      break;
    case Family::kClutter:
      nk *= 2;
      b.populate_clutter(nb, nk);
      goal = b.mixed();
      break;
    case Family::kDistractors:
      b.populate(nb, nk, true);
      b.add_distractors(std::max<std::size_t>(2, spec.n_blockers + 1));
      goal = b.mixed();
      break;
  }
  return b.finish(std::move(goal), 2 * nb + 2 * nk);
}

GeneratedProblem fig2_problem(const Geometry2D& g) {
  Scene2D scene;
  for (std::size_t i = 0; i < 2; ++i) scene.tables.push_back(Table2D{g.tables[i].id, g.tables[i].lo, g.tables[i].hi});
  scene.q_x = g.q_init_x;
  scene.q_y = g.q_init_y;
  scene.reach_clearance = g.reach_clearance;
  const double gap = 0.01;
  const double w = g.block_width;
  Body2D b0{"b0", w, g.block_height, 0.05 + w / 2, "t0", false, false};
  Body2D b2{"b2", g.blocker_width, g.blocker_height_max, 0.0, "t0", true, false};
  b2.x = round6(b0.x + (b0.width + b2.width) / 2 + gap);
  Body2D b1{"b1", w, g.block_height, 0.0, "t0", false, false};
  b1.x = round6(b2.x + (b2.width + b1.width) / 2 + gap);
  scene.bodies = {b0, b1, b2};
  GeneratedProblem out;
  out.name = "fig2";
  out.scene = scene;
  out.goal = {{"b0", "t1"}, {"b1", "t1"}};
  out.problem_text = problem_text(out.name, out.scene, out.goal);
  out.witness_length = 6;
  return out;
}

std::string problem_text(const std::string& name, const Scene2D& scene, const std::vector<Goal2D>& goal) {
  std::string init = "    (HandEmpty) (Conf q_init) (AtConf q_init)\n";
  std::string values = "    (q_init " + num(scene.q_x) + " " + num(scene.q_y) + ")\n";
  for (const Table2D& t : scene.tables) {
    init += "    (Table " + t.id + ") (Region " + t.id + " r_" + t.id + ")\n";
    values += "    (r_" + t.id + " " + num(t.lo) + " " + num(t.hi) + ")\n";
  }
  for (const Body2D& b : scene.bodies) {
    init += "    (Block " + b.id + ") (Size " + b.id + " s_" + b.id + ") (Pose p_" + b.id + ") (AtPose " + b.id +
            " p_" + b.id + ") (On " + b.id + " " + b.support + ")";
    if (scene.on(b.id).empty()) init += " (Clear " + b.id + ")";
    init += "\n";
    values += "    (s_" + b.id + " " + num(b.width) + " " + num(b.height) + ")\n";
    values += "    (p_" + b.id + " " + num(b.x) + " " + num(scene.base_y(b)) + ")\n";
  }
  std::string goals;
  for (const Goal2D& g : goal) goals += " (On " + g.body + " " + g.target + ")";
  return "(define (problem " + name + ")\n  (:domain tabletop2d)\n  (:init\n" + init + "  )\n  (:values\n" + values +
         "  )\n  (:goal (and" + goals + ")))\n";
}

}  // namespace lazytamp::domains2d
