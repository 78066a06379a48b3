// Box grids, enclosures and the transition graph
#include "doctest.h"

#include "conleybif/cocycle.hpp"
#include "conleybif/errors.hpp"
#include "conleybif/transition.hpp"

#include <algorithm>
#include <array>
#include <random>

using namespace conleybif;

namespace {

NoisePath ones(int radius = 32) { return sample_path(NoiseModel::constant(1.0), radius, 1); }

std::vector<BoxId> ids_over(const BoxGrid &g, double lo, double hi) {
  return g.covering(box1(lo + 1e-9, hi - 1e-9));
}

}  // namespace

// =============================================================================
// Grids
// =============================================================================

TEST_CASE("grid counts follow the ceiling rule") {
  BoxGrid g = build_grid(box1(-1, 1), 0.05);
  CHECK(g.size() == 40);
  CHECK(g.widths()[0] == doctest::Approx(0.05));
  BoxGrid h = build_grid(box1(-1, 1), 0.03);
  CHECK(h.size() == 67);
  CHECK(h.widths()[0] == doctest::Approx(2.0 / 67.0));
  CHECK(h.widths()[0] <= 0.03);
}

TEST_CASE("small domains still get four boxes") {
  CHECK(build_grid(box1(0, 0.1), 0.05).size() == 4);
}

TEST_CASE("degenerate grids are configuration errors") {
  CHECK_THROWS_AS(build_grid(box1(0, 0), 0.05), ConfigError);
  CHECK_THROWS_AS(build_grid(box1(-1, 1), -1.0), ConfigError);
  CHECK_THROWS_AS(build_grid(box1(-1, 1), 0.0), ConfigError);
}

TEST_CASE("subdivision scales counts and widths") {
  BoxGrid g = build_grid(box1(-1, 1), 0.05);
  CHECK(subdivide(g, 2).size() == 80);
  CHECK(subdivide(g, 5).widths()[0] == doctest::Approx(0.01));
  CHECK_THROWS_AS(subdivide(g, 1), UsageError);
}

TEST_CASE("locate, box and ids agree") {
  BoxGrid g = build_grid(box1(-1, 1), 0.05);
  for (BoxId id = 0; id < g.size(); ++id) {
    CHECK(g.locate(g.box(id).center()) == id);
    CHECK(g.id_of(g.multi_index(id)) == id);
  }
  CHECK(g.locate(point1(1.5)) == -1);
  CHECK(g.locate(point1(1.0)) == 39);
}

TEST_CASE("face ties count as intersections") {
  BoxGrid g = build_grid(box1(-1, 1), 0.5);
  CHECK(g.intersecting(box1(0.0, 0.0)) == std::vector<BoxId>{1, 2});
  CHECK(g.covering(box1(0.1, 0.2)) == std::vector<BoxId>{2});
}

TEST_CASE("two dimensional grids linearize with x fastest") {
  BoxGrid g(Box(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)), Eigen::Vector2i(4, 5));
  CHECK(g.size() == 20);
  CHECK(g.id_of(Eigen::Vector2i(1, 2)) == 9);
  CHECK(g.neighbors(g.id_of(Eigen::Vector2i(1, 2))).size() == 8u);
  CHECK(g.neighbors(0).size() == 3u);
  CHECK(g.touches_boundary(0));
  CHECK_FALSE(g.touches_boundary(g.id_of(Eigen::Vector2i(1, 2))));
}

// =============================================================================
// Box sets
// =============================================================================

TEST_CASE("interior of the full grid drops the boundary boxes") {
  BoxGrid g = build_grid(box1(-1, 1), 0.05);
  RandomBoxSet in = combinatorial_interior(RandomBoxSet::full(g, 0, 2));
  for (int k = 0; k <= 2; ++k) {
    CHECK(in.fiber(k).size() == 38u);
    CHECK_FALSE(in.contains(k, 0));
    CHECK_FALSE(in.contains(k, 39));
  }
}

TEST_CASE("interior of a single box is empty") {
  BoxGrid g = build_grid(box1(-1, 1), 0.05);
  CHECK(combinatorial_interior(RandomBoxSet::constant(g, 0, 0, {17})).empty());
}

TEST_CASE("interior of [-0.5, 0.5] is [-0.45, 0.45]") {
  BoxGrid g = build_grid(box1(-1, 1), 0.05);
  RandomBoxSet n = RandomBoxSet::constant(g, 0, 0, ids_over(g, -0.5, 0.5));
  RandomBoxSet in = combinatorial_interior(n);
  CHECK(in.fiber(0) == ids_over(g, -0.45, 0.45));
}

TEST_CASE("set algebra is fiberwise") {
  BoxGrid g = build_grid(box1(-1, 1), 0.25);
  RandomBoxSet a = RandomBoxSet::constant(g, 0, 1, {1, 2, 3});
  RandomBoxSet b(g, 0, 1);
  b.set_fiber(0, {3, 4});
  b.set_fiber(1, {2});
  CHECK(unite(a, b).fiber(0) == std::vector<BoxId>{1, 2, 3, 4});
  CHECK(intersect(a, b).fiber(1) == std::vector<BoxId>{2});
  CHECK(subtract(a, b).fiber(0) == std::vector<BoxId>{1, 2});
  CHECK(subset_of(intersect(a, b), a, 0, 1));
  CHECK_FALSE(subset_of(a, b, 0, 1));
  CHECK(project(b, 0, 1) == std::vector<BoxId>{2, 3, 4});
  CHECK(dilate(RandomBoxSet::constant(g, 0, 0, {0}), 2).fiber(0) == std::vector<BoxId>{0, 1, 2});
}

TEST_CASE("refinement doubles each box") {
  BoxGrid g = build_grid(box1(-1, 1), 0.25);
  RandomBoxSet r = refine(RandomBoxSet::constant(g, 0, 0, {2, 5}), 2);
  CHECK(r.fiber(0) == std::vector<BoxId>{4, 5, 10, 11});
  CHECK(volume(r, 0, 0) == doctest::Approx(0.5));
}

TEST_CASE("property: erosion then dilation keeps the set minus its boundary layer") {
  BoxGrid g = build_grid(box1(-1, 1), 0.05);
  std::mt19937_64 gen(5);
  std::bernoulli_distribution coin(0.7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<BoxId> ids;
    for (BoxId id = 0; id < g.size(); ++id)
      if (coin(gen)) ids.push_back(id);
    RandomBoxSet n = RandomBoxSet::constant(g, 0, 0, ids);
    RandomBoxSet in = combinatorial_interior(n);
    RandomBoxSet lhs = intersect(dilate(in, 1), n);
    // Boundary layer: boxes of N at distance 1 from the complement or the domain edge
    // that have no interior neighbor.
    std::vector<BoxId> expect;
    for (BoxId id : ids) {
      bool near_interior = in.contains(0, id);
      for (BoxId nb : g.neighbors(id)) near_interior = near_interior || in.contains(0, nb);
      if (near_interior) expect.push_back(id);
    }
    CHECK(lhs.fiber(0) == expect);
    CHECK(subset_of(in, lhs, 0, 0));
  }
}

// =============================================================================
// Enclosures
// =============================================================================

TEST_CASE("natural interval extension on the right branch") {
  SystemDef sys = make_example1(-0.09, NoiseModel::constant(1.0));
  auto e = enclose_image(sys, ones(), 0, box1(-0.35, -0.30));
  REQUIRE(e);
  CHECK(e->lo[0] <= -0.3175);
  CHECK(e->hi[0] >= -0.30);
  CHECK(e->lo[0] >= -0.35 - 1e-12);
  CHECK(e->hi[0] <= -0.2675 + 1e-12);
}

TEST_CASE("point boxes enclose their image") {
  SystemDef ex1 = make_example1(-0.09, NoiseModel::constant(1.0));
  SystemDef pf = make_pitchfork(0.5, NoiseModel::constant(0.0));
  NoisePath z = sample_path(NoiseModel::constant(0.0), 32, 1);
  for (double x : {-0.9, -0.5, -0.3, 0.0, 0.42, 0.99}) {
    auto e = enclose_image(ex1, ones(), 0, box1(x, x));
    REQUIRE(e);
    CHECK(e->contains(time_one_map(ex1, ones(), 0, point1(x))));
    auto f = enclose_image(pf, z, 0, box1(x, x));
    REQUIRE(f);
    CHECK(f->contains(time_one_map(pf, z, 0, point1(x))));
  }
}

TEST_CASE("the jump is not bridged") {
  SystemDef sys = make_example1(-0.09, NoiseModel::constant(1.0));
  auto pieces = enclose_pieces(sys, ones(), 0, box1(-0.55, -0.45));
  REQUIRE(pieces);
  CHECK(pieces->size() == 2u);
  for (const Box &b : *pieces) CHECK_FALSE(b.contains(point1(0.0)));
}

TEST_CASE("escaping boxes are flagged") {
  SystemDef sys = make_example1(0.1, NoiseModel::constant(1.0));
  auto e = enclose_image(sys, ones(), 0, box1(0.9, 0.95));
  REQUIRE(e);
  CHECK(e->lo[0] > 1.0);
  BoxGrid g = build_grid(sys.domain, 0.05);
  RandomBoxSet n = RandomBoxSet::constant(g, 0, 1, g.covering(box1(0.9 + 1e-9, 0.95 - 1e-9)));
  FiberedTransitionGraph gr = build_transition_graph(sys, ones(), n);
  REQUIRE(gr.sources(0).size() == 1u);
  CHECK(gr.sources(0)[0].escape);
  CHECK(gr.sources(0)[0].successors.empty());
}

TEST_CASE("property: enclosures contain sampled images") {
  std::vector<SystemDef> systems = {
      make_example1(-0.09, NoiseModel::uniform(0.5, 1.5)),
      make_pitchfork(0.5, NoiseModel::uniform(-1, 1), box1(-1.2, 1.2), 0.05),
      make_subcritical(-0.3, NoiseModel::uniform(-1, 1), box1(-1, 1), 0.05),
      make_identity(box1(-1, 1)),
  };
  std::mt19937_64 gen(11);
  for (const SystemDef &sys : systems) {
    NoisePath p = sample_path(sys.noise, 32, 3);
    std::uniform_real_distribution<double> c(sys.domain.lo[0], sys.domain.hi[0]);
    std::uniform_real_distribution<double> w(0.0, 0.1), t(0.0, 1.0);
    std::uniform_int_distribution<int> fib(-30, 30);
    int missed = 0, checked = 0;
    for (int i = 0; i < 2000; ++i) {
      const double lo = c(gen);
      const double hi = std::min(lo + w(gen), sys.domain.hi[0]);
      const int k = fib(gen);
      const double x = lo + t(gen) * (hi - lo);
      auto pieces = enclose_pieces(sys, p, k, box1(lo, hi));
      Point y;
      try {
        y = time_one_map(sys, p, k, point1(x));
      } catch (const DivergenceError &) {
        continue;
      }
      ++checked;
      if (!pieces) continue;
      bool in = false;
      for (const Box &b : *pieces) in = in || b.contains(y);
      if (!in) ++missed;
    }
    INFO(sys.family_id);
    CHECK(missed == 0);
    CHECK(checked > 1000);
  }
}

TEST_CASE("property: enclosures are monotone in the box") {
  SystemDef sys = make_example1(-0.09, NoiseModel::constant(1.0));
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 500; ++i) {
    double a = u(gen), b = u(gen), c = u(gen), d = u(gen);
    std::array<double, 4> v{a, b, c, d};
    std::sort(v.begin(), v.end());
    auto inner = enclose_image(sys, ones(), 0, box1(v[1], v[2]));
    auto outer = enclose_image(sys, ones(), 0, box1(v[0], v[3]));
    REQUIRE(inner);
    REQUIRE(outer);
    CHECK(outer->contains(*inner));
  }
}

// =============================================================================
// Transition graph
// =============================================================================

TEST_CASE("identity map boxes reach themselves and their face neighbors") {
  SystemDef sys = make_identity(box1(-1, 1));
  BoxGrid g = build_grid(sys.domain, 0.25);
  FiberedTransitionGraph gr = build_transition_graph(sys, ones(), RandomBoxSet::full(g, 0, 1));
  for (const TransitionNode &n : gr.sources(0)) {
    CHECK(std::find(n.successors.begin(), n.successors.end(), n.id) != n.successors.end());
    for (BoxId s : n.successors) CHECK(std::abs(s - n.id) <= 1);
  }
}

TEST_CASE("the attracting fixed point box maps to itself") {
  SystemDef sys = make_example1(-0.09, NoiseModel::constant(1.0));
  BoxGrid g = build_grid(sys.domain, 0.05);
  FiberedTransitionGraph gr = build_transition_graph(sys, ones(), RandomBoxSet::full(g, 0, 1));
  const BoxId b = g.locate(point1(-0.3));
  const TransitionNode *n = gr.node(0, b);
  REQUIRE(n);
  CHECK(std::find(n->successors.begin(), n->successors.end(), b) != n->successors.end());
}

TEST_CASE("every box escapes within 40 steps for positive lambda") {
  SystemDef sys = make_example1(0.1, NoiseModel::constant(1.0));
  BoxGrid g = build_grid(sys.domain, 0.05);
  FiberedTransitionGraph gr = build_transition_graph(sys, ones(), RandomBoxSet::full(g, -20, 21));
  std::vector<BoxId> alive;
  for (BoxId id = 0; id < g.size(); ++id) alive.push_back(id);
  int k = -20;
  for (; k < 21 && !alive.empty(); ++k) {
    std::vector<BoxId> next;
    for (BoxId id : alive) {
      const TransitionNode *n = gr.node(k, id);
      REQUIRE(n);
      next.insert(next.end(), n->successors.begin(), n->successors.end());
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    alive = std::move(next);
  }
  CHECK(alive.empty());
  CHECK(k - (-20) <= 40);
}

TEST_CASE("property: successors cover sampled images") {
  SystemDef sys = make_example1(-0.2, NoiseModel::uniform(0.5, 1.5));
  NoisePath p = sample_path(sys.noise, 32, 21);
  BoxGrid g = build_grid(sys.domain, 0.05);
  FiberedTransitionGraph gr = build_transition_graph(sys, p, RandomBoxSet::full(g, -8, 8));
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<int> fib(-8, 7);
  for (int i = 0; i < 2000; ++i) {
    const double x = u(gen);
    const int k = fib(gen);
    const Point y = time_one_map(sys, p, k, point1(x));
    const TransitionNode *n = gr.node(k, g.locate(point1(x)));
    REQUIRE(n);
    const BoxId target = g.locate(y);
    if (target < 0) {
      CHECK(n->leaves_domain);
      continue;
    }
    CHECK(std::binary_search(n->successors.begin(), n->successors.end(), target));
  }
}

TEST_CASE("property: graph is independent of the thread count") {
  SystemDef sys = make_pitchfork(0.5, NoiseModel::uniform(-1, 1), box1(-1.2, 1.2), 0.05);
  NoisePath p = sample_path(sys.noise, 16, 4);
  RandomBoxSet n = RandomBoxSet::full(build_grid(sys.domain, 0.05), -6, 6);
  FiberedTransitionGraph one = build_transition_graph(sys, p, n, 1);
  CHECK(one == build_transition_graph(sys, p, n, 3));
  CHECK(one == build_transition_graph(sys, p, n, 8));
}
