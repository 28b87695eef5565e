#include "oracles.hpp"
#include "patrol/planner.hpp"
#include "patrol/worlds.hpp"

#include <doctest.h>

#include <cmath>

using namespace patrol;

namespace {

oracle::P3 p3(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

struct Fixture {
  TerrainMap map;
  Params params;
  ClearanceContext ctx;

  Fixture(TerrainMap m, const Vec3& self, std::vector<FutureTrail> trails = {}, std::vector<Vec3> dyn = {})
      : map(std::move(m)), ctx(map, trails, self, params.R_t, std::move(dyn)) {}

  MapProvider provider() const {
    return [this](const OrientedBox* box) { return build_traversable_region(map, ctx, params, box); };
  }
};

std::uint32_t index_of(const TraversableMap& tm, const Vec3& p) {
  const auto i = tm.nearest(p, 1e-9);
  REQUIRE(i.has_value());
  return *i;
}

}  // namespace

TEST_CASE("mixed step cost") {
  const Vec3 a(0, 0, 0), b(0.3, 0.4, 0.1), g(3, 4, 0);
  CHECK(mixed_step_cost(a, b, g, 1, 1, 1, 2, 1, 1e-6) ==
        doctest::Approx(oracle::step_cost(p3(a), p3(b), p3(g), 1, 1, 1, 2, 1, 1e-6, 1)).epsilon(1e-12));
  Rng rng(5);
  for (int k = 0; k < 500; ++k) {
    const Vec3 f(rng.uniform(), rng.uniform(), rng.uniform()), t(rng.uniform(), rng.uniform(), rng.uniform());
    const Vec3 goal(5 * rng.uniform(), 5 * rng.uniform(), 0);
    const double tmin = 1 + rng.uniform(), tmax = tmin + 3 * rng.uniform(), tr = tmin + (tmax - tmin) * rng.uniform();
    const double w2 = 1 + rng.uniform();
    CHECK(mixed_step_cost(f, t, goal, tr, tmin, tmax, 2, 1, 1e-6, w2) ==
          doctest::Approx(oracle::step_cost(p3(f), p3(t), p3(goal), tr, tmin, tmax, 2, 1, 1e-6, w2)).epsilon(1e-12));
  }
  // the most expensive point weighs 1 + lambda_t, the cheapest 1
  const double base = mixed_step_cost(a, b, g, 1, 1, 5, 0, 1, 1e-9);
  CHECK(mixed_step_cost(a, b, g, 5, 1, 5, 0, 1, 1e-9) / base == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(mixed_step_cost(a, b, g, 5, 1, 5, 0, 0, 1e-9) == doctest::Approx(base));
  // lambda_z charges height change
  CHECK(mixed_step_cost(a, b, g, 1, 1, 1, 3, 1, 1e-6) - mixed_step_cost(a, b, g, 1, 1, 1, 0, 1, 1e-6) ==
        doctest::Approx(0.3));
}

TEST_CASE("randomized A*") {
  Fixture fx(flat_grid_map(41, 41, 0.25), Vec3(1, 1, 0));
  const auto tm = build_traversable_region(fx.map, fx.ctx, fx.params);

  SUBCASE("start inside the goal ball") {
    Rng rng(1);
    const auto path = randomized_astar(Vec3(5, 5, 0), Vec3(5.1, 5, 0), tm, fx.params, rng, 0.5);
    REQUIRE(path);
    CHECK(path->waypoints.size() == 1);
    CHECK(path->step_costs.empty());
  }
  SUBCASE("paths follow map points with bounded steps and recomputable costs") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Rng rng(seed);
      Rng pick(seed + 1000);
      const Vec3 s(1 + 8 * pick.uniform(), 1 + 8 * pick.uniform(), 0);
      const Vec3 g(1 + 8 * pick.uniform(), 1 + 8 * pick.uniform(), 0);
      SearchStats st;
      const auto path = randomized_astar(s, g, tm, fx.params, rng, fx.params.R_v, &st);
      REQUIRE(path);
      CHECK(st.expansions <= st.budget);
      const auto& W = path->waypoints;
      CHECK(oracle::dist(p3(W.back()), p3(g)) <= fx.params.R_v + 1e-12);
      CHECK(oracle::dist(p3(W.front()), p3(s)) <= 2 * fx.params.R_b);
      REQUIRE(path->step_costs.size() + 1 == W.size());
      double total = 0.0;
      for (std::size_t k = 0; k + 1 < W.size(); ++k) {
        const auto i = index_of(tm, W[k]);
        const auto j = index_of(tm, W[k + 1]);
        const double delta = std::min(tm.clearance(i), fx.params.max_step);
        CHECK(oracle::dist(p3(W[k]), p3(W[k + 1])) <= delta + 1e-12);
        const double c = oracle::step_cost(p3(W[k]), p3(W[k + 1]), p3(g), tm.trav(j), tm.trav_min(), tm.trav_max(),
                                           fx.params.lambda_z, fx.params.lambda_t, fx.params.epsilon, 1.0);
        CHECK(path->step_costs[k] == doctest::Approx(c).epsilon(1e-12));
        total += c;
      }
      CHECK(path->cost() == doctest::Approx(total));
    }
  }
  SUBCASE("same seed, same path") {
    Rng r1(9), r2(9);
    const auto a = randomized_astar(Vec3(1, 1, 0), Vec3(9, 8, 0), tm, fx.params, r1, 0.5);
    const auto b = randomized_astar(Vec3(1, 1, 0), Vec3(9, 8, 0), tm, fx.params, r2, 0.5);
    REQUIRE(a);
    REQUIRE(b);
    CHECK(a->waypoints == b->waypoints);
  }
  SUBCASE("budget exhaustion is reported") {
    Params tight = fx.params;
    tight.budget_factor = 0.05;
    Rng rng(1);
    SearchStats st;
    CHECK_FALSE(randomized_astar(Vec3(0, 0, 0), Vec3(10, 10, 0), tm, tight, rng, 0.5, &st));
    CHECK(st.budget_hit);
  }
  SUBCASE("empty map") {
    Rng rng(1);
    CHECK_FALSE(randomized_astar(Vec3(0, 0, 0), Vec3(1, 1, 0), TraversableMap{}, fx.params, rng, 0.5));
  }
}

TEST_CASE("goal inside a teammate's repelling region is unreachable") {
  const Vec3 self(1, 1, 0), mate(6, 6, 0);
  Params p;
  std::vector<FutureTrail> trails{future_trail(1, mate, {}, p.R_c, p.R_b)};
  // the teammate is far from self, so its trail only matters once it is near
  Fixture far(flat_grid_map(41, 41, 0.25), self, trails);
  Rng rng(1);
  auto r = windowed_search(self, mate, far.provider(), far.params, rng, 0.5, 4);
  CHECK(r.path.has_value());

  Fixture near(flat_grid_map(41, 41, 0.25), Vec3(5, 5.5, 0), trails);
  r = windowed_search(Vec3(5, 5.5, 0), mate, near.provider(), near.params, rng, 0.5, 4);
  CHECK_FALSE(r.path.has_value());
  CHECK(r.attempts == 4);
}

TEST_CASE("windowed search") {
  SUBCASE("straight corridor succeeds in the first window") {
    auto free = [](double, double y) { return y > 1.0 && y < 4.0; };
    Fixture fx(mask_map(free, 0, 12, 0, 5, 0.25), Vec3(1, 2.5, 0));
    Rng rng(1);
    const auto r = windowed_search(Vec3(1, 2.5, 0), Vec3(10, 2.5, 0), fx.provider(), fx.params, rng, 0.5, 4);
    REQUIRE(r.path);
    CHECK(r.attempts == 1);
    REQUIRE(r.region);
    for (const auto& w : r.path->waypoints) CHECK(r.region->contains(w));
  }
  SUBCASE("a wall across the direct line needs a wider window") {
    auto free = [](double x, double y) { return !(x > 4.5 && x < 5.5 && y > 3 && y < 7); };
    Fixture fx(mask_map(free, 0, 10, 0, 10, 0.25), Vec3(1, 5, 0));
    int ok = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Rng rng(seed);
      const auto r = windowed_search(Vec3(1, 5, 0), Vec3(9, 5, 0), fx.provider(), fx.params, rng, 0.5, 4);
      if (!r.path) continue;
      ++ok;
      CHECK(r.attempts >= 3);
      for (const auto& w : r.path->waypoints) CHECK_FALSE((w.x() > 4.5 && w.x() < 5.5 && w.y() > 3 && w.y() < 7));
    }
    CHECK(ok >= 4);
  }
  SUBCASE("a walled-in goal fails every attempt") {
    auto free = [](double x, double y) {
      const double r = std::hypot(x - 7, y - 5);
      return r < 1.0 || r > 1.75;
    };
    Fixture fx(mask_map(free, 0, 10, 0, 10, 0.25), Vec3(1, 5, 0));
    Rng rng(1);
    const auto r = windowed_search(Vec3(1, 5, 0), Vec3(7, 5, 0), fx.provider(), fx.params, rng, 0.5, 4);
    CHECK_FALSE(r.path);
    CHECK(r.attempts == 4);
  }
  SUBCASE("window geometry") {
    Params p;
    const auto b0 = search_window(Vec3(0, 0, 0), Vec3(4, 0, 0), p, 0);
    const auto b1 = search_window(Vec3(0, 0, 0), Vec3(4, 0, 0), p, 1);
    CHECK(b0.contains(Vec3(-0.9, 0.9, 0)));
    CHECK_FALSE(b0.contains(Vec3(2, 1.0, 0)));
    CHECK(b1.contains(Vec3(2, 1.8, 0)));
    CHECK_FALSE(b1.contains(Vec3(2, 1.9, 0)));
    CHECK_FALSE(b1.contains(Vec3(5.1, 0, 0)));
  }
  CHECK_THROWS(windowed_search(Vec3::Zero(), Vec3::Ones(), MapProvider{}, Params{}, *std::make_unique<Rng>(1), 0.5, 0));
}

TEST_CASE("local replanning bends around a new obstacle and keeps the global tail") {
  const TerrainMap map = flat_grid_map(49, 21, 0.25);
  Params p;
  Path global;
  for (int k = 0; k <= 40; ++k) global.waypoints.emplace_back(1 + 0.25 * k, 2.5, 0);
  global.step_costs.assign(global.waypoints.size() - 1, 1.0);
  const Vec3 pose(1, 2.5, 0);
  const std::vector<Vec3> dyn{Vec3(2.0, 2.5, 0)};
  ClearanceContext ctx(map, {}, pose, p.R_t, dyn);
  MapProvider maps = [&](const OrientedBox* box) { return build_traversable_region(map, ctx, p, box); };
  Rng rng(3);
  std::size_t progress = 0;
  const auto out = local_replan(pose, global, progress, global.waypoints.back(), 0.5, maps, p, rng);
  REQUIRE(out);
  bool deviates = false;
  for (const auto& w : out->waypoints) {
    CHECK(oracle::dist(p3(w), p3(dyn[0])) > p.exclusion_radius() - 1e-9);
    deviates = deviates || std::abs(w.y() - 2.5) > 0.2;
  }
  CHECK(deviates);
  CHECK(out->waypoints.back() == global.waypoints.back());
  CHECK(out->waypoints.size() > 20);
  const auto tail = std::vector<Vec3>(global.waypoints.end() - 20, global.waypoints.end());
  CHECK(std::vector<Vec3>(out->waypoints.end() - 20, out->waypoints.end()) == tail);
}

TEST_CASE("passed waypoints are pruned") {
  std::vector<Vec3> w{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)};
  prune_passed_waypoints(Vec3(1.5, 0, 0), w);
  REQUIRE(w.size() == 1);
  CHECK(w[0] == Vec3(2, 0, 0));
  std::vector<Vec3> v{Vec3(1, 0, 0), Vec3(2, 0, 0)};
  prune_passed_waypoints(Vec3(0, 0, 0), v);
  CHECK(v.size() == 2);
}

TEST_CASE("planner session") {
  const TerrainMap map = flat_grid_map(41, 21, 0.25);
  Params p;
  const Vec3 pose(1, 2.5, 0), goal(8, 2.5, 0);
  ClearanceContext ctx(map, {}, pose, p.R_t);
  bool blocked = true;
  MapProvider maps = [&](const OrientedBox* box) {
    return blocked ? TraversableMap{} : build_traversable_region(map, ctx, p, box);
  };

  SUBCASE("retries spaced by T_wait until the path clears") {
    Planner pl(p, Rng(1));
    pl.command(PlannerCommand::go(goal, p.R_v), 0.0);
    CHECK(pl.state() == Planner::State::initial);
    CHECK_FALSE(pl.tick(pose, 0.0, maps));
    CHECK(pl.attempts() == 1);
    CHECK_FALSE(pl.tick(pose, 0.25, maps));
    CHECK(pl.attempts() == 1);
    CHECK_FALSE(pl.tick(pose, 0.5, maps));
    CHECK(pl.attempts() == 2);
    blocked = false;
    const auto st = pl.tick(pose, 1.0, maps);
    REQUIRE(st);
    CHECK(st->kind == StatusKind::success);
    CHECK(pl.attempts() == 3);
    CHECK(pl.state() == Planner::State::tracking);
    CHECK(pl.tracking().front() == pose);
    CHECK(st->cost == doctest::Approx(polyline_length(pl.tracking())));

    // keeps replanning while tracking, then reports reaching the goal once
    const auto again = pl.tick(Vec3(1.5, 2.5, 0), 1.5, maps);
    REQUIRE(again);
    CHECK(again->kind == StatusKind::success);
    CHECK_FALSE(pl.check_reached(Vec3(5, 2.5, 0)));
    const auto done = pl.check_reached(Vec3(7.6, 2.5, 0));
    REQUIRE(done);
    CHECK(done->kind == StatusKind::reached);
    CHECK(pl.state() == Planner::State::idle);
    CHECK_FALSE(pl.check_reached(Vec3(8, 2.5, 0)));
  }
  SUBCASE("gives up after l_max attempts") {
    Planner pl(p, Rng(1));
    pl.command(PlannerCommand::go(goal, p.R_v), 0.0);
    std::optional<PlannerStatus> st;
    double t = 0.0;
    for (; t < 10.0 && !st; t += 0.1) st = pl.tick(pose, t, maps);
    REQUIRE(st);
    CHECK(st->kind == StatusKind::failure);
    CHECK(pl.attempts() == p.l_max);
    CHECK(t - 0.1 == doctest::Approx((p.l_max - 1) * p.T_wait));
    CHECK(pl.state() == Planner::State::idle);
  }
  SUBCASE("abort clears the session") {
    blocked = false;
    Planner pl(p, Rng(1));
    pl.command(PlannerCommand::go(goal, p.R_v), 0.0);
    REQUIRE(pl.tick(pose, 0.0, maps));
    pl.command(PlannerCommand::abort(), 0.1);
    CHECK(pl.state() == Planner::State::idle);
    CHECK(pl.tracking().empty());
    CHECK_FALSE(pl.tick(pose, 0.2, maps));
  }
}
