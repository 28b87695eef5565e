// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "../unit/oracles.hpp"
#include "patrol/engine.hpp"
#include "patrol/network.hpp"
#include "patrol/planner.hpp"
#include "patrol/shared_knowledge.hpp"
#include "patrol/terrain.hpp"
#include "patrol/worlds.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

using namespace patrol;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s %2d %s: %s; %.2f s (budget %.0f s)%s\n", pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs,
              budget_s, in_time ? "" : " over budget");
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

oracle::P3 p3(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

IdlenessVector random_vector(Rng& rng, std::size_t n) {
  std::vector<double> last(n), w(n);
  for (auto& x : last) x = static_cast<double>(rng.index(200)) * 0.25;
  for (auto& x : w) x = 1.0 + static_cast<double>(rng.index(3));
  return IdlenessVector(0, last, w);
}

// Five 20 x 20 synthetic maps: jittered ground, a few walls, 1-3 teammate trails.
struct SyntheticMap {
  TerrainMap map;
  Vec3 self;
  std::vector<FutureTrail> trails;
};

std::vector<SyntheticMap> synthetic_maps(const Params& p) {
  std::vector<SyntheticMap> out;
  for (int m = 0; m < 5; ++m) {
    Rng rng(500 + m);
    std::vector<Vec3> pts;
    std::vector<Label> labels;
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) {
        pts.emplace_back(0.25 * i + 0.05 * rng.uniform(), 0.25 * j + 0.05 * rng.uniform(), 0.03 * rng.uniform());
        labels.push_back(rng.index(80) == 0 ? Label::wall : Label::terrain);
      }
    TerrainMap map(pts, labels, p.eps_nbhd);
    const Vec3 self(1.5 + 2 * rng.uniform(), 1.5 + 2 * rng.uniform(), 0);
    std::vector<FutureTrail> trails;
    for (int k = 0, n = 1 + static_cast<int>(rng.index(3)); k < n; ++k) {
      const Vec3 a(5 * rng.uniform(), 5 * rng.uniform(), 0), b(5 * rng.uniform(), 5 * rng.uniform(), 0);
      trails.push_back(future_trail(k + 1, a, std::vector<Vec3>{a, b}, p.R_c, p.R_b));
    }
    out.push_back({std::move(map), self, std::move(trails)});
  }
  return out;
}

// Brute-force exclusion set: pairwise distances to walls and near trails.
std::vector<std::uint32_t> brute_kept(const SyntheticMap& s, const std::vector<FutureTrail>& trails, const Params& p) {
  std::vector<std::uint32_t> kept;
  for (std::size_t i = 0; i < s.map.size(); ++i) {
    if (s.map.label(i) == Label::wall) continue;
    double c = kInf;
    for (std::size_t j = 0; j < s.map.size(); ++j)
      if (s.map.label(j) == Label::wall) c = std::min(c, oracle::dist(p3(s.map.point(i)), p3(s.map.point(j))));
    for (const auto& t : trails) {
      bool near = false;
      for (const auto& b : t.centers) near = near || oracle::dist(p3(b), p3(s.self)) <= p.R_t + t.radius;
      if (!near) continue;
      for (const auto& b : t.centers)
        c = std::min(c, std::max(0.0, oracle::dist(p3(s.map.point(i)), p3(b)) - t.radius));
    }
    if (c > p.exclusion_radius()) kept.push_back(static_cast<std::uint32_t>(i));
  }
  return kept;
}

Scenario world_scenario(const World& w, std::vector<Vec3> robots, Strategy s, std::uint64_t seed, double duration) {
  Scenario sc;
  sc.name = w.name;
  sc.map = w.map;
  sc.graph = w.graph;
  sc.robots = std::move(robots);
  sc.strategy = s;
  sc.seed = seed;
  sc.duration_s = duration;
  prepare_scenario(sc);
  return sc;
}

}  // namespace

int main() {
  const Params params;

  criterion(1, "idleness semilattice", 1.0, [] {
    Rng rng(1);
    int bad = 0;
    for (int k = 0; k < 1000; ++k) {
      const auto a = random_vector(rng, 50), b = random_vector(rng, 50), c = random_vector(rng, 50);
      const bool comm = synchronize_idleness(a, b).last_visits() == synchronize_idleness(b, a).last_visits();
      const bool assoc = synchronize_idleness(synchronize_idleness(a, b), c).last_visits() ==
                         synchronize_idleness(a, synchronize_idleness(b, c)).last_visits();
      const bool idem = synchronize_idleness(a, a).last_visits() == a.last_visits();
      bad += !(comm && assoc && idem);
    }
    return Outcome{bad == 0, fmt("%d/1000 pairs violate a law", bad)};
  });

  criterion(2, "conflict antisymmetry", 1.0, [] {
    Rng rng(2);
    int bad = 0;
    for (int k = 0; k < 10000; ++k) {
      const auto a = static_cast<RobotId>(rng.index(8));
      auto b = static_cast<RobotId>(rng.index(8));
      if (b == a) b = (a + 1) % 8;
      auto cost = [&] {
        const auto r = rng.index(10);
        return r == 0 ? kInf : r < 4 ? static_cast<double>(rng.index(4)) : 20.0 * rng.uniform();
      };
      const double ca = cost(), cb = cost();
      TeamModel ma(a, 8), mb(b, 8);
      ma.entry(b).goal = 5;
      ma.entry(b).travel_cost = cb;
      mb.entry(a).goal = 5;
      mb.entry(a).travel_cost = ca;
      const bool ya = detect_node_conflict(a, 5, ca, ma).conflict;
      const bool yb = detect_node_conflict(b, 5, cb, mb).conflict;
      bad += ya == yb;
    }
    return Outcome{bad == 0, fmt("%d/10000 pairs without exactly one detector", bad)};
  });

  criterion(3, "cost formulas vs oracle", 1.0, [] {
    Rng rng(3);
    double worst = 0.0;
    auto rel = [](double x, double y) { return std::abs(x - y) / std::max(std::abs(y), 1e-300); };
    for (int k = 0; k < 1000; ++k) {
      const double wl = 1 + rng.uniform(), c = rng.uniform(), d = rng.uniform(), r = rng.uniform();
      worst = std::max(worst, rel(traversability_cost(wl, c, d, r), oracle::trav(wl, c, d, r)));
      const Vec3 f(5 * rng.uniform(), 5 * rng.uniform(), rng.uniform());
      const Vec3 t(5 * rng.uniform(), 5 * rng.uniform(), rng.uniform());
      const Vec3 g(20 * rng.uniform(), 20 * rng.uniform(), rng.uniform());
      const double tmin = 1 + rng.uniform(), tmax = tmin + 10 * rng.uniform();
      const double tr = tmin + (tmax - tmin) * rng.uniform();
      const double lz = 3 * rng.uniform(), lt = 2 * rng.uniform(), w2 = 1 + rng.uniform();
      worst = std::max(worst, rel(mixed_step_cost(f, t, g, tr, tmin, tmax, lz, lt, 1e-6, w2),
                                  oracle::step_cost(p3(f), p3(t), p3(g), tr, tmin, tmax, lz, lt, 1e-6, w2)));
    }
    return Outcome{worst <= 1e-12, fmt("worst relative error %.3g (tolerance 1e-12)", worst)};
  });

  const auto maps = synthetic_maps(params);

  criterion(4, "traversable map exclusion soundness", 10.0, [&] {
    int equal = 0;
    std::size_t kept = 0, by_trails = 0;
    for (const auto& s : maps) {
      const auto tm = build_traversable_map(s.map, s.trails, s.self, params);
      equal += tm.indices() == brute_kept(s, s.trails, params);
      kept += tm.size();
      by_trails += brute_kept(s, {}, params).size() - tm.size();
    }
    return Outcome{equal == 5, fmt("%d/5 maps match the brute-force set (%zu of 2000 points kept, %zu excluded by trails)",
                                   equal, kept, by_trails)};
  });

  criterion(5, "trail locality", 5.0, [&] {
    int equal = 0, affected = 0;
    for (const auto& s : maps) {
      // move every trail so that none is within R_t of the robot
      std::vector<FutureTrail> far = s.trails;
      for (auto& t : far)
        for (auto& c : t.centers) c += Vec3(50, 50, 0);
      const auto alone = build_traversable_map(s.map, {}, s.self, params);
      const auto moved = build_traversable_map(s.map, far, s.self, params);
      const auto near = build_traversable_map(s.map, s.trails, s.self, params);
      equal += alone.indices() == moved.indices();
      affected += near.indices() != alone.indices();
    }
    return Outcome{equal == 5, fmt("%d/5 maps unchanged (%d/5 were changed by the trails before moving)", equal, affected)};
  });

  criterion(6, "planner completeness on a flat 20 x 20 m map", 60.0, [&] {
    const TerrainMap map = flat_grid_map(41, 41, 0.5);
    Rng pick(6);
    int ok = 0, short_enough = 0;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Vec3 a = map.point(pick.index(map.size())), b = map.point(pick.index(map.size()));
      Rng rng = Rng::derive(6, static_cast<std::uint64_t>(i), 0);
      const ClearanceContext ctx(map, {}, a, params.R_t);
      MapProvider provider = [&](const OrientedBox* box) { return build_traversable_region(map, ctx, params, box); };
      const auto r = windowed_search(a, b, provider, params, rng, params.R_v, params.window_attempts);
      if (!r.path) continue;
      ++ok;
      const double e = distance(a, b);
      const double len = r.path->length();
      const bool fine = len <= 1.5 * e + 1e-9;
      short_enough += fine;
      if (e > 0.0) worst = std::max(worst, len / e);
    }
    return Outcome{ok >= 99 && short_enough == ok,
                   fmt("%d/100 succeeded, %d within 1.5x Euclidean, worst ratio %.3f", ok, short_enough, worst)};
  });

  criterion(7, "deadlock reproduction on three ways", 300.0, [&] {
    const World w = three_ways_world(params);
    int dl[2] = {0, 0};
    const Strategy strategies[2] = {Strategy::CwMC, Strategy::CC};
    for (int s = 0; s < 2; ++s)
      for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Scenario sc;
        sc.name = w.name;
        sc.map = w.map;
        sc.graph = w.graph;
        sc.robots = w.starts;
        sc.waypoint_cycles = w.cycles;
        sc.strategy = strategies[s];
        sc.seed = seed;
        sc.duration_s = 600.0;
        prepare_scenario(sc);
        Simulation sim(sc);
        dl[s] += sim.run().deadlock;
      }
    return Outcome{dl[0] >= 8 && dl[1] == 0,
                   fmt("without trails %d/10 deadlocked (need >= 8), with trails %d/10 (need 0)", dl[0], dl[1])};
  });

  criterion(8, "CC vs NoCC on the crossroad", 600.0, [&] {
    const World w = crossroad_world(params);
    int idl_better = 0, itf_better = 0;
    std::string cells;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const std::vector<Vec3> robots{w.starts[0], w.starts[1]};
      const auto cc = summarize(run_scenario(world_scenario(w, robots, Strategy::CC, seed, 1800.0), Strategy::CC, seed).rows);
      const auto no =
          summarize(run_scenario(world_scenario(w, robots, Strategy::NoCC, seed, 1800.0), Strategy::NoCC, seed).rows);
      idl_better += cc.mean_avg_idl <= no.mean_avg_idl;
      itf_better += cc.interference_total < no.interference_total;
      cells += fmt(" [%.1f/%.1f %zu/%zu]", cc.mean_avg_idl, no.mean_avg_idl, cc.interference_total,
                   no.interference_total);
    }
    return Outcome{idl_better >= 4 && itf_better >= 4,
                   fmt("idleness CC <= NoCC in %d/5, interference CC < NoCC in %d/5;", idl_better, itf_better) +
                       cells};
  });

  criterion(9, "Bernoulli link statistics", 1.0, [] {
    const LinkModel link(2, 0.5, 0.2);
    InFlightQueue queue;
    Rng rng(9);
    std::size_t delivered = 0;
    for (int k = 0; k < 10000; ++k) {
      delivered += broadcast(link, queue, Message::visited(0, 0.0, 1), 0.0, rng);
      queue.drain(1.0);
    }
    const double frac = static_cast<double>(delivered) / 10000.0;
    return Outcome{frac >= 0.48 && frac <= 0.52, fmt("delivered fraction %.4f (need [0.48, 0.52])", frac)};
  });

  criterion(10, "end-to-end determinism", 60.0, [&] {
    const World w = crossroad_world(params);
    auto csv = [&] {
      Scenario sc = world_scenario(w, w.starts, Strategy::CC, 10, 300.0);
      sc.link_prob = 0.8;
      Simulation sim(sc);
      std::ostringstream out;
      write_csv(out, sim.run().rows);
      return out.str();
    };
    const auto a = csv(), b = csv();
    return Outcome{a == b && !a.empty(), fmt("two runs, %zu bytes each, %s", a.size(), a == b ? "identical" : "differ")};
  });

  criterion(11, "visit bookkeeping", 30.0, [&] {
    const double L = 5.0;
    const World w = line_world(L, params);
    const double tick = 0.1;
    // the robot enters each ball R_v before its centre, so a leg is L - 2 R_v long
    const double period = 2.0 * (L - 2.0 * params.R_v) / params.v_max;
    double worst = 0.0;
    int checked = 0;
    for (double weight : {1.0, 2.0}) {
      PatrollingGraph g;
      for (const auto& n : w.graph->nodes()) g.add_node({n.id, n.position, weight, n.visit_radius});
      for (const auto& e : w.graph->edges()) g.add_edge(e.i, e.j, e.travel_cost);
      World weighted = w;
      weighted.graph = std::make_shared<PatrollingGraph>(std::move(g));
      Scenario sc = world_scenario(weighted, w.starts, Strategy::CC, 11, 400.0);
      Simulation sim(sc);
      const auto& m = sim.run();
      std::vector<double> last(2, -1.0);
      for (const auto& v : m.visits) {
        const auto k = static_cast<std::size_t>(v.node);
        if (last[k] >= 0.0) {
          worst = std::max(worst, std::abs((v.t - last[k]) - period));
          worst = std::max(worst, std::abs(v.idleness - weight * period) / weight);
          ++checked;
        }
        last[k] = v.t;
      }
    }
    return Outcome{checked >= 10 && worst <= 2 * tick + 1e-9,
                   fmt("%d periods, worst deviation %.3f s from %.1f s (tolerance %.1f s)", checked, worst, period,
                       2 * tick)};
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
