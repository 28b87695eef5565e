#include "patrol/network.hpp"
#include "patrol/rng.hpp"
#include "patrol/shared_knowledge.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace patrol;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PatrollingGraph line_graph(int n) {
  PatrollingGraph g;
  for (int i = 0; i < n; ++i) g.add_node({i, Vec3(2.0 * i, 0, 0)});
  for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1, 2.0);
  return g;
}

// Vector whose idlenesses at time t equal `idl`.
IdlenessVector from_idleness(RobotId owner, const std::vector<double>& idl, double t) {
  std::vector<double> last;
  for (double v : idl) last.push_back(t - v);
  return IdlenessVector(owner, last, std::vector<double>(idl.size(), 1.0));
}

IdlenessVector random_vector(Rng& rng, std::size_t n) {
  std::vector<double> last(n), w(n, 1.0);
  // coarse values make exact ties frequent
  for (auto& x : last) x = static_cast<double>(rng.index(40)) * 0.5;
  return IdlenessVector(0, last, w);
}

}  // namespace

TEST_CASE("synchronize idleness examples") {
  const double t = 20.0;
  const auto out = synchronize_idleness(from_idleness(0, {5, 10, 3}, t), from_idleness(1, {7, 2, 3}, t));
  CHECK(out.idlenesses(t) == std::vector<double>{5, 2, 3});
  CHECK(out.owner() == 0);

  const auto same = from_idleness(0, {5, 10, 3}, t);
  CHECK(synchronize_idleness(same, same) == same);

  const auto zero = synchronize_idleness(from_idleness(0, {0, 0}, t), from_idleness(1, {9, 9}, t));
  CHECK(zero.idlenesses(t) == std::vector<double>{0, 0});

  CHECK_THROWS_AS(synchronize_idleness(from_idleness(0, {1, 2}, t), from_idleness(1, {1}, t)),
                  std::invalid_argument);
}

TEST_CASE("synchronize idleness is a join semilattice") {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_vector(rng, 50), b = random_vector(rng, 50), c = random_vector(rng, 50);
    CHECK(synchronize_idleness(a, b).last_visits() == synchronize_idleness(b, a).last_visits());
    CHECK(synchronize_idleness(synchronize_idleness(a, b), c) == synchronize_idleness(a, synchronize_idleness(b, c)));
    CHECK(synchronize_idleness(a, a) == a);
  }
}

TEST_CASE("one lossless all-to-all idleness round equalizes every robot") {
  Rng rng(4);
  const std::size_t robots = 5, n = 12;
  std::vector<IdlenessVector> v;
  for (std::size_t r = 0; r < robots; ++r) v.push_back(random_vector(rng, n));
  std::vector<IdlenessVector> after = v;
  for (std::size_t r = 0; r < robots; ++r)
    for (std::size_t s = 0; s < robots; ++s)
      if (s != r) after[r] = synchronize_idleness(after[r], v[s]);
  for (std::size_t r = 1; r < robots; ++r) CHECK(after[r].last_visits() == after[0].last_visits());
  // and equals the elementwise minimum idleness
  for (std::size_t k = 0; k < n; ++k) {
    double best = -kInf;
    for (const auto& x : v) best = std::max(best, x.last_visits()[k]);
    CHECK(after[0].last_visits()[k] == best);
  }
}

TEST_CASE("idleness estimates are clamped at zero") {
  IdlenessVector v(0, std::vector<double>{10.0}, std::vector<double>{2.0});
  CHECK(v.idleness(0, 5.0) == 0.0);
  CHECK(v.idleness(0, 12.0) == 4.0);
  v.mark_visited(0, 8.0);  // never moves a visit back
  CHECK(v.last_visits()[0] == 10.0);
}

TEST_CASE("message application follows the broadcast table") {
  const auto g = line_graph(6);
  SharedKnowledge k(0, 3, g, 0.0);

  SUBCASE("planned") {
    CHECK(k.apply(Message::planned(1, 9.0, 4), 10.0, g));
    const auto& e = k.team.entry(1);
    CHECK(e.goal == 4);
    CHECK(e.travel_cost == kInf);
    CHECK(e.timestamp == 9.0);
    CHECK_FALSE(e.path.has_value());
  }
  SUBCASE("aborted after selected resets the entry") {
    k.apply(Message::selected(1, 1.0, 4, 3.0), 1.0, g);
    CHECK(k.team.entry(1).goal == 4);
    CHECK(k.team.entry(1).travel_cost == 3.0);
    k.apply(Message::aborted(1, 2.0, 4), 2.0, g);
    CHECK_FALSE(k.team.entry(1).goal.has_value());
    CHECK_FALSE(k.team.entry(1).travel_cost.has_value());
  }
  SUBCASE("visited zeroes the node and leaves the team model alone") {
    k.apply(Message::selected(1, 1.0, 4, 3.0), 1.0, g);
    k.apply(Message::visited(2, 30.0, 2), 30.0, g);
    CHECK(k.idleness.idleness(2, 30.0) == 0.0);
    CHECK(k.idleness.idleness(1, 30.0) == 30.0);
    CHECK(k.team.entry(1).goal == 4);
    CHECK_FALSE(k.team.entry(2).goal.has_value());
  }
  SUBCASE("reached zeroes the node and clears the sender's goal") {
    k.apply(Message::selected(1, 1.0, 4, 3.0), 1.0, g);
    k.apply(Message::reached(1, 7.0, 4), 7.0, g);
    CHECK(k.idleness.idleness(4, 7.0) == 0.0);
    CHECK_FALSE(k.team.entry(1).goal.has_value());
  }
  SUBCASE("path updates the trail store and the goal tuple") {
    k.apply(Message::selected(1, 1.0, 4, 3.0), 1.0, g);
    k.apply(Message::path_update(1, 2.0, {Vec3(0, 0, 0), Vec3(1, 0, 0)}, 1.0), 2.0, g);
    REQUIRE(k.trails[1].has_value());
    CHECK(k.trails[1]->waypoints.size() == 2);
    CHECK(k.team.entry(1).path.has_value());
    CHECK(k.team.entry(1).travel_cost == 1.0);
    CHECK(k.traversability_dirty);
    // a position beacon only moves the trail
    k.apply(Message::path_update(1, 3.0, {Vec3(1, 0, 0)}, 0.0), 3.0, g);
    CHECK(k.trails[1]->waypoints.size() == 1);
    CHECK(k.team.entry(1).travel_cost == 1.0);
  }
  SUBCASE("idleness message merges") {
    k.apply(Message::idleness_update(1, 5.0, {5, 0, 0, 4, 0, 0}), 5.0, g);
    CHECK(k.idleness.idleness(0, 5.0) == 0.0);
    CHECK(k.idleness.idleness(3, 5.0) == 1.0);
    CHECK(k.idleness.idleness(1, 5.0) == 5.0);
  }
  SUBCASE("stale and unknown-node messages are dropped") {
    k.apply(Message::selected(1, 5.0, 4, 3.0), 5.0, g);
    CHECK_FALSE(k.apply(Message::aborted(1, 4.0, 4), 6.0, g));
    CHECK(k.team.entry(1).goal == 4);
    CHECK_FALSE(k.apply(Message::visited(1, 6.0, 99), 6.0, g));
    CHECK(k.dropped_messages == 2);
  }
  CHECK_THROWS_AS(k.apply(Message::visited(0, 1.0, 1), 1.0, g), std::invalid_argument);
}

TEST_CASE("applying messages never increases an idleness estimate") {
  const auto g = line_graph(8);
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    SharedKnowledge k(0, 4, g, 0.0);
    double t = 0.0;
    for (int m = 0; m < 40; ++m) {
      t += 0.1 * static_cast<double>(rng.index(20));
      const auto before = k.idleness.idlenesses(t);
      const RobotId from = 1 + static_cast<RobotId>(rng.index(3));
      const NodeId n = static_cast<NodeId>(rng.index(8));
      Message msg;
      switch (rng.index(6)) {
        case 0: msg = Message::visited(from, t, n); break;
        case 1: msg = Message::reached(from, t, n); break;
        case 2: msg = Message::selected(from, t, n, 10 * rng.uniform()); break;
        case 3: msg = Message::planned(from, t, n); break;
        case 4: msg = Message::aborted(from, t, n); break;
        default: {
          std::vector<double> lv(8);
          for (auto& x : lv) x = t * rng.uniform();
          msg = Message::idleness_update(from, t, lv);
        }
      }
      k.apply(msg, t, g);
      const auto after = k.idleness.idlenesses(t);
      for (std::size_t i = 0; i < after.size(); ++i) CHECK(after[i] <= before[i]);
    }
  }
}

TEST_CASE("team model expiry") {
  TeamModel m(0, 3);
  m.entry(1).goal = 2;
  m.entry(1).travel_cost = 1.0;
  m.entry(1).timestamp = 89.0;
  m.entry(2).goal = 3;
  m.entry(2).travel_cost = 1.0;
  m.entry(2).timestamp = 90.0;
  expire_entries(m, 100.0, 10.0);
  CHECK_FALSE(m.entry(1).goal.has_value());
  CHECK(m.entry(2).goal == 3);

  TeamModel fresh(0, 3);
  fresh.entry(1).goal = 4;
  fresh.entry(1).timestamp = 99.0;
  expire_entries(fresh, 100.0, 10.0);
  CHECK(fresh.entry(1).goal == 4);
}

TEST_CASE("node conflict examples") {
  TeamModel m(2, 3);
  m.entry(1).goal = 7;
  m.entry(1).travel_cost = 3.0;
  auto r = detect_node_conflict(2, 7, 5.0, m);
  CHECK(r.conflict);
  CHECK(r.contender == 1);
  r = detect_node_conflict(2, 7, 3.0, m);
  CHECK(r.conflict);
  CHECK(r.contender == 1);
  CHECK_FALSE(detect_node_conflict(2, 6, 5.0, m).conflict);

  TeamModel m1(1, 3);
  m1.entry(2).goal = 7;
  m1.entry(2).travel_cost = 3.0;
  CHECK_FALSE(detect_node_conflict(1, 7, 3.0, m1).conflict);
}

TEST_CASE("conflicts are antisymmetric") {
  Rng rng(13);
  for (int trial = 0; trial < 2000; ++trial) {
    const RobotId a = static_cast<RobotId>(rng.index(6));
    RobotId b = static_cast<RobotId>(rng.index(6));
    if (b == a) b = (a + 1) % 6;
    // coarse costs give frequent ties; some planned (infinite) entries
    const double ca = rng.index(10) == 0 ? kInf : static_cast<double>(rng.index(5));
    const double cb = rng.index(10) == 0 ? kInf : static_cast<double>(rng.index(5));
    TeamModel ma(a, 6), mb(b, 6);
    ma.entry(b).goal = 3;
    ma.entry(b).travel_cost = cb;
    mb.entry(a).goal = 3;
    mb.entry(a).travel_cost = ca;
    const bool ya = detect_node_conflict(a, 3, ca, ma).conflict;
    const bool yb = detect_node_conflict(b, 3, cb, mb).conflict;
    CHECK(ya != yb);
  }
}
