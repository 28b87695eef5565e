#pragma once

#include "patrol/agent.hpp"
#include "patrol/network.hpp"
#include "patrol/params.hpp"
#include "patrol/patrol_graph.hpp"
#include "patrol/planner.hpp"
#include "patrol/terrain.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace patrol {

struct Scenario {
  std::string name;
  std::string map_path;    // resolved against the scenario file's directory
  std::string graph_path;
  std::shared_ptr<const TerrainMap> map;
  std::shared_ptr<const PatrollingGraph> graph;
  std::vector<Vec3> robots;
  Strategy strategy = Strategy::CC;
  double duration_s = 600.0;
  double tick_s = 0.1;
  std::uint64_t seed = 0;
  double link_prob = 1.0;
  double link_delay_s = 0.2;
  Params params;
  /// Planner-only mode: robot r shuttles between its two waypoints, with no
  /// patrolling agent. Empty for normal patrolling runs.
  std::vector<std::array<Vec3, 2>> waypoint_cycles;
  std::vector<Vec3> dynamic_obstacles;
};

/// Parses the JSON scenario and resolves the map and graph paths; the files
/// are read by prepare_scenario. Throws InputError.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text, const std::string& base_dir);
/// Loads map/graph when only paths are set, fills missing edge costs and
/// checks the scenario invariants. Throws InputError / GraphDisconnectedError.
void prepare_scenario(Scenario& sc, const std::vector<std::pair<NodeId, NodeId>>& missing_costs = {});

struct CsvRow {
  double t = 0.0;
  std::optional<int> node;
  std::string event;  // visit, interference, avg_idl, std_idl, max_idl, deadlock
  std::optional<int> robot;
  double value = 0.0;
};

struct VisitEvent {
  double t;
  NodeId node;
  RobotId robot;
  double idleness;  // ground-truth idleness just before the visit
};

struct MetricsRecord {
  std::vector<CsvRow> rows;
  std::vector<VisitEvent> visits;
  std::size_t interference_total = 0;
  bool deadlock = false;
  std::optional<double> deadlock_time;
  std::size_t messages_sent = 0;
  std::size_t messages_delivered = 0;
};

/// `t,node,event,robot,value` with shortest round-trip number formatting.
void write_csv(std::ostream& out, const std::vector<CsvRow>& rows);
std::string to_csv(const std::vector<CsvRow>& rows);
/// Reads back the rows of a metrics CSV. Throws InputError on malformed input.
std::vector<CsvRow> parse_csv(std::istream& in);

struct RunSummary {
  double final_avg_idl = 0.0;
  double mean_avg_idl = 0.0;
  double final_max_idl = 0.0;
  std::size_t interference_total = 0;
  bool deadlock = false;
};
/// Everything here is derived from the CSV rows alone.
RunSummary summarize(const std::vector<CsvRow>& rows);

/// Position samples (t, position) of one robot, oldest first.
using PoseTrace = std::deque<std::pair<double, Vec3>>;

/// True iff at least one robot has a pending goal and each such robot stayed
/// within eps_d of its position at the start of the trailing window.
bool detect_deadlock(const std::vector<PoseTrace>& traces,
                     const std::vector<bool>& pending, double t, double window, double eps_d);

struct RobotState {
  RobotId id = 0;
  Vec3 position = Vec3::Zero();
  double odometer = 0.0;
  double speed = 0.0;
};

class Simulation {
 public:
  explicit Simulation(Scenario scenario);

  /// Advances one tick.
  void step();
  /// Steps until the scenario duration and returns the metrics.
  const MetricsRecord& run();

  /// Tick count times the tick length, rounded to the microsecond.
  double time() const { return std::round(static_cast<double>(tick_) * sc_.tick_s * 1e6) / 1e6; }
  std::uint64_t ticks() const { return tick_; }
  const Scenario& scenario() const { return sc_; }
  const MetricsRecord& metrics() const { return metrics_; }
  const std::vector<RobotState>& robots() const { return robots_; }
  const Agent& agent(RobotId r) const { return agents_[static_cast<std::size_t>(r)]; }
  const Planner& planner(RobotId r) const { return planners_[static_cast<std::size_t>(r)]; }
  /// Ground-truth last visit time per node (graph order).
  const std::vector<double>& last_visits() const { return last_visit_; }
  bool planner_only() const { return !sc_.waypoint_cycles.empty(); }

  /// Optional log of every broadcast, one line per message.
  void set_message_log(std::ostream* out) { message_log_ = out; }

 private:
  void send(const Message& msg, double t);
  MapProvider map_provider(RobotId r, std::uint64_t& generation, std::optional<ClearanceContext>& ctx);
  void move_robots(double t);
  void record_visits(double t);
  void sample_metrics(double t);

  Scenario sc_;
  const TerrainMap* map_;
  const PatrollingGraph* graph_;
  StrategyToggles toggles_;
  LinkModel link_;
  InFlightQueue queue_;
  Rng net_rng_;
  std::vector<Rng> noise_rng_;
  std::vector<RobotState> robots_;
  std::vector<Agent> agents_;
  std::vector<Planner> planners_;
  std::vector<std::optional<PlannerStatus>> pending_status_;
  std::vector<int> cycle_target_;
  std::vector<std::vector<NodeId>> inside_;
  std::vector<double> last_visit_;
  std::deque<std::pair<double, std::vector<double>>> idleness_window_;
  std::vector<PoseTrace> traces_;
  std::size_t interference_since_record_ = 0;
  bool deadlocked_ = false;
  std::uint64_t tick_ = 0;
  std::uint64_t interference_every_ = 1, record_every_ = 1;
  std::uint64_t map_generation_ = 0;
  MetricsRecord metrics_;
  std::ostream* message_log_ = nullptr;
};

/// Runs one scenario with an overriding strategy and seed.
MetricsRecord run_scenario(Scenario sc, Strategy strategy, std::uint64_t seed);

}  // namespace patrol
