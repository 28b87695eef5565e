#pragma once

#include <map>
#include <string>
#include <vector>

namespace patrol {

/// Run-wide parameters. Field names follow the symbols used in scenario files
/// (`params` overrides and `--param KEY=VAL`).
struct Params {
  // path planning
  double v_max = 0.2;    // m/s
  double R_b = 0.47;     // robot bounding radius, m
  double D_s = 1.2;      // safety distance, m
  double R_c = 1.5;      // future trail crop radius, m
  double R_t = 1.5;      // radius for considering teammate trails, m
  double T_wait = 0.5;   // wait between initial planning attempts, s
  int l_max = 5;         // initial planning attempts

  // patrolling agent
  double T_pcr = 5.0;    // critical path planning failure time, s
  double T_ncr = 5.0;    // critical node conflict time, s
  double T_sleep = 0.1;  // agent loop sleep, s
  double f_patrol = 30.0;
  double T_idln = 5.0;   // idleness broadcast period, s
  double T_exp = 10.0;   // team model expiration, s
  int d_full = 4;        // consecutive critical replans before full-graph random selection

  // graph building
  double d_max = 5.0;       // m
  double alpha_max = 30.0;  // degrees

  // metric level
  double R_v = 0.5;        // node visit radius, m
  double R_l = 2.0;        // local planner horizon, m
  double lambda_z = 2.0;
  double lambda_t = 1.0;
  double epsilon = 1e-6;
  double max_step = 0.5;   // m
  int max_children = 5;
  double budget_factor = 50.0;   // expansions = budget_factor * sqrt(map size)
  int window_attempts = 4;       // boxed attempts + final full-map attempt
  double window_pad = 1.0;       // m
  double eps_nbhd = 0.3;         // neighbourhood radius for density/roughness, m
  double exclusion = -1.0;       // clearance threshold for the traversable map; <0 means D_s/2
  int k_nn = 20;
  double w_terrain = 1.0;
  double w_ramp = 1.5;
  double w_surmountable = 2.0;

  // engine / evaluation
  double stop_distance = 1.0;     // proximity checker: centres never approach closer than this
  double interference_hz = 2.0;
  double record_hz = 0.2;
  double Delta = 600.0;           // idleness statistics window, s
  double deadlock_window = 60.0;  // s
  double eps_d = 0.05;            // m
  double position_noise = 0.0;    // std-dev of additive localization noise, m

  double exclusion_radius() const { return exclusion < 0.0 ? 0.5 * D_s : exclusion; }

  /// Sets a parameter by symbol; throws InputError for unknown symbols.
  void set(const std::string& key, double value);
  double get(const std::string& key) const;
  static const std::vector<std::string>& names();

  /// Throws InputError when a value is out of its domain.
  void validate() const;
};

/// Parses "KEY=VAL" into a pair; throws InputError on malformed text.
std::pair<std::string, double> parse_param_override(const std::string& text);

}  // namespace patrol
