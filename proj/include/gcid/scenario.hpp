#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "gcid/errors.hpp"
#include "gcid/rng.hpp"

namespace gcid {

// ---------------------------------------------------------------------------
// Geometry and environment state
// ---------------------------------------------------------------------------

struct Zone {
  std::string name;
  Eigen::Vector2d origin{0.0, 0.0};  // south-west corner
  double width = 300.0;
  double height = 350.0;

  bool contains(const Eigen::Vector2d& p) const {
    return p.x() >= origin.x() && p.x() <= origin.x() + width &&
           p.y() >= origin.y() && p.y() <= origin.y() + height;
  }
  Eigen::Vector2d center() const {
    return origin + Eigen::Vector2d(width / 2.0, height / 2.0);
  }
};

struct Bloom {
  int id = 0;
  int zone = 0;
  Eigen::Vector2d center{0.0, 0.0};
  double spawn_time = 0.0;
  double growth_duration = 600.0;  // grows outward for 10 minutes
  double max_radius = 40.0;
  bool sampled = false;

  double radius_at(double t) const {
    if (t < spawn_time) return 0.0;
    const double f = (t - spawn_time) / growth_duration;
    return max_radius * (f < 1.0 ? f : 1.0);
  }
};

// A storm disk translating across one zone over a fixed interval.
struct Storm {
  int zone = 0;
  Eigen::Vector2d start{0.0, 0.0};
  Eigen::Vector2d end{0.0, 0.0};
  double t_begin = 0.0;
  double t_end = 0.0;
  double radius = 200.0;

  bool active(double t) const { return t >= t_begin && t < t_end; }
  Eigen::Vector2d center_at(double t) const {
    const double f =
        std::clamp((t - t_begin) / (t_end - t_begin), 0.0, 1.0);
    return start + f * (end - start);
  }
  bool covers(const Eigen::Vector2d& p, double t) const {
    return active(t) && (p - center_at(t)).norm() <= radius;
  }
};

enum class SampleStatus { Available, Claimed, Sampled };

struct SamplePoint {
  int id = 0;
  Eigen::Vector2d position{0.0, 0.0};
  int bloom_id = -1;
  SampleStatus status = SampleStatus::Available;
};

// Per-agent kinematic and mission bookkeeping state.
struct AgentMissionState {
  Eigen::Vector2d position{0.0, 0.0};
  double heading_deg = 0.0;   // compass, 0 = north (+y)
  double speed = 0.0;         // m/s
  double battery_used = 0.0;  // fraction of battery_range consumed
  double distance_traveled = 0.0;
  bool currently_sampling = false;
  double last_migration_time = 0.0;
  bool storm_detected = false;
};

// ---------------------------------------------------------------------------
// Scenario parameters
// ---------------------------------------------------------------------------

struct ExploreInput {
  double gain = 0.5;            // k_explore
  double distance_cap = 2000.0; // D_cap, meters
  double no_sample_bias = 0.5;
};

struct ExploitInput {
  double gain = 1.0;        // k_exploit, signed slope (see note below)
  double range_cap = 300.0; // r_cap, meters
  double max_value = 1.0;   // g2_max
  double sampling_bias = 1.0;
};

struct MigrateInput {
  double storm_bias = 5.0;       // B_storm
  double migrating_bias = 1.0;
  double cooldown_bias = 2.0;    // B_cooldown
  double cooldown_period = 600.0;  // T_cooldown, seconds
};

struct ScenarioParams {
  std::vector<Zone> zones;
  double bloom_max_radius = 40.0;
  double bloom_growth_duration = 600.0;
  double bloom_mean_interval = 600.0;  // mean seconds between spawns per zone
  double storm_radius = 200.0;
  double storm_duration = 300.0;
  double storm_mean_interval = 0.0;  // 0 disables random storms
  double detect_p_max = 0.3;
  double detect_speed_cutoff = 0.6;  // m/s
  double sensor_radius = 25.0;
  double visit_cell_size = 25.0;
  double capture_radius = 15.0;
  double sample_duration = 10.0;  // seconds stopped at a point
  double sample_hold_speed = 0.1; // "stopped" threshold, m/s
  double min_point_spacing = 25.0;
  double explore_speed = 0.4;
  double exploit_speed = 1.5;
  double migrate_speed = 1.5;
  double heading_rate_limit = 20.0;  // deg/s
  double accel_limit = 0.5;          // m/s^2
  double battery_range = 25000.0;    // meters of travel per full battery
  ExploreInput explore;
  ExploitInput exploit;
  MigrateInput migrate;

  static ScenarioParams defaults();
  void validate() const;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// New bloom with center uniform over the zone rectangle.
Bloom spawn_bloom(Rng& rng, const Zone& zone, int zone_index, int bloom_id,
                  double now, const ScenarioParams& params);

// Per-tick turbidity check.  Detection probability is
// p_max * max(0, 1 - speed / speed_cutoff) while inside an active bloom.
// Returns the bloom id on detection.
std::optional<int> sense_turbidity(const AgentMissionState& agent,
                                   const std::vector<Bloom>& blooms,
                                   double now, const ScenarioParams& params,
                                   Rng& rng);

// g1: grows linearly with distance traveled up to a cap, plus a bias when
// no sample points are waiting anywhere.
double input_explore(const AgentMissionState& agent, bool any_samples_waiting,
                     const ExploreInput& p);

// g2: grows linearly with range to the nearest unsampled point up to a cap,
// plus a bias while physically sampling; zero when nothing is waiting.
double input_exploit(const AgentMissionState& agent,
                     std::optional<double> nearest_sample_range,
                     const ExploitInput& p);

// g3: storm bias, a bias while a migration is still gathering stragglers,
// and a cooldown penalty that decays linearly after each completed
// migration.
double input_migrate(const AgentMissionState& agent, bool migrating,
                     bool neighbor_outside_destination, double now,
                     const MigrateInput& p);

// Coverage bookkeeping for the Voronoi exploration: a boolean grid of
// visit_cell_size cells over one zone.
class VisitGrid {
 public:
  VisitGrid() = default;
  VisitGrid(const Zone& zone, double cell_size);

  void mark_visited(const Eigen::Vector2d& position, double radius);
  bool fully_visited() const;
  void reset();

  int cell_count() const { return nx_ * ny_; }
  bool visited(int cx, int cy) const { return visited_[index(cx, cy)]; }
  void set_visited(int cx, int cy) { visited_[index(cx, cy)] = true; }
  Eigen::Vector2d cell_center(int cx, int cy) const;
  int nx() const { return nx_; }
  int ny() const { return ny_; }

 private:
  int index(int cx, int cy) const { return cy * nx_ + cx; }
  Eigen::Vector2d origin_{0.0, 0.0};
  double cell_ = 25.0;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<bool> visited_;
};

// Next exploration waypoint: centroid of the unvisited cells inside the
// agent's Voronoi cell with respect to the explorer positions (self
// included).  Falls back to the nearest unvisited cell anywhere in the
// zone; a fully visited zone resets the grid and returns the zone center.
Eigen::Vector2d voronoi_explore_waypoint(
    const Eigen::Vector2d& own, int own_id,
    const std::vector<std::pair<int, Eigen::Vector2d>>& explorers,
    const Zone& zone, VisitGrid& grid);

// Greedy sample allocation: each sampler takes its nearest waiting point
// unless a different sampler is strictly nearer to it.  Ties resolve to the
// lower agent id, then the lower point id.  Returns point id per sampler id
// (absent entry = no qualifying point).
std::vector<std::pair<int, int>> greedy_allocate(
    const std::vector<std::pair<int, Eigen::Vector2d>>& samplers,
    const std::vector<SamplePoint>& points);

// Complete when the agent and every currently-known neighbor are inside the
// destination zone (vacuously complete with zero known neighbors).
bool migration_complete(const AgentMissionState& agent,
                        const std::vector<Eigen::Vector2d>& known_neighbors,
                        const Zone& destination);

// Rate-limited unicycle step toward the commanded heading and speed.
void advance_vehicle(AgentMissionState& agent, double desired_heading_deg,
                     double desired_speed, const ScenarioParams& params,
                     double dt);

}  // namespace gcid
