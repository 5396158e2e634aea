#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "gcid/config.hpp"

namespace gcid {

// ---------------------------------------------------------------------------
// Episode log
// ---------------------------------------------------------------------------

// One row per agent per tick, stamped with the post-update state.
struct AgentRecord {
  long tick = 0;
  int agent = 0;
  double x = 0.0;
  double y = 0.0;
  Eigen::VectorXd z;
  double u = 0.0;
  int dominant = 0;
  int degree = 0;
  int mode = 0;
  double distance = 0.0;  // cumulative meters traveled
};

// Environment and mission events.  Field meaning depends on kind:
//   bloom_spawn      id=bloom, x/y=center
//   storm_begin/end  id=storm
//   storm_detect     agent, id=storm (first detection per agent per storm)
//   detect           agent, id=sample point, id2=bloom, x/y=point
//   sample           agent, id=sample point, id2=bloom
//   bloom_sampled    id=bloom
//   mode_change      agent, id=new mode, id2=old mode
//   migration_complete agent, id=new operating zone
//   dropout_begin/end agent
struct EpisodeEvent {
  long tick = 0;
  std::string kind;
  int agent = -1;
  int id = -1;
  int id2 = -1;
  double x = 0.0;
  double y = 0.0;
};

struct DiagnosticTallies {
  std::size_t messages_sent = 0;
  std::size_t messages_dropped = 0;
  std::size_t stale_dropped = 0;
  std::size_t payload_bytes = 0;
};

struct EpisodeLog {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  int fleet_size = 0;
  long ticks = 0;
  double tick_seconds = 1.0;
  CoalitionMode mode = CoalitionMode::Gcid;
  std::vector<std::string> option_labels;
  std::vector<AgentRecord> records;   // fleet_size rows per tick, agent order
  std::vector<EpisodeEvent> events;
  DiagnosticTallies tallies;
};

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct Metrics {
  double sampled_fraction = 0.0;  // sampled blooms / spawned blooms
  double efficiency = 0.0;        // samples per meter of fleet travel
  int blooms_spawned = 0;
  int blooms_sampled = 0;
  int samples_taken = 0;
  double fleet_distance = 0.0;
  int migration_count = 0;
  double cascade_latency = -1.0;  // seconds; < 0 when no storm was detected
  bool degenerate_no_blooms = false;
  bool degenerate_no_travel = false;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Simulates one full mission.  Deterministic: identical (config, seed) give
// byte-identical serialized logs.
EpisodeLog run_episode(const MissionConfig& config);

// Fixed mode split: first ceil(fleet/2) agents explore, the rest exploit.
int static_coalition_policy(int agent_index, int fleet_size);

Metrics compute_metrics(const EpisodeLog& log);

// Monte-Carlo batch: n runs per (fleet size, coalition mode) cell, each
// episode seeded reproducibly from the base seed.
struct MonteCarloCell {
  int fleet_size = 0;
  CoalitionMode mode = CoalitionMode::Gcid;
  std::vector<std::uint64_t> seeds;
  std::vector<Metrics> runs;
  double mean_sampled_fraction = 0.0;
  double min_sampled_fraction = 0.0;
  double max_sampled_fraction = 0.0;
  double mean_efficiency = 0.0;
  double min_efficiency = 0.0;
  double max_efficiency = 0.0;
};

std::vector<MonteCarloCell> run_monte_carlo(
    const MissionConfig& base, int runs_per_cell,
    const std::vector<int>& fleet_sizes,
    const std::vector<CoalitionMode>& modes, int threads = 0);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

// Line-delimited structured records; stable byte-for-byte for identical
// logs.
std::string serialize_log(const EpisodeLog& log);
EpisodeLog parse_log(const std::string& text);

std::string metrics_to_json(const Metrics& m);

// Writes per-agent opinion trajectories (with 2-simplex barycentric
// coordinates when there are three options), attention series, degree
// series, and a machine-readable run manifest into out_dir.
void export_traces(const EpisodeLog& log, const std::string& out_dir);

}  // namespace gcid
