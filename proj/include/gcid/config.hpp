#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gcid/ivp.hpp"
#include "gcid/net.hpp"
#include "gcid/opinion.hpp"
#include "gcid/scenario.hpp"

namespace gcid {

enum class CoalitionMode { Gcid, Static };

// Scripted communication outage for one agent.
struct DropoutScript {
  int agent = -1;  // -1 disables
  double start = 0.0;
  double duration = 0.0;

  bool active(double t) const {
    return agent >= 0 && t >= start && t < start + duration;
  }
};

// Scripted storm injection: at the given time a storm is spawned over the
// named agent's position, crossing its zone.
struct StormInjection {
  double time = -1.0;  // < 0 disables
  int agent = 0;
};

struct MissionConfig {
  // [options] + per-option sections
  OptionSet options;
  Saturation saturation = Saturation::Tanh;
  int substeps = 1;
  CouplingTensor coupling;

  // [attention]
  AttentionParams attention;

  // [behaviors]
  std::vector<std::vector<std::pair<std::string, double>>> behaviors_by_option;
  double heading_step = 1.0;
  double speed_max = 2.0;
  double speed_step = 0.1;

  // [network]
  ConnectivityModel network;
  Resolution resolution = Resolution::Fine;
  double z_clip = kDefaultZClip;
  double ttl = 3.0;

  // [scenario]
  ScenarioParams scenario;

  // [harness]
  int fleet_size = 8;
  double duration = 7200.0;
  double tick = 1.0;
  std::uint64_t seed = 1;
  CoalitionMode coalition_mode = CoalitionMode::Gcid;
  DropoutScript dropout;
  StormInjection storm_injection;

  // FNV-1a of the source text, recorded in run manifests.
  std::uint64_t config_hash = 0;

  static MissionConfig defaults();
  void validate() const;

  DecisionSpace decision_space() const {
    return DecisionSpace::heading_speed(heading_step, speed_max, speed_step);
  }
};

// Parse the single human-readable mission file.  Unknown sections or keys
// are hard errors naming the offender.
MissionConfig parse_config(const std::string& text);
MissionConfig load_config(const std::string& path);

std::uint64_t fnv1a_hash(const std::string& text);

// Vehicle names for log readability; fleets beyond the list fall back to
// V<index>.
std::string vehicle_name(int index);

}  // namespace gcid
