#include "gcid/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gcid/ivp.hpp"

namespace gcid {

ScenarioParams ScenarioParams::defaults() {
  ScenarioParams p;
  p.zones = {{"X-ray", {0.0, 0.0}, 300.0, 350.0},
             {"Yankee", {500.0, 0.0}, 300.0, 350.0}};
  return p;
}

void ScenarioParams::validate() const {
  if (zones.size() != 2) {
    throw InvalidInputError("scenario needs exactly two zones");
  }
  for (const auto& z : zones) {
    if (!(z.width > 0.0) || !(z.height > 0.0)) {
      throw InvalidInputError("zone '" + z.name + "' has bad dimensions");
    }
  }
  const auto& a = zones[0];
  const auto& b = zones[1];
  const bool overlap = a.origin.x() < b.origin.x() + b.width &&
                       b.origin.x() < a.origin.x() + a.width &&
                       a.origin.y() < b.origin.y() + b.height &&
                       b.origin.y() < a.origin.y() + a.height;
  if (overlap) throw InvalidInputError("zones must be disjoint");
  if (!(bloom_growth_duration > 0.0) || !(bloom_max_radius > 0.0)) {
    throw InvalidInputError("bloom geometry must be positive");
  }
  if (!(detect_speed_cutoff > 0.0) || detect_p_max < 0.0 ||
      detect_p_max > 1.0) {
    throw InvalidInputError("turbidity detection parameters out of range");
  }
  if (!(visit_cell_size > 0.0) || !(sensor_radius > 0.0)) {
    throw InvalidInputError("coverage grid parameters must be positive");
  }
  if (!(battery_range > 0.0)) {
    throw InvalidInputError("battery_range must be positive");
  }
}

Bloom spawn_bloom(Rng& rng, const Zone& zone, int zone_index, int bloom_id,
                  double now, const ScenarioParams& params) {
  Bloom b;
  b.id = bloom_id;
  b.zone = zone_index;
  b.center = zone.origin + Eigen::Vector2d(rng.uniform() * zone.width,
                                           rng.uniform() * zone.height);
  b.spawn_time = now;
  b.growth_duration = params.bloom_growth_duration;
  b.max_radius = params.bloom_max_radius;
  return b;
}

std::optional<int> sense_turbidity(const AgentMissionState& agent,
                                   const std::vector<Bloom>& blooms,
                                   double now, const ScenarioParams& params,
                                   Rng& rng) {
  const Bloom* inside = nullptr;
  for (const auto& b : blooms) {
    if (b.sampled) continue;
    if ((agent.position - b.center).norm() <= b.radius_at(now)) {
      inside = &b;
      break;
    }
  }
  if (inside == nullptr) return std::nullopt;
  const double p =
      params.detect_p_max *
      std::max(0.0, 1.0 - agent.speed / params.detect_speed_cutoff);
  if (p <= 0.0) return std::nullopt;
  if (rng.bernoulli(p)) return inside->id;
  return std::nullopt;
}

double input_explore(const AgentMissionState& agent, bool any_samples_waiting,
                     const ExploreInput& p) {
  const double capped =
      std::min(agent.distance_traveled, p.distance_cap) / p.distance_cap;
  return p.gain * capped + (any_samples_waiting ? 0.0 : p.no_sample_bias);
}

double input_exploit(const AgentMissionState& agent,
                     std::optional<double> nearest_sample_range,
                     const ExploitInput& p) {
  if (!nearest_sample_range.has_value()) return 0.0;
  const double ranged =
      std::min(p.gain * (*nearest_sample_range / p.range_cap), p.max_value);
  return ranged + (agent.currently_sampling ? p.sampling_bias : 0.0);
}

double input_migrate(const AgentMissionState& agent, bool migrating,
                     bool neighbor_outside_destination, double now,
                     const MigrateInput& p) {
  double g = 0.0;
  if (agent.storm_detected) g += p.storm_bias;
  if (migrating && neighbor_outside_destination) g += p.migrating_bias;
  const double since = now - agent.last_migration_time;
  g -= std::max(0.0, p.cooldown_bias * (1.0 - since / p.cooldown_period));
  return g;
}

VisitGrid::VisitGrid(const Zone& zone, double cell_size)
    : origin_(zone.origin), cell_(cell_size) {
  nx_ = std::max(1, static_cast<int>(std::ceil(zone.width / cell_size)));
  ny_ = std::max(1, static_cast<int>(std::ceil(zone.height / cell_size)));
  visited_.assign(static_cast<std::size_t>(nx_ * ny_), false);
}

Eigen::Vector2d VisitGrid::cell_center(int cx, int cy) const {
  return origin_ + Eigen::Vector2d((cx + 0.5) * cell_, (cy + 0.5) * cell_);
}

void VisitGrid::mark_visited(const Eigen::Vector2d& position, double radius) {
  for (int cy = 0; cy < ny_; ++cy) {
    for (int cx = 0; cx < nx_; ++cx) {
      if (visited_[index(cx, cy)]) continue;
      if ((cell_center(cx, cy) - position).norm() <= radius) {
        visited_[index(cx, cy)] = true;
      }
    }
  }
}

bool VisitGrid::fully_visited() const {
  return std::all_of(visited_.begin(), visited_.end(),
                     [](bool v) { return v; });
}

void VisitGrid::reset() {
  std::fill(visited_.begin(), visited_.end(), false);
}

Eigen::Vector2d voronoi_explore_waypoint(
    const Eigen::Vector2d& own, int own_id,
    const std::vector<std::pair<int, Eigen::Vector2d>>& explorers,
    const Zone& zone, VisitGrid& grid) {
  // Site list: self plus fellow explorers.
  std::vector<std::pair<int, Eigen::Vector2d>> sites;
  sites.reserve(explorers.size() + 1);
  sites.emplace_back(own_id, own);
  for (const auto& e : explorers) {
    if (e.first != own_id) sites.push_back(e);
  }

  auto owner_of = [&](const Eigen::Vector2d& c) {
    int best_id = sites.front().first;
    double best_d = (c - sites.front().second).squaredNorm();
    for (std::size_t s = 1; s < sites.size(); ++s) {
      const double d = (c - sites[s].second).squaredNorm();
      if (d < best_d || (d == best_d && sites[s].first < best_id)) {
        best_d = d;
        best_id = sites[s].first;
      }
    }
    return best_id;
  };

  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  int owned_unvisited = 0;
  bool any_unvisited = false;
  int nearest_cx = -1, nearest_cy = -1;
  double nearest_d = std::numeric_limits<double>::infinity();

  for (int cy = 0; cy < grid.ny(); ++cy) {
    for (int cx = 0; cx < grid.nx(); ++cx) {
      if (grid.visited(cx, cy)) continue;
      any_unvisited = true;
      const Eigen::Vector2d c = grid.cell_center(cx, cy);
      const double d = (c - own).squaredNorm();
      if (d < nearest_d) {
        nearest_d = d;
        nearest_cx = cx;
        nearest_cy = cy;
      }
      if (owner_of(c) == own_id) {
        centroid += c;
        ++owned_unvisited;
      }
    }
  }

  if (owned_unvisited > 0) return centroid / owned_unvisited;
  if (any_unvisited) return grid.cell_center(nearest_cx, nearest_cy);
  grid.reset();
  return zone.center();
}

std::vector<std::pair<int, int>> greedy_allocate(
    const std::vector<std::pair<int, Eigen::Vector2d>>& samplers,
    const std::vector<SamplePoint>& points) {
  std::vector<std::pair<int, int>> result;
  if (samplers.empty()) return result;

  // Nearest sampler per point; distance ties go to the lower agent id.
  auto nearest_sampler = [&](const SamplePoint& p) {
    int best_id = samplers.front().first;
    double best_d = (p.position - samplers.front().second).norm();
    for (std::size_t s = 1; s < samplers.size(); ++s) {
      const double d = (p.position - samplers[s].second).norm();
      if (d < best_d || (d == best_d && samplers[s].first < best_id)) {
        best_d = d;
        best_id = samplers[s].first;
      }
    }
    return best_id;
  };

  for (const auto& [agent_id, position] : samplers) {
    int best_point = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
      if (p.status == SampleStatus::Sampled) continue;
      if (nearest_sampler(p) != agent_id) continue;
      const double d = (p.position - position).norm();
      if (d < best_d || (d == best_d && p.id < best_point)) {
        best_d = d;
        best_point = p.id;
      }
    }
    if (best_point >= 0) result.emplace_back(agent_id, best_point);
  }
  return result;
}

bool migration_complete(const AgentMissionState& agent,
                        const std::vector<Eigen::Vector2d>& known_neighbors,
                        const Zone& destination) {
  if (!destination.contains(agent.position)) return false;
  for (const auto& p : known_neighbors) {
    if (!destination.contains(p)) return false;
  }
  return true;
}

void advance_vehicle(AgentMissionState& agent, double desired_heading_deg,
                     double desired_speed, const ScenarioParams& params,
                     double dt) {
  // Shortest-way turn, rate limited.
  double err = std::fmod(desired_heading_deg - agent.heading_deg, 360.0);
  if (err > 180.0) err -= 360.0;
  if (err < -180.0) err += 360.0;
  const double max_turn = params.heading_rate_limit * dt;
  agent.heading_deg += std::clamp(err, -max_turn, max_turn);
  agent.heading_deg = std::fmod(agent.heading_deg, 360.0);
  if (agent.heading_deg < 0.0) agent.heading_deg += 360.0;

  const double dv = std::clamp(desired_speed - agent.speed,
                               -params.accel_limit * dt,
                               params.accel_limit * dt);
  agent.speed = std::max(0.0, agent.speed + dv);

  const double rad = agent.heading_deg * M_PI / 180.0;
  agent.position +=
      agent.speed * dt * Eigen::Vector2d(std::sin(rad), std::cos(rad));
  agent.distance_traveled += agent.speed * dt;
  agent.battery_used =
      std::min(1.0, agent.distance_traveled / params.battery_range);
}

}  // namespace gcid
