#include "gcid/mission.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "gcid/ivp.hpp"
#include "gcid/net.hpp"
#include "gcid/opinion.hpp"
#include "gcid/rng.hpp"
#include "gcid/scenario.hpp"

namespace gcid {

namespace {

constexpr int kExplore = 0;
constexpr int kExploit = 1;
constexpr int kMigrate = 2;

const std::vector<std::string> kKnownBehaviors = {"survey", "sample",
                                                  "goto-zone", "station-keep"};

struct ActiveStorm {
  Storm storm;
  int id = 0;
  bool alerted = false;  // some agent has detected it
  bool begun = false;
  bool ended = false;
};

struct AgentRuntime {
  AgentMissionState mission;
  OpinionState opinion;
  Rng sense_rng;
  int mode = kExplore;
  int operating_zone = 0;
  VisitGrid visit;
  double sample_dwell = 0.0;
  int claimed_point = -1;
  int detected_storm = -1;        // storm id behind storm_detected
  int last_completed_alert = -1;  // alerted storm answered by last migration
  bool all_stop = false;  // safety override: dead-man switch on comms loss
};

// Static per-behavior weights and the option-to-behavior activation matrix,
// resolved once from the configuration before tick 0.
struct BehaviorPlan {
  std::vector<std::string> names;
  Eigen::VectorXd weights;
  Eigen::MatrixXi activation;
};

BehaviorPlan resolve_behavior_plan(const MissionConfig& config) {
  BehaviorPlan plan;
  const int n = config.options.count();
  std::vector<double> weights;
  for (int j = 0; j < n; ++j) {
    for (const auto& [name, weight] :
         config.behaviors_by_option[static_cast<std::size_t>(j)]) {
      if (std::find(kKnownBehaviors.begin(), kKnownBehaviors.end(), name) ==
          kKnownBehaviors.end()) {
        throw ConfigError("unknown behavior '" + name + "' for option '" +
                          config.options.labels[static_cast<std::size_t>(j)] +
                          "'");
      }
      if (!(weight > 0.0)) {
        throw ConfigError("behavior '" + name + "' needs a positive weight");
      }
      const auto it = std::find(plan.names.begin(), plan.names.end(), name);
      if (it == plan.names.end()) {
        plan.names.push_back(name);
        weights.push_back(weight);
      } else if (weights[static_cast<std::size_t>(it - plan.names.begin())] !=
                 weight) {
        throw ConfigError("behavior '" + name +
                          "' declared with conflicting weights");
      }
    }
  }
  const auto q = static_cast<Eigen::Index>(plan.names.size());
  plan.weights = Eigen::Map<Eigen::VectorXd>(weights.data(), q);
  plan.activation = Eigen::MatrixXi::Zero(n, q);
  for (int j = 0; j < n; ++j) {
    for (const auto& [name, weight] :
         config.behaviors_by_option[static_cast<std::size_t>(j)]) {
      const auto it = std::find(plan.names.begin(), plan.names.end(), name);
      plan.activation(j, it - plan.names.begin()) = 1;
    }
  }
  return plan;
}

// Deterministic start formation: a ring around the first zone's center.
Eigen::Vector2d start_position(const Zone& zone, int agent, int fleet) {
  const double angle = 2.0 * M_PI * agent / std::max(1, fleet);
  const double radius = fleet > 1 ? 40.0 : 0.0;
  return zone.center() +
         radius * Eigen::Vector2d(std::cos(angle), std::sin(angle));
}

// Arrival slot inside a destination zone, spread so vehicles do not stack.
Eigen::Vector2d zone_slot(const Zone& zone, int agent, int fleet) {
  const double angle = 2.0 * M_PI * agent / std::max(1, fleet);
  const double radius = fleet > 1 ? 50.0 : 0.0;
  return zone.center() +
         radius * Eigen::Vector2d(std::cos(angle), std::sin(angle));
}

class EpisodeRunner {
 public:
  explicit EpisodeRunner(const MissionConfig& config)
      : cfg_(config),
        space_(config.decision_space()),
        plan_(resolve_behavior_plan(config)),
        env_rng_(mix_seed(config.seed, 0xe17)),
        net_(config.fleet_size, config.network, config.resolution,
             config.z_clip, mix_seed(config.seed, 0x7e7)) {
    cfg_.validate();
    if (cfg_.dropout.agent >= cfg_.fleet_size) {
      throw ConfigError("dropout_agent outside the fleet");
    }
    if (cfg_.storm_injection.time >= 0.0 &&
        cfg_.storm_injection.agent >= cfg_.fleet_size) {
      throw ConfigError("inject_storm_agent outside the fleet");
    }
    init_agents();
    schedule_initial_events();
  }

  EpisodeLog run() {
    const long n_ticks =
        static_cast<long>(std::llround(cfg_.duration / cfg_.tick));
    log_.config_hash = cfg_.config_hash;
    log_.seed = cfg_.seed;
    log_.fleet_size = cfg_.fleet_size;
    log_.ticks = n_ticks;
    log_.tick_seconds = cfg_.tick;
    log_.mode = cfg_.coalition_mode;
    log_.option_labels = cfg_.options.labels;
    log_.records.reserve(static_cast<std::size_t>(n_ticks) *
                         static_cast<std::size_t>(cfg_.fleet_size));

    for (long k = 0; k < n_ticks; ++k) step(k);

    log_.tallies.messages_sent = net_.messages_sent();
    log_.tallies.messages_dropped = net_.messages_dropped();
    log_.tallies.payload_bytes = payload_bytes_;
    for (const auto& b : buffers_) log_.tallies.stale_dropped += b.stale_dropped();
    return std::move(log_);
  }

 private:
  void init_agents() {
    const int n_opt = cfg_.options.count();
    agents_.resize(static_cast<std::size_t>(cfg_.fleet_size));
    buffers_.assign(static_cast<std::size_t>(cfg_.fleet_size), MessageBuffer{});
    for (int i = 0; i < cfg_.fleet_size; ++i) {
      AgentRuntime& a = agents_[static_cast<std::size_t>(i)];
      a.mission.position =
          start_position(cfg_.scenario.zones[0], i, cfg_.fleet_size);
      a.mission.last_migration_time = -cfg_.scenario.migrate.cooldown_period;
      a.opinion.z = Eigen::VectorXd::Zero(n_opt);
      a.opinion.u = cfg_.attention.u_min;
      a.sense_rng =
          Rng(mix_seed(cfg_.seed, 0x5e0 + static_cast<std::uint64_t>(i)));
      a.operating_zone = 0;
      a.visit =
          VisitGrid(cfg_.scenario.zones[0], cfg_.scenario.visit_cell_size);
      a.mode = cfg_.coalition_mode == CoalitionMode::Static
                   ? static_coalition_policy(i, cfg_.fleet_size)
                   : kExplore;
    }
  }

  void schedule_initial_events() {
    for (int z = 0; z < 2; ++z) {
      next_spawn_[z] = env_rng_.exponential(cfg_.scenario.bloom_mean_interval);
    }
    next_storm_ = cfg_.scenario.storm_mean_interval > 0.0
                      ? env_rng_.exponential(cfg_.scenario.storm_mean_interval)
                      : std::numeric_limits<double>::infinity();
  }

  void event(long tick, const std::string& kind, int agent = -1, int id = -1,
             int id2 = -1, double x = 0.0, double y = 0.0) {
    log_.events.push_back({tick, kind, agent, id, id2, x, y});
  }

  int zone_of(const Eigen::Vector2d& p) const {
    for (int z = 0; z < 2; ++z) {
      if (cfg_.scenario.zones[static_cast<std::size_t>(z)].contains(p)) {
        return z;
      }
    }
    return -1;
  }

  void update_environment(long tick, double now) {
    for (int z = 0; z < 2; ++z) {
      while (next_spawn_[z] <= now) {
        const Bloom b = spawn_bloom(
            env_rng_, cfg_.scenario.zones[static_cast<std::size_t>(z)], z,
            static_cast<int>(blooms_.size()), next_spawn_[z], cfg_.scenario);
        blooms_.push_back(b);
        event(tick, "bloom_spawn", -1, b.id, z, b.center.x(), b.center.y());
        next_spawn_[z] +=
            env_rng_.exponential(cfg_.scenario.bloom_mean_interval);
      }
    }
    while (next_storm_ <= now) {
      const int zone_index = static_cast<int>(env_rng_.uniform_index(2));
      const double y_frac = env_rng_.uniform();
      const Zone& zone =
          cfg_.scenario.zones[static_cast<std::size_t>(zone_index)];
      ActiveStorm s;
      s.id = static_cast<int>(storms_.size());
      s.storm.zone = zone_index;
      const double y = zone.origin.y() + y_frac * zone.height;
      s.storm.start = {zone.origin.x() - cfg_.scenario.storm_radius / 2.0, y};
      s.storm.end = {zone.origin.x() + zone.width +
                         cfg_.scenario.storm_radius / 2.0,
                     y};
      s.storm.t_begin = next_storm_;
      s.storm.t_end = next_storm_ + cfg_.scenario.storm_duration;
      s.storm.radius = cfg_.scenario.storm_radius;
      storms_.push_back(s);
      next_storm_ += env_rng_.exponential(cfg_.scenario.storm_mean_interval);
    }
    if (cfg_.storm_injection.time >= 0.0 && !storm_injected_ &&
        now >= cfg_.storm_injection.time) {
      storm_injected_ = true;
      const auto& pos =
          agents_[static_cast<std::size_t>(cfg_.storm_injection.agent)]
              .mission.position;
      int zone_index = zone_of(pos);
      if (zone_index < 0) {
        zone_index =
            agents_[static_cast<std::size_t>(cfg_.storm_injection.agent)]
                .operating_zone;
      }
      const Zone& zone =
          cfg_.scenario.zones[static_cast<std::size_t>(zone_index)];
      ActiveStorm s;
      s.id = static_cast<int>(storms_.size());
      s.storm.zone = zone_index;
      s.storm.start = pos;
      s.storm.end = {zone.origin.x() + zone.width +
                         cfg_.scenario.storm_radius / 2.0,
                     pos.y()};
      s.storm.t_begin = now;
      s.storm.t_end = now + cfg_.scenario.storm_duration;
      s.storm.radius = cfg_.scenario.storm_radius;
      storms_.push_back(s);
    }
    for (auto& s : storms_) {
      if (!s.begun && s.storm.active(now)) {
        s.begun = true;
        event(tick, "storm_begin", -1, s.id, s.storm.zone);
      }
      if (s.begun && !s.ended && now >= s.storm.t_end) {
        s.ended = true;
        event(tick, "storm_end", -1, s.id, s.storm.zone);
      }
    }
  }

  void update_storm_detection(long tick, double now) {
    for (int i = 0; i < cfg_.fleet_size; ++i) {
      AgentRuntime& a = agents_[static_cast<std::size_t>(i)];
      if (a.mission.storm_detected) {
        // Latch clears when the storm blows over.
        const auto& s = storms_[static_cast<std::size_t>(a.detected_storm)];
        if (!s.storm.active(now)) {
          a.mission.storm_detected = false;
          a.detected_storm = -1;
        }
      }
      if (!a.mission.storm_detected) {
        for (auto& s : storms_) {
          if (s.storm.covers(a.mission.position, now)) {
            a.mission.storm_detected = true;
            a.detected_storm = s.id;
            if (!s.alerted) s.alerted = true;
            event(tick, "storm_detect", i, s.id);
            break;
          }
        }
      }
    }
  }

  int newest_active_alert(double now) const {
    int id = -1;
    for (const auto& s : storms_) {
      if (s.alerted && s.storm.active(now)) id = s.id;
    }
    return id;
  }

  // Unsampled points inside the given zone.
  std::vector<SamplePoint> zone_points(int zone_index) const {
    std::vector<SamplePoint> out;
    for (const auto& p : points_) {
      if (p.status == SampleStatus::Sampled) continue;
      if (zone_of(p.position) == zone_index) out.push_back(p);
    }
    return out;
  }

  // The mode this agent is assumed to be in by a peer that only knows the
  // broadcast opinion.
  int mode_estimate(int agent_id,
                    const NeighborOpinionView& view) const {
    if (cfg_.coalition_mode == CoalitionMode::Static) {
      return agents_[static_cast<std::size_t>(agent_id)].mode;
    }
    return static_cast<int>(dominant_option(view.z));
  }

  void step(long tick) {
    const double now = tick * cfg_.tick;
    const int n = cfg_.fleet_size;

    update_environment(tick, now);
    update_storm_detection(tick, now);

    // Connectivity with the dropout script applied.
    std::vector<Eigen::Vector2d> positions(static_cast<std::size_t>(n));
    std::vector<bool> muted(static_cast<std::size_t>(n), false);
    for (int i = 0; i < n; ++i) {
      positions[static_cast<std::size_t>(i)] =
          agents_[static_cast<std::size_t>(i)].mission.position;
    }
    const bool dropout_now = cfg_.dropout.active(now);
    if (cfg_.dropout.agent >= 0) {
      if (dropout_now) {
        muted[static_cast<std::size_t>(cfg_.dropout.agent)] = true;
      }
      // Dead-man switch: a vehicle that lost communications holds an
      // ALL_STOP override until its radio comes back.
      agents_[static_cast<std::size_t>(cfg_.dropout.agent)].all_stop =
          dropout_now;
      if (dropout_now && !dropout_was_) {
        event(tick, "dropout_begin", cfg_.dropout.agent);
      }
      if (!dropout_now && dropout_was_) {
        event(tick, "dropout_end", cfg_.dropout.agent);
      }
      dropout_was_ = dropout_now;
    }
    NetworkSnapshot snap = connectivity(positions, cfg_.network);
    for (int i = 0; i < n; ++i) {
      if (!muted[static_cast<std::size_t>(i)]) continue;
      for (int k = 0; k < n; ++k) {
        if (k != i && snap.adjacency(i, k)) {
          snap.adjacency(i, k) = snap.adjacency(k, i) = false;
          --snap.degrees(i);
          --snap.degrees(k);
        }
      }
    }

    // Broadcast current opinions, then read the merged buffers.
    std::vector<Eigen::VectorXd> opinions(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      opinions[static_cast<std::size_t>(i)] =
          agents_[static_cast<std::size_t>(i)].opinion.z;
    }
    payload_bytes_ += net_.exchange(opinions, snap, muted, now, buffers_);

    std::vector<std::vector<NeighborOpinionView>> views(
        static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      views[static_cast<std::size_t>(i)] =
          buffers_[static_cast<std::size_t>(i)].neighbor_snapshot(
              snap.adjacency.row(i), now, cfg_.ttl);
    }

    // Opinion updates and mode selection.
    for (int i = 0; i < n; ++i) {
      AgentRuntime& a = agents_[static_cast<std::size_t>(i)];
      const auto& my_views = views[static_cast<std::size_t>(i)];

      a.visit.mark_visited(a.mission.position, cfg_.scenario.sensor_radius);
      for (const auto& v : my_views) {
        a.visit.mark_visited(
            agents_[static_cast<std::size_t>(v.agent_id)].mission.position,
            cfg_.scenario.sensor_radius);
      }

      int new_mode = a.mode;
      if (cfg_.coalition_mode == CoalitionMode::Gcid) {
        // A point claimed by someone else is not available to this agent;
        // its own claim is.
        std::optional<double> nearest;
        bool any_waiting = false;
        for (const auto& p : zone_points(a.operating_zone)) {
          if (p.status == SampleStatus::Claimed && p.id != a.claimed_point) {
            continue;
          }
          any_waiting = true;
          const double d = (p.position - a.mission.position).norm();
          if (!nearest || d < *nearest) nearest = d;
        }
        const Zone& dest = cfg_.scenario.zones[static_cast<std::size_t>(
            1 - a.operating_zone)];
        bool straggler = false;
        for (const auto& v : my_views) {
          if (!dest.contains(agents_[static_cast<std::size_t>(v.agent_id)]
                                 .mission.position)) {
            straggler = true;
            break;
          }
        }
        OpinionInput input;
        input.b = Eigen::VectorXd::Zero(cfg_.options.count());
        input.b(kExplore) =
            input_explore(a.mission, any_waiting, cfg_.scenario.explore);
        input.b(kExploit) =
            input_exploit(a.mission, nearest, cfg_.scenario.exploit);
        input.b(kMigrate) =
            input_migrate(a.mission, a.mode == kMigrate, straggler, now,
                          cfg_.scenario.migrate);

        const OpinionState z_next =
            opinion_step(a.opinion, input, my_views, cfg_.coupling,
                         cfg_.saturation, cfg_.tick, cfg_.substeps);
        const OpinionState u_next = attention_step(
            a.opinion, my_views, true, cfg_.attention, cfg_.tick);
        a.opinion.z = z_next.z;
        a.opinion.u = u_next.u;
        a.opinion.time = now + cfg_.tick;
        new_mode = static_cast<int>(dominant_option(a.opinion.z));
      } else {
        // Static coalitions: fixed split; everyone migrates while a detected
        // storm is active and the agent has not yet answered that alert.
        const int alert = newest_active_alert(now);
        if (alert >= 0 && a.last_completed_alert < alert) {
          new_mode = kMigrate;
        } else {
          new_mode = static_coalition_policy(i, n);
        }
      }
      if (new_mode != a.mode) {
        event(tick, "mode_change", i, new_mode, a.mode);
        a.mode = new_mode;
      }
    }

    // Greedy sample allocation per zone over this tick's exploiters.
    for (auto& a : agents_) a.claimed_point = -1;
    for (auto& p : points_) {
      if (p.status == SampleStatus::Claimed) {
        p.status = SampleStatus::Available;
      }
    }
    for (int z = 0; z < 2; ++z) {
      std::vector<std::pair<int, Eigen::Vector2d>> samplers;
      for (int i = 0; i < n; ++i) {
        const AgentRuntime& a = agents_[static_cast<std::size_t>(i)];
        if (a.mode == kExploit && a.operating_zone == z) {
          samplers.emplace_back(i, a.mission.position);
        }
      }
      if (samplers.empty()) continue;
      for (const auto& [agent_id, point_id] :
           greedy_allocate(samplers, zone_points(z))) {
        agents_[static_cast<std::size_t>(agent_id)].claimed_point = point_id;
        points_[static_cast<std::size_t>(point_id)].status =
            SampleStatus::Claimed;
      }
    }

    // Decide and move.
    for (int i = 0; i < n; ++i) {
      AgentRuntime& a = agents_[static_cast<std::size_t>(i)];
      const Decision d = decide(a, i, views[static_cast<std::size_t>(i)]);
      advance_vehicle(a.mission, d.values(0), d.values(1), cfg_.scenario,
                      cfg_.tick);
    }

    // Sense, sample, and check migrations against post-move positions.
    for (int i = 0; i < n; ++i) {
      AgentRuntime& a = agents_[static_cast<std::size_t>(i)];
      const double t_next = now + cfg_.tick;
      if (const auto bloom_id = sense_turbidity(a.mission, blooms_, t_next,
                                                cfg_.scenario, a.sense_rng)) {
        maybe_publish_point(tick, i, *bloom_id);
      }
      update_sampling(tick, i);
      update_migration(tick, i, t_next, views[static_cast<std::size_t>(i)]);
    }

    // Post-update records.
    for (int i = 0; i < n; ++i) {
      const AgentRuntime& a = agents_[static_cast<std::size_t>(i)];
      AgentRecord r;
      r.tick = tick;
      r.agent = i;
      r.x = a.mission.position.x();
      r.y = a.mission.position.y();
      r.z = a.opinion.z;
      r.u = a.opinion.u;
      r.dominant = cfg_.coalition_mode == CoalitionMode::Gcid
                       ? static_cast<int>(dominant_option(a.opinion.z))
                       : a.mode;
      r.degree = snap.degrees(i);
      r.mode = a.mode;
      r.distance = a.mission.distance_traveled;
      if (std::fabs(r.z.sum()) > 1e-9) {
        throw std::runtime_error("zero-sum audit failed at tick " +
                                 std::to_string(tick));
      }
      log_.records.push_back(std::move(r));
    }
  }

  Decision decide(AgentRuntime& a, int agent_id,
                  const std::vector<NeighborOpinionView>& my_views) {
    // Safety overrides bypass the opinion gating entirely.
    if (a.all_stop) {
      Decision d;
      d.values = Eigen::Vector2d(a.mission.heading_deg, 0.0);
      return d;
    }
    // Behaviors activated by the agent's dominant option, with their
    // configured weights.
    std::vector<PiecewiseObjective> objectives;
    std::vector<double> weights;
    for (Eigen::Index q = 0; q < plan_.weights.size(); ++q) {
      if (plan_.activation(a.mode, q) != 1) continue;
      objectives.push_back(
          build_behavior(a, agent_id, plan_.names[static_cast<std::size_t>(q)],
                         my_views));
      weights.push_back(plan_.weights(q));
    }
    BehaviorSet set;
    set.behaviors = std::move(objectives);
    set.weights = Eigen::Map<Eigen::VectorXd>(
        weights.data(), static_cast<Eigen::Index>(weights.size()));
    set.activation = Eigen::MatrixXi::Ones(1, set.weights.size());
    try {
      return solve(space_, set, set.weights);
    } catch (const NoActiveBehaviorError&) {
      Decision d;
      d.values = Eigen::Vector2d(a.mission.heading_deg, 0.0);
      return d;
    }
  }

  PiecewiseObjective build_behavior(
      AgentRuntime& a, int agent_id, const std::string& name,
      const std::vector<NeighborOpinionView>& my_views) {
    const auto& sc = cfg_.scenario;
    const Eigen::Vector2d own = a.mission.position;
    if (name == "survey") {
      const Zone& zone = sc.zones[static_cast<std::size_t>(a.operating_zone)];
      std::vector<std::pair<int, Eigen::Vector2d>> fellows;
      for (const auto& v : my_views) {
        const AgentRuntime& other =
            agents_[static_cast<std::size_t>(v.agent_id)];
        if (mode_estimate(v.agent_id, v) == kExplore &&
            other.operating_zone == a.operating_zone) {
          fellows.emplace_back(v.agent_id, other.mission.position);
        }
      }
      const Eigen::Vector2d wp =
          voronoi_explore_waypoint(own, agent_id, fellows, zone, a.visit);
      if ((wp - own).norm() < 1.0) return make_station_keep_objective(space_);
      return make_transit_objective(own, wp, sc.explore_speed, space_);
    }
    if (name == "sample") {
      if (a.claimed_point >= 0) {
        const auto& p = points_[static_cast<std::size_t>(a.claimed_point)];
        if ((p.position - own).norm() > sc.capture_radius) {
          return make_transit_objective(own, p.position, sc.exploit_speed,
                                        space_);
        }
      }
      return make_station_keep_objective(space_);
    }
    if (name == "goto-zone") {
      // Push on to the arrival slot well inside the zone, not just across
      // the boundary, so a trailing storm edge cannot re-trigger the fleet.
      const Zone& dest =
          cfg_.scenario.zones[static_cast<std::size_t>(1 - a.operating_zone)];
      const Eigen::Vector2d slot = zone_slot(dest, agent_id, cfg_.fleet_size);
      if ((!dest.contains(own) || (slot - own).norm() > 30.0) &&
          (slot - own).norm() >= 1.0) {
        return make_transit_objective(own, slot, sc.migrate_speed, space_);
      }
      return make_station_keep_objective(space_);
    }
    return make_station_keep_objective(space_);
  }

  void maybe_publish_point(long tick, int agent_id, int bloom_id) {
    const AgentRuntime& a = agents_[static_cast<std::size_t>(agent_id)];
    for (const auto& p : points_) {
      if (p.bloom_id != bloom_id || p.status == SampleStatus::Sampled) {
        continue;
      }
      if ((p.position - a.mission.position).norm() <
          cfg_.scenario.min_point_spacing) {
        return;  // already flagged nearby
      }
    }
    SamplePoint p;
    p.id = static_cast<int>(points_.size());
    p.position = a.mission.position;
    p.bloom_id = bloom_id;
    points_.push_back(p);
    event(tick, "detect", agent_id, p.id, bloom_id, p.position.x(),
          p.position.y());
  }

  void update_sampling(long tick, int agent_id) {
    AgentRuntime& a = agents_[static_cast<std::size_t>(agent_id)];
    bool sampling = false;
    if (a.mode == kExploit && a.claimed_point >= 0) {
      SamplePoint& p = points_[static_cast<std::size_t>(a.claimed_point)];
      if (p.status != SampleStatus::Sampled &&
          (p.position - a.mission.position).norm() <=
              cfg_.scenario.capture_radius &&
          a.mission.speed <= cfg_.scenario.sample_hold_speed) {
        sampling = true;
        a.sample_dwell += cfg_.tick;
        if (a.sample_dwell >= cfg_.scenario.sample_duration) {
          p.status = SampleStatus::Sampled;
          event(tick, "sample", agent_id, p.id, p.bloom_id);
          Bloom& b = blooms_[static_cast<std::size_t>(p.bloom_id)];
          if (!b.sampled) {
            b.sampled = true;
            event(tick, "bloom_sampled", -1, b.id);
          }
          a.sample_dwell = 0.0;
          a.claimed_point = -1;
          sampling = false;
        }
      }
    }
    if (!sampling) a.sample_dwell = 0.0;
    a.mission.currently_sampling = sampling;
  }

  void update_migration(long tick, int agent_id, double t_next,
                        const std::vector<NeighborOpinionView>& my_views) {
    AgentRuntime& a = agents_[static_cast<std::size_t>(agent_id)];
    const Zone& dest =
        cfg_.scenario.zones[static_cast<std::size_t>(1 - a.operating_zone)];
    // Still migrating, or already standing in the destination zone (the
    // opinion can flip a beat before the group assembles; physical presence
    // decides the operating zone).
    if (a.mode != kMigrate && !dest.contains(a.mission.position)) return;
    std::vector<Eigen::Vector2d> known;
    for (const auto& v : my_views) {
      known.push_back(
          agents_[static_cast<std::size_t>(v.agent_id)].mission.position);
    }
    if (migration_complete(a.mission, known, dest)) {
      a.mission.last_migration_time = t_next;
      a.operating_zone = 1 - a.operating_zone;
      a.visit = VisitGrid(
          cfg_.scenario.zones[static_cast<std::size_t>(a.operating_zone)],
          cfg_.scenario.visit_cell_size);
      a.mission.storm_detected = false;
      a.detected_storm = -1;
      a.last_completed_alert = newest_active_alert(t_next);
      if (a.last_completed_alert < 0) {
        for (const auto& s : storms_) {
          if (s.alerted) a.last_completed_alert = s.id;
        }
      }
      event(tick, "migration_complete", agent_id, a.operating_zone);
    }
  }

  MissionConfig cfg_;
  DecisionSpace space_;
  BehaviorPlan plan_;
  Rng env_rng_;
  NetworkSim net_;
  std::vector<AgentRuntime> agents_;
  std::vector<MessageBuffer> buffers_;
  std::vector<Bloom> blooms_;
  std::vector<SamplePoint> points_;
  std::vector<ActiveStorm> storms_;
  double next_spawn_[2] = {0.0, 0.0};
  double next_storm_ = 0.0;
  bool storm_injected_ = false;
  bool dropout_was_ = false;
  std::size_t payload_bytes_ = 0;
  EpisodeLog log_;
};

}  // namespace

EpisodeLog run_episode(const MissionConfig& config) {
  EpisodeRunner runner(config);
  return runner.run();
}

int static_coalition_policy(int agent_index, int fleet_size) {
  const int explorers = (fleet_size + 1) / 2;
  return agent_index < explorers ? kExplore : kExploit;
}

Metrics compute_metrics(const EpisodeLog& log) {
  Metrics m;
  double first_detect = -1.0;
  for (const auto& e : log.events) {
    if (e.kind == "bloom_spawn") ++m.blooms_spawned;
    if (e.kind == "bloom_sampled") ++m.blooms_sampled;
    if (e.kind == "sample") ++m.samples_taken;
    if (e.kind == "migration_complete") ++m.migration_count;
    if (e.kind == "storm_detect" && first_detect < 0.0) {
      first_detect = e.tick * log.tick_seconds;
    }
  }

  if (m.blooms_spawned == 0) {
    m.sampled_fraction = 1.0;
    m.degenerate_no_blooms = true;
  } else {
    m.sampled_fraction =
        static_cast<double>(m.blooms_sampled) / m.blooms_spawned;
  }

  std::vector<double> final_distance(static_cast<std::size_t>(log.fleet_size),
                                     0.0);
  for (const auto& r : log.records) {
    final_distance[static_cast<std::size_t>(r.agent)] = r.distance;
  }
  for (double d : final_distance) m.fleet_distance += d;
  if (m.fleet_distance <= 0.0) {
    m.efficiency = 0.0;
    m.degenerate_no_travel = true;
  } else {
    m.efficiency = m.samples_taken / m.fleet_distance;
  }

  if (first_detect >= 0.0) {
    std::vector<double> first_migrate(
        static_cast<std::size_t>(log.fleet_size), -1.0);
    for (const auto& r : log.records) {
      const double t = r.tick * log.tick_seconds;
      if (t < first_detect) continue;
      auto& fm = first_migrate[static_cast<std::size_t>(r.agent)];
      if (fm < 0.0 && r.dominant == kMigrate) fm = t;
    }
    double worst = -1.0;
    bool all = true;
    for (double t : first_migrate) {
      if (t < 0.0) {
        all = false;
        break;
      }
      worst = std::max(worst, t);
    }
    m.cascade_latency = all ? worst - first_detect : -1.0;
  }
  return m;
}

std::vector<MonteCarloCell> run_monte_carlo(
    const MissionConfig& base, int runs_per_cell,
    const std::vector<int>& fleet_sizes,
    const std::vector<CoalitionMode>& modes, int threads) {
  if (runs_per_cell < 1) {
    throw InvalidInputError("run_monte_carlo: runs_per_cell must be >= 1");
  }
  struct Job {
    int cell;
    int run;
    MissionConfig config;
  };
  std::vector<MonteCarloCell> cells;
  std::vector<Job> jobs;
  for (int fleet : fleet_sizes) {
    for (CoalitionMode mode : modes) {
      MonteCarloCell cell;
      cell.fleet_size = fleet;
      cell.mode = mode;
      cell.runs.resize(static_cast<std::size_t>(runs_per_cell));
      cell.seeds.resize(static_cast<std::size_t>(runs_per_cell));
      const int cell_index = static_cast<int>(cells.size());
      for (int r = 0; r < runs_per_cell; ++r) {
        MissionConfig cfg = base;
        cfg.fleet_size = fleet;
        cfg.coalition_mode = mode;
        // Seed depends only on (base seed, fleet, run), so gcid and static
        // cells see identical bloom and storm schedules run for run.
        cfg.seed = mix_seed(mix_seed(base.seed, static_cast<std::uint64_t>(fleet)),
                            static_cast<std::uint64_t>(r));
        cell.seeds[static_cast<std::size_t>(r)] = cfg.seed;
        jobs.push_back({cell_index, r, std::move(cfg)});
      }
      cells.push_back(std::move(cell));
    }
  }

  const int n_threads =
      threads > 0 ? threads
                  : static_cast<int>(
                        std::max(1u, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    while (true) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size() || failed.load()) return;
      try {
        const EpisodeLog log = run_episode(jobs[j].config);
        cells[static_cast<std::size_t>(jobs[j].cell)]
            .runs[static_cast<std::size_t>(jobs[j].run)] =
            compute_metrics(log);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failed.store(true);
        failure = "episode with seed " + std::to_string(jobs[j].config.seed) +
                  " failed: " + e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failed.load()) throw std::runtime_error(failure);

  for (auto& cell : cells) {
    double sf_sum = 0.0;
    double ef_sum = 0.0;
    cell.min_sampled_fraction = std::numeric_limits<double>::infinity();
    cell.max_sampled_fraction = -std::numeric_limits<double>::infinity();
    cell.min_efficiency = std::numeric_limits<double>::infinity();
    cell.max_efficiency = -std::numeric_limits<double>::infinity();
    for (const auto& m : cell.runs) {
      sf_sum += m.sampled_fraction;
      ef_sum += m.efficiency;
      cell.min_sampled_fraction =
          std::min(cell.min_sampled_fraction, m.sampled_fraction);
      cell.max_sampled_fraction =
          std::max(cell.max_sampled_fraction, m.sampled_fraction);
      cell.min_efficiency = std::min(cell.min_efficiency, m.efficiency);
      cell.max_efficiency = std::max(cell.max_efficiency, m.efficiency);
    }
    cell.mean_sampled_fraction = sf_sum / static_cast<double>(cell.runs.size());
    cell.mean_efficiency = ef_sum / static_cast<double>(cell.runs.size());
  }
  return cells;
}

}  // namespace gcid
