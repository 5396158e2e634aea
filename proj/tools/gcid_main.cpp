// Mission simulator command line: single episodes, Monte-Carlo batches,
// trace extraction, and configuration validation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gcid/mission.hpp"

namespace {

gcid::MissionConfig load_or_default(const std::string& path) {
  if (path.empty()) {
    gcid::MissionConfig c = gcid::MissionConfig::defaults();
    c.validate();
    return c;
  }
  return gcid::load_config(path);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

std::string mode_name(gcid::CoalitionMode m) {
  return m == gcid::CoalitionMode::Gcid ? "gcid" : "static";
}

void print_metrics(const gcid::Metrics& m) {
  std::printf("blooms spawned/sampled : %d / %d\n", m.blooms_spawned,
              m.blooms_sampled);
  std::printf("sampled fraction       : %.3f%s\n", m.sampled_fraction,
              m.degenerate_no_blooms ? " (no blooms spawned)" : "");
  std::printf("samples taken          : %d\n", m.samples_taken);
  std::printf("fleet distance (m)     : %.1f\n", m.fleet_distance);
  std::printf("efficiency (per m)     : %.6f\n", m.efficiency);
  std::printf("migrations completed   : %d\n", m.migration_count);
  if (m.cascade_latency >= 0.0) {
    std::printf("cascade latency (s)    : %.1f\n", m.cascade_latency);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decentralized multi-robot bloom-sampling simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string log_path;
  long seed = -1;
  int fleet = 0;
  std::string mode;
  double drop_prob = -1.0;
  int latency = -1;
  double duration = 0.0;
  int runs = 30;
  std::vector<int> fleets = {4, 6, 8};
  std::vector<std::string> modes = {"gcid", "static"};
  int threads = 0;
  double inject_time = -2.0;
  int inject_agent = 0;
  std::vector<double> dropout;  // agent, start, duration

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "mission configuration file");
    cmd->add_option("--seed", seed, "override the mission seed");
    cmd->add_option("--fleet", fleet, "override the fleet size");
    cmd->add_option("--mode", mode, "coalition mode (gcid or static)")
        ->check(CLI::IsMember({"gcid", "static"}));
    cmd->add_option("--drop-prob", drop_prob,
                    "override network drop probability");
    cmd->add_option("--latency", latency, "override network latency (ticks)");
    cmd->add_option("--duration", duration, "override duration (seconds)");
    cmd->add_option("--inject-storm", inject_time,
                    "inject a storm at this time (seconds)");
    cmd->add_option("--inject-storm-agent", inject_agent,
                    "agent the injected storm spawns over");
    cmd->add_option("--dropout", dropout,
                    "scripted outage: agent start duration")
        ->expected(3);
  };

  CLI::App* run = app.add_subcommand("run", "run one episode");
  add_common(run);
  run->add_option("--out", out_dir, "output directory");
  bool with_traces = false;
  run->add_flag("--traces", with_traces, "also export trace files");

  CLI::App* mc = app.add_subcommand("mc", "Monte-Carlo comparison batch");
  add_common(mc);
  mc->add_option("--runs", runs, "episodes per (fleet, mode) cell");
  mc->add_option("--fleets", fleets, "fleet sizes to sweep");
  mc->add_option("--modes", modes, "coalition modes to sweep")
      ->check(CLI::IsMember({"gcid", "static"}));
  mc->add_option("--threads", threads, "worker threads (0 = all cores)");
  mc->add_option("--out", out_dir, "output directory for the results table");

  CLI::App* traces = app.add_subcommand("traces", "export traces from a log");
  traces->add_option("--log", log_path, "episode log (jsonl)")->required();
  traces->add_option("--out", out_dir, "output directory");

  CLI::App* validate =
      app.add_subcommand("validate-config", "check a configuration file");
  validate->add_option("--config", config_path, "mission configuration file")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    auto apply_overrides = [&](gcid::MissionConfig& cfg) {
      if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
      if (fleet > 0) cfg.fleet_size = fleet;
      if (!mode.empty()) {
        cfg.coalition_mode = mode == "gcid" ? gcid::CoalitionMode::Gcid
                                            : gcid::CoalitionMode::Static;
      }
      if (drop_prob >= 0.0) cfg.network.drop_probability = drop_prob;
      if (latency >= 0) cfg.network.latency_ticks = latency;
      if (duration > 0.0) cfg.duration = duration;
      if (inject_time >= -1.0) {
        cfg.storm_injection.time = inject_time;
        cfg.storm_injection.agent = inject_agent;
      }
      if (!dropout.empty()) {
        cfg.dropout.agent = static_cast<int>(dropout[0]);
        cfg.dropout.start = dropout[1];
        cfg.dropout.duration = dropout[2];
      }
      cfg.validate();
    };

    if (*run) {
      gcid::MissionConfig cfg = load_or_default(config_path);
      apply_overrides(cfg);
      const gcid::EpisodeLog log = gcid::run_episode(cfg);
      const gcid::Metrics m = gcid::compute_metrics(log);
      std::filesystem::create_directories(out_dir);
      write_file(out_dir + "/episode.jsonl", gcid::serialize_log(log));
      write_file(out_dir + "/metrics.json", gcid::metrics_to_json(m) + "\n");
      if (with_traces) gcid::export_traces(log, out_dir);
      std::printf("episode written to %s (seed %llu, %s, fleet %d)\n",
                  out_dir.c_str(),
                  static_cast<unsigned long long>(log.seed),
                  mode_name(log.mode).c_str(), log.fleet_size);
      print_metrics(m);
    } else if (*mc) {
      gcid::MissionConfig cfg = load_or_default(config_path);
      apply_overrides(cfg);
      std::vector<gcid::CoalitionMode> mode_list;
      for (const auto& m : modes) {
        mode_list.push_back(m == "gcid" ? gcid::CoalitionMode::Gcid
                                        : gcid::CoalitionMode::Static);
      }
      const auto cells =
          gcid::run_monte_carlo(cfg, runs, fleets, mode_list, threads);
      std::printf("%-6s %-7s %-5s %21s %21s\n", "fleet", "mode", "runs",
                  "sampled mean[min,max]", "effic. mean[min,max]");
      std::ostringstream csv;
      csv << "fleet,mode,runs,sampled_mean,sampled_min,sampled_max,"
             "efficiency_mean,efficiency_min,efficiency_max\n";
      for (const auto& c : cells) {
        std::printf("%-6d %-7s %-5zu %6.3f [%5.3f,%5.3f] %9.6f [%8.6f,%8.6f]\n",
                    c.fleet_size, mode_name(c.mode).c_str(), c.runs.size(),
                    c.mean_sampled_fraction, c.min_sampled_fraction,
                    c.max_sampled_fraction, c.mean_efficiency,
                    c.min_efficiency, c.max_efficiency);
        csv << c.fleet_size << ',' << mode_name(c.mode) << ','
            << c.runs.size() << ',' << c.mean_sampled_fraction << ','
            << c.min_sampled_fraction << ',' << c.max_sampled_fraction << ','
            << c.mean_efficiency << ',' << c.min_efficiency << ','
            << c.max_efficiency << "\n";
      }
      std::filesystem::create_directories(out_dir);
      write_file(out_dir + "/mc_results.csv", csv.str());
      std::printf("results table written to %s/mc_results.csv\n",
                  out_dir.c_str());
    } else if (*traces) {
      std::ifstream f(log_path);
      if (!f) throw std::runtime_error("cannot open log " + log_path);
      std::stringstream buf;
      buf << f.rdbuf();
      const gcid::EpisodeLog log = gcid::parse_log(buf.str());
      gcid::export_traces(log, out_dir);
      std::printf("traces written to %s\n", out_dir.c_str());
    } else if (*validate) {
      const gcid::MissionConfig cfg = gcid::load_config(config_path);
      std::printf("configuration ok: %d options, fleet %d, %s, %.0f s at "
                  "%.1f s ticks\n",
                  cfg.options.count(), cfg.fleet_size,
                  mode_name(cfg.coalition_mode).c_str(), cfg.duration,
                  cfg.tick);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
