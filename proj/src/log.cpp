#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gcid/mission.hpp"

namespace gcid {

namespace {

// Shortest round-trip decimal form; stable across runs.
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void append_kv(std::string& out, const char* key, const std::string& value,
               bool quote = false) {
  out += '"';
  out += key;
  out += "\":";
  if (quote) out += '"';
  out += value;
  if (quote) out += '"';
}

std::string mode_name(CoalitionMode m) {
  return m == CoalitionMode::Gcid ? "gcid" : "static";
}

}  // namespace

std::string serialize_log(const EpisodeLog& log) {
  std::string out;
  out.reserve(log.records.size() * 120 + log.events.size() * 80 + 256);

  out += "{\"type\":\"header\",";
  append_kv(out, "config_hash", std::to_string(log.config_hash));
  out += ',';
  append_kv(out, "seed", std::to_string(log.seed));
  out += ',';
  append_kv(out, "fleet", std::to_string(log.fleet_size));
  out += ',';
  append_kv(out, "ticks", std::to_string(log.ticks));
  out += ',';
  append_kv(out, "tick_seconds", fmt(log.tick_seconds));
  out += ',';
  append_kv(out, "mode", mode_name(log.mode), true);
  out += ",\"options\":[";
  for (std::size_t i = 0; i < log.option_labels.size(); ++i) {
    if (i) out += ',';
    out += '"';
    out += log.option_labels[i];
    out += '"';
  }
  out += "]}\n";

  for (const auto& r : log.records) {
    out += "{\"type\":\"agent\",";
    append_kv(out, "t", std::to_string(r.tick));
    out += ',';
    append_kv(out, "id", std::to_string(r.agent));
    out += ',';
    append_kv(out, "x", fmt(r.x));
    out += ',';
    append_kv(out, "y", fmt(r.y));
    out += ",\"z\":[";
    for (Eigen::Index j = 0; j < r.z.size(); ++j) {
      if (j) out += ',';
      out += fmt(r.z(j));
    }
    out += "],";
    append_kv(out, "u", fmt(r.u));
    out += ',';
    append_kv(out, "dom", std::to_string(r.dominant));
    out += ',';
    append_kv(out, "deg", std::to_string(r.degree));
    out += ',';
    append_kv(out, "mode", std::to_string(r.mode));
    out += ',';
    append_kv(out, "dist", fmt(r.distance));
    out += "}\n";
  }

  for (const auto& e : log.events) {
    out += "{\"type\":\"event\",";
    append_kv(out, "t", std::to_string(e.tick));
    out += ',';
    append_kv(out, "kind", e.kind, true);
    out += ',';
    append_kv(out, "agent", std::to_string(e.agent));
    out += ',';
    append_kv(out, "id", std::to_string(e.id));
    out += ',';
    append_kv(out, "id2", std::to_string(e.id2));
    out += ',';
    append_kv(out, "x", fmt(e.x));
    out += ',';
    append_kv(out, "y", fmt(e.y));
    out += "}\n";
  }

  out += "{\"type\":\"tallies\",";
  append_kv(out, "messages_sent", std::to_string(log.tallies.messages_sent));
  out += ',';
  append_kv(out, "messages_dropped",
            std::to_string(log.tallies.messages_dropped));
  out += ',';
  append_kv(out, "stale_dropped", std::to_string(log.tallies.stale_dropped));
  out += ',';
  append_kv(out, "payload_bytes", std::to_string(log.tallies.payload_bytes));
  out += "}\n";
  return out;
}

EpisodeLog parse_log(const std::string& text) {
  EpisodeLog log;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    const std::string type = j.at("type");
    if (type == "header") {
      log.config_hash = j.at("config_hash").get<std::uint64_t>();
      log.seed = j.at("seed").get<std::uint64_t>();
      log.fleet_size = j.at("fleet").get<int>();
      log.ticks = j.at("ticks").get<long>();
      log.tick_seconds = j.at("tick_seconds").get<double>();
      log.mode = j.at("mode") == "gcid" ? CoalitionMode::Gcid
                                        : CoalitionMode::Static;
      log.option_labels = j.at("options").get<std::vector<std::string>>();
    } else if (type == "agent") {
      AgentRecord r;
      r.tick = j.at("t").get<long>();
      r.agent = j.at("id").get<int>();
      r.x = j.at("x").get<double>();
      r.y = j.at("y").get<double>();
      const auto zs = j.at("z").get<std::vector<double>>();
      r.z = Eigen::Map<const Eigen::VectorXd>(
          zs.data(), static_cast<Eigen::Index>(zs.size()));
      r.u = j.at("u").get<double>();
      r.dominant = j.at("dom").get<int>();
      r.degree = j.at("deg").get<int>();
      r.mode = j.at("mode").get<int>();
      r.distance = j.at("dist").get<double>();
      log.records.push_back(std::move(r));
    } else if (type == "event") {
      EpisodeEvent e;
      e.tick = j.at("t").get<long>();
      e.kind = j.at("kind").get<std::string>();
      e.agent = j.at("agent").get<int>();
      e.id = j.at("id").get<int>();
      e.id2 = j.at("id2").get<int>();
      e.x = j.at("x").get<double>();
      e.y = j.at("y").get<double>();
      log.events.push_back(std::move(e));
    } else if (type == "tallies") {
      log.tallies.messages_sent = j.at("messages_sent").get<std::size_t>();
      log.tallies.messages_dropped =
          j.at("messages_dropped").get<std::size_t>();
      log.tallies.stale_dropped = j.at("stale_dropped").get<std::size_t>();
      log.tallies.payload_bytes = j.at("payload_bytes").get<std::size_t>();
    } else {
      throw std::runtime_error("unknown log record type: " + type);
    }
  }
  return log;
}

std::string metrics_to_json(const Metrics& m) {
  nlohmann::json j;
  j["sampled_fraction"] = m.sampled_fraction;
  j["efficiency"] = m.efficiency;
  j["blooms_spawned"] = m.blooms_spawned;
  j["blooms_sampled"] = m.blooms_sampled;
  j["samples_taken"] = m.samples_taken;
  j["fleet_distance"] = m.fleet_distance;
  j["migration_count"] = m.migration_count;
  j["cascade_latency"] = m.cascade_latency;
  j["degenerate_no_blooms"] = m.degenerate_no_blooms;
  j["degenerate_no_travel"] = m.degenerate_no_travel;
  return j.dump(2);
}

void export_traces(const EpisodeLog& log, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create trace directory " + out_dir +
                             ": " + ec.message());
  }

  auto open = [&](const std::string& name) {
    std::ofstream f(out_dir + "/" + name);
    if (!f) {
      throw std::runtime_error("cannot write " + out_dir + "/" + name);
    }
    return f;
  };

  const int fleet = log.fleet_size;
  const auto n_opt = static_cast<Eigen::Index>(log.option_labels.size());
  std::vector<std::string> files;

  // Per-agent opinion trajectories, with barycentric simplex coordinates
  // when there are three options (b_j = 1/3 + z_j, so the origin maps to
  // the simplex center).
  for (int a = 0; a < fleet; ++a) {
    const std::string name = "opinions_" + vehicle_name(a) + ".csv";
    files.push_back(name);
    auto f = open(name);
    f << "t";
    for (const auto& label : log.option_labels) f << ",z_" << label;
    if (n_opt == 3) f << ",bary_0,bary_1,bary_2";
    f << "\n";
    for (const auto& r : log.records) {
      if (r.agent != a) continue;
      f << r.tick * log.tick_seconds;
      for (Eigen::Index j = 0; j < r.z.size(); ++j) f << ',' << fmt(r.z(j));
      if (n_opt == 3) {
        for (Eigen::Index j = 0; j < 3; ++j) {
          f << ',' << fmt(1.0 / 3.0 + r.z(j));
        }
      }
      f << "\n";
    }
  }

  // Attention magnitude and degree of connectivity, one column per agent.
  for (const char* which : {"attention", "degree"}) {
    const std::string name = std::string(which) + ".csv";
    files.push_back(name);
    auto f = open(name);
    f << "t";
    for (int a = 0; a < fleet; ++a) f << ',' << vehicle_name(a);
    f << "\n";
    for (long t = 0; t < log.ticks; ++t) {
      f << t * log.tick_seconds;
      for (int a = 0; a < fleet; ++a) {
        const auto& r =
            log.records[static_cast<std::size_t>(t) * fleet +
                        static_cast<std::size_t>(a)];
        if (std::string(which) == "attention") {
          f << ',' << fmt(r.u);
        } else {
          f << ',' << r.degree;
        }
      }
      f << "\n";
    }
  }

  nlohmann::json manifest;
  manifest["config_hash"] = log.config_hash;
  manifest["seed"] = log.seed;
  manifest["fleet"] = log.fleet_size;
  manifest["ticks"] = log.ticks;
  manifest["tick_seconds"] = log.tick_seconds;
  manifest["mode"] = mode_name(log.mode);
  manifest["options"] = log.option_labels;
  manifest["events"] = log.events.size();
  manifest["files"] = files;
  auto mf = open("manifest.json");
  mf << manifest.dump(2) << "\n";
}

}  // namespace gcid
