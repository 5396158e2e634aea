#include "gcid/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace gcid {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

// Flat key-value store with consumption tracking; anything left unread when
// parsing finishes is an unknown key.
class KvStore {
 public:
  void insert(const std::string& section, const std::string& key,
              const std::string& value, int line) {
    const std::string full = section + "." + key;
    if (values_.count(full)) {
      throw ConfigError("duplicate key '" + key + "' in [" + section + "]");
    }
    values_[full] = {value, line, false};
    sections_.insert(section);
  }

  bool has_section(const std::string& section) const {
    return sections_.count(section) > 0;
  }

  const std::string* get(const std::string& section, const std::string& key) {
    auto it = values_.find(section + "." + key);
    if (it == values_.end()) return nullptr;
    it->second.consumed = true;
    return &it->second.text;
  }

  double get_double(const std::string& section, const std::string& key,
                    double fallback) {
    const std::string* v = get(section, key);
    if (v == nullptr) return fallback;
    try {
      std::size_t pos = 0;
      const double d = std::stod(*v, &pos);
      if (trim(v->substr(pos)).empty()) return d;
    } catch (const std::exception&) {
    }
    throw ConfigError("key '" + key + "' in [" + section +
                      "]: expected a number, got '" + *v + "'");
  }

  long get_int(const std::string& section, const std::string& key,
               long fallback) {
    const double d = get_double(section, key, static_cast<double>(fallback));
    if (d != std::floor(d)) {
      throw ConfigError("key '" + key + "' in [" + section +
                        "] must be an integer");
    }
    return static_cast<long>(d);
  }

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) {
    const std::string* v = get(section, key);
    return v == nullptr ? fallback : *v;
  }

  void mark_section_known(const std::string& section) {
    known_sections_.insert(section);
  }

  void finish() const {
    for (const auto& s : sections_) {
      if (!known_sections_.count(s)) {
        throw ConfigError("unknown section [" + s + "]");
      }
    }
    for (const auto& [full, entry] : values_) {
      if (!entry.consumed) {
        throw ConfigError("unknown key '" + full + "' (line " +
                          std::to_string(entry.line) + ")");
      }
    }
  }

 private:
  struct Entry {
    std::string text;
    int line = 0;
    mutable bool consumed = false;
  };
  std::map<std::string, Entry> values_;
  std::set<std::string> sections_;
  std::set<std::string> known_sections_;
};

KvStore tokenize(const std::string& text) {
  KvStore store;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("malformed section header at line " +
                          std::to_string(line_no));
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ConfigError("empty section name at line " +
                          std::to_string(line_no));
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected key = value at line " +
                        std::to_string(line_no));
    }
    if (section.empty()) {
      throw ConfigError("key before any section at line " +
                        std::to_string(line_no));
    }
    store.insert(section, trim(line.substr(0, eq)),
                 trim(line.substr(eq + 1)), line_no);
  }
  return store;
}

// "name:value, name:value" lists.
std::vector<std::pair<std::string, double>> parse_pairs(
    const std::string& text, const std::string& where) {
  std::vector<std::pair<std::string, double>> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError(where + ": expected name:value, got '" + item + "'");
    }
    const std::string name = trim(item.substr(0, colon));
    try {
      out.emplace_back(name, std::stod(trim(item.substr(colon + 1))));
    } catch (const std::exception&) {
      throw ConfigError(where + ": bad number in '" + item + "'");
    }
  }
  return out;
}

}  // namespace

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string vehicle_name(int index) {
  static const std::vector<std::string> names = {"Abe", "Ben", "Deb", "Eve",
                                                 "Fin", "Max", "Ned", "Oak"};
  if (index >= 0 && index < static_cast<int>(names.size())) {
    return names[static_cast<std::size_t>(index)];
  }
  return "V" + std::to_string(index);
}

MissionConfig MissionConfig::defaults() {
  MissionConfig c;
  c.options.labels = {"explore", "exploit", "migrate"};

  // Inter-agent gains are deliberately small: the neighbor sum is not
  // renormalized, so their effect scales with fleet size and must stay in
  // the unsaturated range of S for a fleet of eight.
  const int n = 3;
  c.coupling.alpha_self = Eigen::VectorXd::Constant(n, 0.2);
  c.coupling.gamma_self = Eigen::MatrixXd::Zero(n, n);
  c.coupling.a_same = Eigen::VectorXd::Zero(n);
  c.coupling.a_same << 0.02, 0.02, 0.4;
  c.coupling.a_diff = Eigen::MatrixXd::Zero(n, n);
  // explore/exploit compete with each other; both cooperate toward migrate.
  c.coupling.a_diff(0, 1) = 0.05;
  c.coupling.a_diff(1, 0) = 0.05;
  c.coupling.a_diff(0, 2) = -0.02;
  c.coupling.a_diff(1, 2) = -0.02;
  c.coupling.a_diff(2, 0) = 0.0;
  c.coupling.a_diff(2, 1) = 0.0;
  c.coupling.resistance = 1.0;

  c.behaviors_by_option = {{{"survey", 1.0}},
                           {{"sample", 1.0}},
                           {{"goto-zone", 1.0}}};
  c.scenario = ScenarioParams::defaults();
  // Steep exploit ramp: the claim must stay dominant over the explore ramp
  // (max 0.5) all the way down to the capture radius, or samplers abandon
  // their point on approach.
  c.scenario.exploit.gain = 5.0;
  c.scenario.capture_radius = 30.0;
  c.scenario.migrate.storm_bias = 8.0;
  c.scenario.migrate.migrating_bias = 2.0;
  return c;
}

void MissionConfig::validate() const {
  options.validate();
  const int n = options.count();
  coupling.validate(n);
  attention.validate();
  network.validate();
  scenario.validate();
  decision_space().validate();
  if (!(z_clip > 0.0)) throw ConfigError("z_clip must be > 0");
  if (!(ttl > 0.0)) throw ConfigError("ttl must be > 0");
  if (fleet_size < 1) throw ConfigError("fleet_size must be >= 1");
  if (fleet_size > 256) throw ConfigError("fleet_size must fit one wire byte");
  if (!(duration > 0.0)) throw ConfigError("duration must be > 0");
  if (!(tick > 0.0)) throw ConfigError("tick must be > 0");
  if (substeps < 1) throw ConfigError("substeps must be >= 1");
  if (static_cast<int>(behaviors_by_option.size()) != n) {
    throw ConfigError("behaviors must cover every option");
  }
  for (int j = 0; j < n; ++j) {
    if (behaviors_by_option[static_cast<std::size_t>(j)].empty()) {
      throw ConfigError("option '" + options.labels[static_cast<std::size_t>(j)] +
                        "' activates no behavior");
    }
  }
  // The bloom scenario binds option roles by position.
  if (options.labels != std::vector<std::string>{"explore", "exploit",
                                                 "migrate"}) {
    throw ConfigError(
        "bloom scenario requires options 'explore, exploit, migrate'");
  }
}

MissionConfig parse_config(const std::string& text) {
  MissionConfig c = MissionConfig::defaults();
  c.config_hash = fnv1a_hash(text);
  KvStore kv = tokenize(text);

  // ---- [options] ----
  kv.mark_section_known("options");
  if (const std::string* labels = kv.get("options", "labels")) {
    c.options.labels = split(*labels, ',');
  }
  c.options.validate();
  const int n = c.options.count();
  const std::string sat = kv.get_string("options", "saturation", "tanh");
  if (sat == "tanh") {
    c.saturation = Saturation::Tanh;
  } else if (sat == "clipped-linear") {
    c.saturation = Saturation::ClippedLinear;
  } else {
    throw ConfigError("saturation must be tanh or clipped-linear");
  }
  c.substeps = static_cast<int>(kv.get_int("options", "substeps", c.substeps));

  // ---- [coupling] ----
  kv.mark_section_known("coupling");
  c.coupling.resistance =
      kv.get_double("coupling", "resistance", c.coupling.resistance);

  // ---- per-option sections ----
  // Defaults only apply to the canonical three-option set; a custom label
  // set must spell out its couplings.
  const bool canonical =
      c.options.labels ==
      std::vector<std::string>{"explore", "exploit", "migrate"};
  if (!canonical) {
    c.coupling.alpha_self = Eigen::VectorXd::Zero(n);
    c.coupling.gamma_self = Eigen::MatrixXd::Zero(n, n);
    c.coupling.a_same = Eigen::VectorXd::Zero(n);
    c.coupling.a_diff = Eigen::MatrixXd::Zero(n, n);
  }
  for (int j = 0; j < n; ++j) {
    const std::string& label = c.options.labels[static_cast<std::size_t>(j)];
    const std::string section = "option " + label;
    kv.mark_section_known(section);
    c.coupling.alpha_self(j) =
        kv.get_double(section, "alpha_self", c.coupling.alpha_self(j));
    c.coupling.a_same(j) =
        kv.get_double(section, "a_same", c.coupling.a_same(j));
    for (const auto& keyed :
         {std::make_pair("a_diff", &c.coupling.a_diff),
          std::make_pair("gamma_self", &c.coupling.gamma_self)}) {
      if (const std::string* v = kv.get(section, keyed.first)) {
        for (const auto& [other, value] :
             parse_pairs(*v, section + "." + keyed.first)) {
          const int l = c.options.index_of(other);
          if (l < 0 || l == j) {
            throw ConfigError(section + "." + keyed.first +
                              ": bad option '" + other + "'");
          }
          (*keyed.second)(j, l) = value;
        }
      }
    }
  }

  // Scenario input utilities live in the option sections they drive.
  {
    auto& e = c.scenario.explore;
    e.gain = kv.get_double("option explore", "input_gain", e.gain);
    e.distance_cap =
        kv.get_double("option explore", "input_distance_cap", e.distance_cap);
    e.no_sample_bias = kv.get_double("option explore", "input_no_sample_bias",
                                     e.no_sample_bias);
    auto& x = c.scenario.exploit;
    x.gain = kv.get_double("option exploit", "input_gain", x.gain);
    x.range_cap =
        kv.get_double("option exploit", "input_range_cap", x.range_cap);
    x.max_value = kv.get_double("option exploit", "input_max", x.max_value);
    x.sampling_bias = kv.get_double("option exploit", "input_sampling_bias",
                                    x.sampling_bias);
    auto& m = c.scenario.migrate;
    m.storm_bias =
        kv.get_double("option migrate", "input_storm_bias", m.storm_bias);
    m.migrating_bias = kv.get_double("option migrate", "input_migrating_bias",
                                     m.migrating_bias);
    m.cooldown_bias = kv.get_double("option migrate", "input_cooldown_bias",
                                    m.cooldown_bias);
    m.cooldown_period = kv.get_double("option migrate",
                                      "input_cooldown_period",
                                      m.cooldown_period);
  }

  // ---- [attention] ----
  kv.mark_section_known("attention");
  c.attention.tau_u = kv.get_double("attention", "tau_u", c.attention.tau_u);
  c.attention.u_min = kv.get_double("attention", "u_min", c.attention.u_min);
  c.attention.u_max = kv.get_double("attention", "u_max", c.attention.u_max);
  c.attention.hill_n =
      kv.get_double("attention", "hill_n", c.attention.hill_n);
  c.attention.hill_half =
      kv.get_double("attention", "hill_half", c.attention.hill_half);

  // ---- [behaviors] ----
  kv.mark_section_known("behaviors");
  c.behaviors_by_option.assign(static_cast<std::size_t>(n), {});
  bool any_behavior_key = false;
  for (int j = 0; j < n; ++j) {
    const std::string& label = c.options.labels[static_cast<std::size_t>(j)];
    if (const std::string* v = kv.get("behaviors", label)) {
      any_behavior_key = true;
      c.behaviors_by_option[static_cast<std::size_t>(j)] =
          parse_pairs(*v, "behaviors." + label);
    }
  }
  if (!any_behavior_key) {
    c.behaviors_by_option = MissionConfig::defaults().behaviors_by_option;
  }
  c.heading_step =
      kv.get_double("behaviors", "heading_step", c.heading_step);
  c.speed_max = kv.get_double("behaviors", "speed_max", c.speed_max);
  c.speed_step = kv.get_double("behaviors", "speed_step", c.speed_step);

  // ---- [network] ----
  kv.mark_section_known("network");
  c.network.comm_range =
      kv.get_double("network", "comm_range", c.network.comm_range);
  c.network.drop_probability = kv.get_double("network", "drop_probability",
                                             c.network.drop_probability);
  c.network.latency_ticks = static_cast<int>(
      kv.get_int("network", "latency_ticks", c.network.latency_ticks));
  const std::string res = kv.get_string(
      "network", "resolution", c.resolution == Resolution::Fine ? "fine"
                                                                : "coarse");
  if (res == "fine") {
    c.resolution = Resolution::Fine;
  } else if (res == "coarse") {
    c.resolution = Resolution::Coarse;
  } else {
    throw ConfigError("resolution must be coarse or fine");
  }
  c.z_clip = kv.get_double("network", "z_clip", c.z_clip);
  c.ttl = kv.get_double("network", "ttl", c.ttl);

  // ---- [scenario] ----
  kv.mark_section_known("scenario");
  auto& s = c.scenario;
  for (int zi = 0; zi < 2; ++zi) {
    const std::string prefix = "zone" + std::to_string(zi) + "_";
    auto& zone = s.zones[static_cast<std::size_t>(zi)];
    zone.name = kv.get_string("scenario", prefix + "name", zone.name);
    if (const std::string* v = kv.get("scenario", prefix + "origin")) {
      const auto parts = split(*v, ',');
      if (parts.size() != 2) {
        throw ConfigError(prefix + "origin: expected 'x, y'");
      }
      zone.origin = {std::stod(parts[0]), std::stod(parts[1])};
    }
    zone.width = kv.get_double("scenario", prefix + "width", zone.width);
    zone.height = kv.get_double("scenario", prefix + "height", zone.height);
  }
  s.bloom_max_radius =
      kv.get_double("scenario", "bloom_max_radius", s.bloom_max_radius);
  s.bloom_growth_duration = kv.get_double("scenario", "bloom_growth_duration",
                                          s.bloom_growth_duration);
  s.bloom_mean_interval = kv.get_double("scenario", "bloom_mean_interval",
                                        s.bloom_mean_interval);
  s.storm_radius = kv.get_double("scenario", "storm_radius", s.storm_radius);
  s.storm_duration =
      kv.get_double("scenario", "storm_duration", s.storm_duration);
  s.storm_mean_interval = kv.get_double("scenario", "storm_mean_interval",
                                        s.storm_mean_interval);
  s.detect_p_max = kv.get_double("scenario", "detect_p_max", s.detect_p_max);
  s.detect_speed_cutoff = kv.get_double("scenario", "detect_speed_cutoff",
                                        s.detect_speed_cutoff);
  s.sensor_radius =
      kv.get_double("scenario", "sensor_radius", s.sensor_radius);
  s.visit_cell_size =
      kv.get_double("scenario", "visit_cell_size", s.visit_cell_size);
  s.capture_radius =
      kv.get_double("scenario", "capture_radius", s.capture_radius);
  s.sample_duration =
      kv.get_double("scenario", "sample_duration", s.sample_duration);
  s.sample_hold_speed = kv.get_double("scenario", "sample_hold_speed",
                                      s.sample_hold_speed);
  s.min_point_spacing = kv.get_double("scenario", "min_point_spacing",
                                      s.min_point_spacing);
  s.explore_speed =
      kv.get_double("scenario", "explore_speed", s.explore_speed);
  s.exploit_speed =
      kv.get_double("scenario", "exploit_speed", s.exploit_speed);
  s.migrate_speed =
      kv.get_double("scenario", "migrate_speed", s.migrate_speed);
  s.heading_rate_limit = kv.get_double("scenario", "heading_rate_limit",
                                       s.heading_rate_limit);
  s.accel_limit = kv.get_double("scenario", "accel_limit", s.accel_limit);
  s.battery_range =
      kv.get_double("scenario", "battery_range", s.battery_range);

  // ---- [harness] ----
  kv.mark_section_known("harness");
  c.fleet_size =
      static_cast<int>(kv.get_int("harness", "fleet_size", c.fleet_size));
  c.duration = kv.get_double("harness", "duration", c.duration);
  c.tick = kv.get_double("harness", "tick", c.tick);
  c.seed = static_cast<std::uint64_t>(
      kv.get_int("harness", "seed", static_cast<long>(c.seed)));
  const std::string mode = kv.get_string(
      "harness", "coalition_mode",
      c.coalition_mode == CoalitionMode::Gcid ? "gcid" : "static");
  if (mode == "gcid") {
    c.coalition_mode = CoalitionMode::Gcid;
  } else if (mode == "static") {
    c.coalition_mode = CoalitionMode::Static;
  } else {
    throw ConfigError("coalition_mode must be gcid or static");
  }
  c.dropout.agent = static_cast<int>(
      kv.get_int("harness", "dropout_agent", c.dropout.agent));
  c.dropout.start =
      kv.get_double("harness", "dropout_start", c.dropout.start);
  c.dropout.duration =
      kv.get_double("harness", "dropout_duration", c.dropout.duration);
  c.storm_injection.time = kv.get_double("harness", "inject_storm_time",
                                         c.storm_injection.time);
  c.storm_injection.agent = static_cast<int>(
      kv.get_int("harness", "inject_storm_agent", c.storm_injection.agent));

  kv.finish();
  c.validate();
  return c;
}

MissionConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace gcid
