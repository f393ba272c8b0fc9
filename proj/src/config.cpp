#include "flowscan/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace flowscan {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

std::vector<Cidr> parse_nets(const std::vector<std::string>& items) {
  std::vector<Cidr> nets;
  for (const auto& item : items) {
    auto c = Cidr::parse(item);
    if (!c) throw ConfigError("invalid CIDR '" + item + "'");
    nets.push_back(*c);
  }
  return nets;
}

std::vector<std::string> net_strings(const std::vector<Cidr>& nets) {
  std::vector<std::string> out;
  for (const auto& n : nets) out.push_back(n.to_string());
  return out;
}

std::string_view policy_name(TriggerPolicyKind k) {
  return k == TriggerPolicyKind::MinMessages ? "min_messages" : "distinct_targets";
}

TriggerPolicyKind parse_policy(std::string_view s) {
  if (s == "min_messages") return TriggerPolicyKind::MinMessages;
  if (s == "distinct_targets") return TriggerPolicyKind::DistinctTargets;
  throw ConfigError("unknown trigger_policy '" + std::string(s) + "'");
}

std::int64_t parse_int(std::string_view key, std::string_view value) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size() || value.empty())
    throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(value) + "'");
  return v;
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

}  // namespace

bool valid_date(std::string_view d) {
  if (d.size() != 10 || d[4] != '/' || d[7] != '/') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (d[i] < '0' || d[i] > '9') return false;
  int month = (d[5] - '0') * 10 + (d[6] - '0');
  int day = (d[8] - '0') * 10 + (d[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

void validate(const EngineConfig& c) {
  if (c.timeout_value <= 0) throw ConfigError("timeout_value must be > 0");
  if (c.min_messages < 2) throw ConfigError("min_messages must be >= 2");
  if (c.local_nets.empty()) throw ConfigError("local_nets must not be empty");
  if (!c.date.empty() && !valid_date(c.date)) throw ConfigError("date must be yyyy/mm/dd");
  if (c.tick_interval <= 0) throw ConfigError("tick_interval must be > 0");
}

std::string to_json(const EngineConfig& c) {
  json j = {{"timeout_value", c.timeout_value},
            {"trigger_policy", policy_name(c.trigger_policy)},
            {"min_messages", c.min_messages},
            {"local_nets", net_strings(c.local_nets)},
            {"watchlist_path", c.watchlist_path},
            {"date", c.date},
            {"tz", c.tz},
            {"output_dir", c.output_dir},
            {"tick_interval", c.tick_interval}};
  return j.dump(2);
}

EngineConfig engine_config_from_json(std::string_view text, EngineConfig c) {
  json j = parse_json(text);
  if (!j.is_object()) throw ConfigError("engine config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "timeout_value")
      c.timeout_value = get<std::int64_t>(j, "timeout_value");
    else if (key == "trigger_policy")
      c.trigger_policy = parse_policy(get<std::string>(j, "trigger_policy"));
    else if (key == "min_messages")
      c.min_messages = get<std::size_t>(j, "min_messages");
    else if (key == "local_nets")
      c.local_nets = parse_nets(get<std::vector<std::string>>(j, "local_nets"));
    else if (key == "watchlist_path")
      c.watchlist_path = get<std::string>(j, "watchlist_path");
    else if (key == "date")
      c.date = get<std::string>(j, "date");
    else if (key == "tz")
      c.tz = get<std::string>(j, "tz");
    else if (key == "output_dir")
      c.output_dir = get<std::string>(j, "output_dir");
    else if (key == "tick_interval")
      c.tick_interval = get<std::int64_t>(j, "tick_interval");
    else
      throw ConfigError("unknown config key '" + key + "'");
  }
  validate(c);
  return c;
}

EngineConfig load_engine_config(const std::filesystem::path& path, EngineConfig base) {
  return engine_config_from_json(read_file(path), std::move(base));
}

void apply_setting(EngineConfig& c, std::string_view key, std::string_view value) {
  if (key == "timeout_value") {
    c.timeout_value = parse_int(key, value);
  } else if (key == "trigger_policy") {
    c.trigger_policy = parse_policy(value);
  } else if (key == "min_messages") {
    auto v = parse_int(key, value);
    if (v < 0) throw ConfigError("min_messages must be >= 2");
    c.min_messages = static_cast<std::size_t>(v);
  } else if (key == "local_nets") {
    std::vector<std::string> items;
    std::string item;
    std::istringstream ss{std::string(value)};
    while (std::getline(ss, item, ','))
      if (!item.empty()) items.push_back(item);
    c.local_nets = parse_nets(items);
  } else if (key == "watchlist_path") {
    c.watchlist_path = value;
  } else if (key == "date") {
    c.date = value;
  } else if (key == "tz") {
    c.tz = value;
  } else if (key == "output_dir") {
    c.output_dir = value;
  } else if (key == "tick_interval") {
    c.tick_interval = parse_int(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

void apply_environment(EngineConfig& c) {
  if (const char* dir = std::getenv("FLOWSCAN_OUTPUT_DIR"); dir && *dir) c.output_dir = dir;
}

ScanRulesetConfig make_ruleset_config(const EngineConfig& c) {
  validate(c);
  ScanRulesetConfig r;
  r.timeout_value = c.timeout_value;
  r.policy = {c.trigger_policy, c.min_messages};
  r.local_nets = c.local_nets;
  r.watchlist = Watchlist(c.watchlist_path.empty() ? default_watchlist() : load_watchlist(c.watchlist_path).entries);
  return r;
}

// --- generator config -----------------------------------------------------------

std::string to_json(const GenConfig& c) {
  json scans = json::array();
  for (const auto& s : c.scans) {
    json js = {{"kind", std::string(to_string(s.kind))},
               {"scanner_ip", s.scanner_ip.to_string()},
               {"probes", s.probes},
               {"inter_probe_gap", s.inter_probe_gap},
               {"start_time", s.start_time},
               {"adjacency", s.adjacency == Adjacency::Adjacent ? "adjacent" : "interleaved"},
               {"source_port", s.source_port}};
    if (s.kind == ScanKind::Vertical) {
      js["target"] = Ipv4{s.target}.to_string();
      js["first_target"] = s.first_target;
    } else {
      js["target"] = s.target;
      js["first_target"] = s.first_target ? Ipv4{s.first_target}.to_string() : "";
    }
    if (!s.gaps.empty()) js["gaps"] = s.gaps;
    scans.push_back(std::move(js));
  }
  json j = {{"duration", c.duration},
            {"background_rate", c.background_rate},
            {"outgoing_fraction", c.outgoing_fraction},
            {"local_nets", net_strings(c.local_nets)},
            {"seed", c.seed},
            {"start_clock", c.start_clock.to_string()},
            {"scans", scans}};
  return j.dump(2);
}

GenConfig gen_config_from_json(std::string_view text) {
  json j = parse_json(text);
  if (!j.is_object()) throw ConfigError("generator config must be a JSON object");
  GenConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "duration") {
      c.duration = get<std::int64_t>(j, "duration");
    } else if (key == "background_rate") {
      c.background_rate = get<double>(j, "background_rate");
    } else if (key == "outgoing_fraction") {
      c.outgoing_fraction = get<double>(j, "outgoing_fraction");
    } else if (key == "local_nets") {
      c.local_nets = parse_nets(get<std::vector<std::string>>(j, "local_nets"));
    } else if (key == "seed") {
      c.seed = get<std::uint64_t>(j, "seed");
    } else if (key == "start_clock") {
      auto s = get<std::string>(j, "start_clock");
      unsigned h = 0, m = 0, sec = 0;
      char c1 = 0, c2 = 0;
      std::istringstream ss(s);
      if (!(ss >> h >> c1 >> m >> c2 >> sec) || c1 != ':' || c2 != ':' || h > 23 || m > 59 || sec > 59)
        throw ConfigError("start_clock must be HH:MM:SS");
      c.start_clock = TimeOfDay::from_hms(h, m, sec);
    } else if (key == "scans") {
      if (!value.is_array()) throw ConfigError("scans must be an array");
      for (const auto& js : value) {
        if (!js.is_object()) throw ConfigError("each scan must be an object");
        ScanSpec s;
        auto kind = get<std::string>(js, "kind");
        if (kind == "Vertical" || kind == "vertical")
          s.kind = ScanKind::Vertical;
        else if (kind == "Horizontal" || kind == "horizontal")
          s.kind = ScanKind::Horizontal;
        else
          throw ConfigError("scan kind must be Vertical or Horizontal");
        auto ip = Ipv4::parse(get<std::string>(js, "scanner_ip"));
        if (!ip) throw ConfigError("scanner_ip is not an IPv4 address");
        s.scanner_ip = *ip;
        if (s.kind == ScanKind::Vertical) {
          auto t = Ipv4::parse(get<std::string>(js, "target"));
          if (!t) throw ConfigError("vertical scan target must be an IPv4 address");
          s.target = t->value;
          if (js.contains("first_target")) s.first_target = get<std::uint32_t>(js, "first_target");
        } else {
          s.target = get<std::uint32_t>(js, "target");
          if (js.contains("first_target")) {
            auto ft = get<std::string>(js, "first_target");
            if (!ft.empty()) {
              auto fip = Ipv4::parse(ft);
              if (!fip) throw ConfigError("horizontal first_target must be an IPv4 address");
              s.first_target = fip->value;
            }
          }
        }
        s.probes = get<std::uint32_t>(js, "probes");
        if (js.contains("inter_probe_gap")) s.inter_probe_gap = get<std::int64_t>(js, "inter_probe_gap");
        if (js.contains("gaps")) s.gaps = get<std::vector<std::int64_t>>(js, "gaps");
        if (js.contains("start_time")) s.start_time = get<std::int64_t>(js, "start_time");
        if (js.contains("adjacency")) {
          auto a = get<std::string>(js, "adjacency");
          if (a == "adjacent")
            s.adjacency = Adjacency::Adjacent;
          else if (a == "interleaved")
            s.adjacency = Adjacency::Interleaved;
          else
            throw ConfigError("adjacency must be adjacent or interleaved");
        }
        if (js.contains("source_port")) {
          auto p = get<std::uint32_t>(js, "source_port");
          if (p > 65535) throw ConfigError("source_port out of range");
          s.source_port = static_cast<Port>(p);
        }
        c.scans.push_back(std::move(s));
      }
    } else {
      throw ConfigError("unknown generator key '" + key + "'");
    }
  }
  validate(c);
  return c;
}

GenConfig load_gen_config(const std::filesystem::path& path) { return gen_config_from_json(read_file(path)); }

}  // namespace flowscan
