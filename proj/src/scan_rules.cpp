#include "flowscan/scan_rules.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

namespace flowscan {

Direction classify_direction(const FlowRecord& record, std::span<const Cidr> local_nets) {
  if (local_nets.empty()) throw std::invalid_argument("classify_direction: no local networks configured");
  for (const auto& net : local_nets)
    if (net.contains(record.source_ip)) return Direction::Outgoing;
  return Direction::Incoming;
}

ScanKeys derive_keys(const FlowRecord& record) {
  return {ContextKey::vertical(record.source_ip, record.dest_ip),
          ContextKey::horizontal(record.source_ip, record.dest_port)};
}

std::size_t distinct_targets(const Context& ctx) {
  std::unordered_set<std::uint32_t> seen;
  for (const auto& m : ctx.messages)
    seen.insert(ctx.key.kind == ScanKind::Vertical ? std::uint32_t{m.record.dest_port} : m.record.dest_ip.value);
  return seen.size();
}

bool trigger_holds(const Context& ctx, const TriggerPolicy& policy) {
  if (ctx.messages.empty()) return false;
  std::size_t count = policy.kind == TriggerPolicyKind::MinMessages ? ctx.messages.size() : distinct_targets(ctx);
  return count >= policy.threshold;
}

ScanAlert make_scan_alert(const Context& ctx) {
  ScanAlert a;
  a.kind = ctx.key.kind;
  a.remote_ip = ctx.key.remote_ip;
  a.fixed = ctx.key.fixed;
  a.evidence.reserve(ctx.messages.size());
  for (const auto& m : ctx.messages) a.evidence.push_back(m.text);
  if (!ctx.messages.empty()) {
    a.first_seen = ctx.messages.front().time;
    a.last_seen = ctx.messages.back().time;
    a.first_time = ctx.messages.front().record.event_time;
    a.last_time = ctx.messages.back().record.event_time;
  }
  a.distinct_targets = distinct_targets(ctx);
  return a;
}

std::optional<ScanAlert> scan_trigger(const Context& ctx, const TriggerPolicy& policy) {
  if (!trigger_holds(ctx, policy)) return std::nullopt;
  return make_scan_alert(ctx);
}

std::optional<WatchlistEntry> parse_watchlist_line(std::string_view line) {
  auto c1 = line.find(',');
  if (c1 == std::string_view::npos || c1 == 0) return std::nullopt;
  auto name = line.substr(0, c1);
  for (char ch : name) {
    bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == ' ';
    if (!ok) return std::nullopt;
  }
  auto c2 = line.find(',', c1 + 1);
  if (c2 == std::string_view::npos) return std::nullopt;
  auto digits = line.substr(c1 + 1, c2 - c1 - 1);
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
    return std::nullopt;
  unsigned long port = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc{} || port > 65535) return std::nullopt;
  auto dir = line.substr(c2 + 1);
  WatchlistEntry e{std::string(name), static_cast<Port>(port), WatchDirection::In};
  if (dir == "in") return e;
  if (dir == "out") {
    e.direction = WatchDirection::Out;
    return e;
  }
  return std::nullopt;
}

WatchlistLoad read_watchlist(std::istream& in) {
  WatchlistLoad load;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (auto e = parse_watchlist_line(line))
      load.entries.push_back(std::move(*e));
    else
      ++load.warnings;
  }
  return load;
}

WatchlistLoad load_watchlist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open watchlist " + path.string());
  return read_watchlist(in);
}

std::vector<WatchlistEntry> default_watchlist() {
  return {{"NetBus", 12345, WatchDirection::In}, {"NetBus", 12346, WatchDirection::In}};
}

Watchlist::Watchlist(const std::vector<WatchlistEntry>& entries) {
  for (const auto& e : entries) (e.direction == WatchDirection::In ? in_ : out_)[e.port] = e;
}

const WatchlistEntry* Watchlist::find(WatchDirection direction, Port port) const {
  const auto& map = direction == WatchDirection::In ? in_ : out_;
  auto it = map.find(port);
  return it == map.end() ? nullptr : &it->second;
}

std::optional<VulnAlert> check_watchlist(const FlowRecord& record, Direction direction, const Watchlist& watchlist) {
  const WatchlistEntry* hit = direction == Direction::Incoming ? watchlist.find(WatchDirection::In, record.dest_port)
                                                               : watchlist.find(WatchDirection::Out, record.source_port);
  if (!hit) return std::nullopt;
  return VulnAlert{*hit, record, direction};
}

Bindings scan_bindings(const FlowRecord& record) {
  Bindings b;
  b.set("sourceip", record.source_ip.to_string());
  b.set("sourceport", std::to_string(record.source_port));
  b.set("destip", record.dest_ip.to_string());
  b.set("destport", std::to_string(record.dest_port));
  b.set("time", record.event_time.to_string());
  return b;
}

std::string format_scan_evidence(ScanKind kind, const Bindings& b) {
  std::string s = kind == ScanKind::Vertical ? "Vertical scan: " : "Horizontal scan: ";
  s += b.at("sourceip");
  s += ':';
  s += b.at("sourceport");
  s += " to ";
  s += b.at("destip");
  s += ':';
  s += b.at("destport");
  s += " at ";
  s += b.at("time");
  return s;
}

Ruleset make_scan_ruleset(const ScanRulesetConfig& config) {
  if (config.timeout_value <= 0) throw ConfigError("timeout_value must be positive");
  if (config.local_nets.empty()) throw ConfigError("at least one local network is required");

  auto nets = std::make_shared<const std::vector<Cidr>>(config.local_nets);
  auto watchlist = std::make_shared<const Watchlist>(config.watchlist);
  auto behavior = std::make_shared<ContextBehavior>();
  behavior->trigger = [policy = config.policy](const Context& ctx) { return trigger_holds(ctx, policy); };
  behavior->on_fire = [](const Context& ctx) -> Alert { return make_scan_alert(ctx); };
  std::shared_ptr<const ContextBehavior> scan_behavior = behavior;

  Rule watch;
  watch.id = "vulnerable-port";
  watch.matcher = [](const FlowRecord& r) -> std::optional<Bindings> { return scan_bindings(r); };
  watch.actions.push_back([nets, watchlist](Engine& engine, const FlowRecord& r, const Bindings&) {
    if (auto hit = check_watchlist(r, classify_direction(r, *nets), *watchlist)) engine.raise(std::move(*hit));
  });

  auto incoming = [nets](const FlowRecord& r) -> std::optional<Bindings> {
    if (classify_direction(r, *nets) != Direction::Incoming) return std::nullopt;
    return scan_bindings(r);
  };

  auto scan_rule = [&](std::string id, ScanKind kind) {
    Rule rule;
    rule.id = std::move(id);
    rule.matcher = incoming;
    rule.actions.push_back([kind, timeout = config.timeout_value, scan_behavior](
                               Engine& engine, const FlowRecord& r, const Bindings& b) {
      ScanKeys keys = derive_keys(r);
      auto handle = engine.ensure_context(kind == ScanKind::Vertical ? keys.vertical : keys.horizontal, timeout,
                                          scan_behavior);
      engine.add_to_context(handle, r, format_scan_evidence(kind, b));
    });
    return rule;
  };

  Ruleset rs;
  rs.rules.push_back(std::move(watch));
  rs.rules.push_back(scan_rule("vertical-scan", ScanKind::Vertical));
  rs.rules.push_back(scan_rule("horizontal-scan", ScanKind::Horizontal));
  return rs;
}

}  // namespace flowscan
