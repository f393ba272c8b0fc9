// Port-scan detection ruleset: direction classification, vertical/horizontal
// context keys, the scan trigger and the vulnerable-port watchlist.
#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "flowscan/alerts.hpp"
#include "flowscan/correlation.hpp"
#include "flowscan/types.hpp"

namespace flowscan {

/// Outgoing iff the source address lies in one of the local networks.
Direction classify_direction(const FlowRecord& record, std::span<const Cidr> local_nets);

struct ScanKeys {
  ContextKey vertical;    // (remote = source_ip, local address = dest_ip)
  ContextKey horizontal;  // (remote = source_ip, local port = dest_port)
};

ScanKeys derive_keys(const FlowRecord& record);

enum class TriggerPolicyKind { MinMessages, DistinctTargets };

/// MinMessages counts messages; DistinctTargets counts distinct destination
/// ports (Vertical) or distinct destination hosts (Horizontal), so repeated
/// retries to a single target never alert.
struct TriggerPolicy {
  TriggerPolicyKind kind = TriggerPolicyKind::MinMessages;
  std::size_t threshold = 2;

  friend bool operator==(const TriggerPolicy&, const TriggerPolicy&) = default;
};

std::size_t distinct_targets(const Context& ctx);
bool trigger_holds(const Context& ctx, const TriggerPolicy& policy);
ScanAlert make_scan_alert(const Context& ctx);
std::optional<ScanAlert> scan_trigger(const Context& ctx, const TriggerPolicy& policy);

// --- watchlist ---------------------------------------------------------------

/// One line of a watchlist file: `^([a-zA-Z0-9 ]+),([0-9]+),(in|out)$`.
std::optional<WatchlistEntry> parse_watchlist_line(std::string_view line);

struct WatchlistLoad {
  std::vector<WatchlistEntry> entries;
  std::size_t warnings = 0;  // malformed lines skipped
};

WatchlistLoad read_watchlist(std::istream& in);
WatchlistLoad load_watchlist(const std::filesystem::path& path);  // throws IoError

/// The built-in list used when no watchlist file is configured (NetBus only).
std::vector<WatchlistEntry> default_watchlist();

/// Port lookup split by direction. `in` entries match the destination port of
/// incoming traffic, `out` entries the source port of outgoing traffic. A later
/// entry for the same port and direction replaces an earlier one.
class Watchlist {
 public:
  Watchlist() = default;
  explicit Watchlist(const std::vector<WatchlistEntry>& entries);

  const WatchlistEntry* find(WatchDirection direction, Port port) const;
  bool empty() const { return in_.empty() && out_.empty(); }

 private:
  std::unordered_map<Port, WatchlistEntry> in_;
  std::unordered_map<Port, WatchlistEntry> out_;
};

std::optional<VulnAlert> check_watchlist(const FlowRecord& record, Direction direction, const Watchlist& watchlist);

// --- ruleset -------------------------------------------------------------------

/// sourceip, sourceport, destip, destport, time.
Bindings scan_bindings(const FlowRecord& record);

/// "Vertical scan: <srcip>:<sport> to <dstip>:<dport> at <time>".
std::string format_scan_evidence(ScanKind kind, const Bindings& bindings);

struct ScanRulesetConfig {
  std::int64_t timeout_value = 900;
  TriggerPolicy policy;
  std::vector<Cidr> local_nets;
  Watchlist watchlist;
};

/// Three rules, evaluated for every record: the watchlist check, then the
/// vertical and horizontal scan rules (incoming traffic only).
Ruleset make_scan_ruleset(const ScanRulesetConfig& config);

}  // namespace flowscan
