// Detection outputs and the context identity they are keyed by.
#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "flowscan/types.hpp"

namespace flowscan {

enum class ScanKind : std::uint8_t { Vertical, Horizontal };

std::string_view to_string(ScanKind k);

/// Identity of a scan context. `fixed` holds the local address (Vertical)
/// or the local port (Horizontal).
struct ContextKey {
  ScanKind kind = ScanKind::Vertical;
  Ipv4 remote_ip;
  std::uint32_t fixed = 0;

  static ContextKey vertical(Ipv4 remote, Ipv4 local) { return {ScanKind::Vertical, remote, local.value}; }
  static ContextKey horizontal(Ipv4 remote, Port local_port) { return {ScanKind::Horizontal, remote, local_port}; }

  Ipv4 local_ip() const { return Ipv4{fixed}; }
  Port local_port() const { return static_cast<Port>(fixed); }

  /// "10.0.0.7" for Vertical, "port 12346" for Horizontal.
  std::string fixed_to_string() const;

  std::uint64_t packed() const {
    return (std::uint64_t{static_cast<std::uint8_t>(kind)} << 63) ^
           (std::uint64_t{remote_ip.value} << 31) ^ fixed;
  }

  friend constexpr auto operator<=>(const ContextKey&, const ContextKey&) = default;
};

struct ContextKeyHash {
  std::size_t operator()(const ContextKey& k) const noexcept {
    std::uint64_t x = k.packed() + 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return static_cast<std::size_t>(x ^ (x >> 31));
  }
};

enum class WatchDirection : std::uint8_t { In, Out };

struct WatchlistEntry {
  std::string name;
  Port port = 0;
  WatchDirection direction = WatchDirection::In;

  friend bool operator==(const WatchlistEntry&, const WatchlistEntry&) = default;
};

struct ScanAlert {
  ScanKind kind = ScanKind::Vertical;
  Ipv4 remote_ip;
  std::uint32_t fixed = 0;
  std::vector<std::string> evidence;
  std::int64_t first_seen = 0;  // engine time, seconds
  std::int64_t last_seen = 0;
  TimeOfDay first_time;         // log timestamps of the first and last message
  TimeOfDay last_time;
  std::size_t distinct_targets = 0;

  ContextKey key() const { return {kind, remote_ip, fixed}; }

  friend bool operator==(const ScanAlert&, const ScanAlert&) = default;
};

struct VulnAlert {
  WatchlistEntry entry;
  FlowRecord record;
  Direction direction = Direction::Incoming;

  friend bool operator==(const VulnAlert&, const VulnAlert&) = default;
};

using Alert = std::variant<ScanAlert, VulnAlert>;

/// A scan reduced to what detectors are compared on: kind, scanner and the
/// fixed target (local address for Vertical, local port for Horizontal).
struct Detection {
  ScanKind kind = ScanKind::Vertical;
  Ipv4 scanner;
  std::uint32_t target = 0;

  friend constexpr auto operator<=>(const Detection&, const Detection&) = default;
};

std::vector<Detection> scan_detections(const std::vector<Alert>& alerts);

using AlertHandler = std::function<void(const Alert&)>;

}  // namespace flowscan
