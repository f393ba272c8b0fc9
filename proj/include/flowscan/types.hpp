// Core value types shared by every flowscan module.
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace flowscan {

/// Failure to open, read or write a file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration (bad flag value, malformed config file, bad generator spec).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Port = std::uint16_t;

/// IPv4 address in host byte order.
struct Ipv4 {
  std::uint32_t value = 0;

  static std::optional<Ipv4> parse(std::string_view text);
  static constexpr Ipv4 from_octets(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
    return Ipv4{(std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) | d};
  }

  std::string to_string() const;
  void append_to(std::string& out) const;

  friend constexpr auto operator<=>(Ipv4, Ipv4) = default;
};

/// IPv4 network in CIDR notation, e.g. 10.0.0.0/8.
struct Cidr {
  Ipv4 network;
  int prefix = 32;

  static std::optional<Cidr> parse(std::string_view text);
  bool contains(Ipv4 addr) const;
  std::string to_string() const;

  friend constexpr bool operator==(const Cidr&, const Cidr&) = default;
};

/// Seconds since midnight, always normalized into [0, 86400).
struct TimeOfDay {
  static constexpr std::uint32_t kSecondsPerDay = 86400;
  std::uint32_t seconds = 0;

  static constexpr TimeOfDay from_hms(std::uint64_t h, std::uint64_t m, std::uint64_t s) {
    return TimeOfDay{static_cast<std::uint32_t>((h * 3600 + m * 60 + s) % kSecondsPerDay)};
  }
  constexpr unsigned hours() const { return seconds / 3600; }
  constexpr unsigned minutes() const { return seconds / 60 % 60; }
  constexpr unsigned secs() const { return seconds % 60; }

  /// HH:MM:SS
  std::string to_string() const;
  void append_to(std::string& out) const;

  friend constexpr auto operator<=>(TimeOfDay, TimeOfDay) = default;
};

enum class Protocol : std::uint8_t { TCP, UDP, ICMP };

std::string_view to_string(Protocol p);

/// One parsed log line. Port value 0 stands for the `--` token.
struct FlowRecord {
  std::uint64_t raw_field_1 = 0;
  std::uint64_t raw_field_2 = 0;
  TimeOfDay event_time;
  Protocol protocol = Protocol::TCP;
  Ipv4 source_ip;
  Port source_port = 0;
  Ipv4 dest_ip;
  Port dest_port = 0;
  std::uint64_t raw_field_8 = 0;
  std::uint64_t packets = 0;

  friend bool operator==(const FlowRecord&, const FlowRecord&) = default;
};

enum class Direction : std::uint8_t { Incoming, Outgoing };

std::string_view to_string(Direction d);

}  // namespace flowscan
