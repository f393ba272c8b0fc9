#include "flowscan/alerts.hpp"
#include "flowscan/types.hpp"

#include <charconv>

namespace flowscan {

namespace {

void append_uint(std::string& out, std::uint64_t v) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

void append_two_digits(std::string& out, unsigned v) {
  out.push_back(static_cast<char>('0' + v / 10));
  out.push_back(static_cast<char>('0' + v % 10));
}

}  // namespace

std::optional<Ipv4> Ipv4::parse(std::string_view text) {
  std::uint32_t value = 0;
  std::size_t pos = 0;
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (pos >= text.size() || text[pos] != '.') return std::nullopt;
      ++pos;
    }
    std::size_t start = pos;
    unsigned part = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      part = part * 10 + static_cast<unsigned>(text[pos] - '0');
      if (part > 255 || pos - start >= 3) return std::nullopt;
      ++pos;
    }
    if (pos == start) return std::nullopt;
    value = (value << 8) | part;
  }
  if (pos != text.size()) return std::nullopt;
  return Ipv4{value};
}

void Ipv4::append_to(std::string& out) const {
  for (int shift = 24; shift >= 0; shift -= 8) {
    append_uint(out, (value >> shift) & 0xffu);
    if (shift) out.push_back('.');
  }
}

std::string Ipv4::to_string() const {
  std::string s;
  append_to(s);
  return s;
}

std::optional<Cidr> Cidr::parse(std::string_view text) {
  auto slash = text.find('/');
  auto addr = Ipv4::parse(text.substr(0, slash));
  if (!addr) return std::nullopt;
  int prefix = 32;
  if (slash != std::string_view::npos) {
    auto digits = text.substr(slash + 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), prefix);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty() || prefix < 0 || prefix > 32)
      return std::nullopt;
  }
  Cidr c{*addr, prefix};
  c.network.value &= prefix == 0 ? 0u : ~std::uint32_t{0} << (32 - prefix);
  return c;
}

bool Cidr::contains(Ipv4 addr) const {
  if (prefix == 0) return true;
  std::uint32_t mask = ~std::uint32_t{0} << (32 - prefix);
  return (addr.value & mask) == network.value;
}

std::string Cidr::to_string() const {
  std::string s = network.to_string();
  s.push_back('/');
  append_uint(s, static_cast<std::uint64_t>(prefix));
  return s;
}

void TimeOfDay::append_to(std::string& out) const {
  append_two_digits(out, hours());
  out.push_back(':');
  append_two_digits(out, minutes());
  out.push_back(':');
  append_two_digits(out, secs());
}

std::string TimeOfDay::to_string() const {
  std::string s;
  append_to(s);
  return s;
}

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::TCP: return "TCP";
    case Protocol::UDP: return "UDP";
    case Protocol::ICMP: return "ICMP";
  }
  return "?";
}

std::string_view to_string(Direction d) { return d == Direction::Incoming ? "Incoming" : "Outgoing"; }

std::string_view to_string(ScanKind k) { return k == ScanKind::Vertical ? "Vertical" : "Horizontal"; }

std::string ContextKey::fixed_to_string() const {
  if (kind == ScanKind::Vertical) return local_ip().to_string();
  std::string s = "port ";
  append_uint(s, local_port());
  return s;
}

std::vector<Detection> scan_detections(const std::vector<Alert>& alerts) {
  std::vector<Detection> out;
  for (const auto& alert : alerts)
    if (const auto* scan = std::get_if<ScanAlert>(&alert)) out.push_back({scan->kind, scan->remote_ip, scan->fixed});
  return out;
}

}  // namespace flowscan
