// Shared helpers for the unit and acceptance tests.
#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "flowscan/baseline.hpp"
#include "flowscan/config.hpp"
#include "flowscan/correlation.hpp"
#include "flowscan/flow_ingest.hpp"
#include "flowscan/scan_rules.hpp"
#include "flowscan/synth.hpp"

namespace testing {

namespace fs = std::filesystem;
using namespace flowscan;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("flowscan_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline FlowRecord rec(std::string_view line) { return std::get<FlowRecord>(parse_line(line)); }

// The four NetBus probes of the slow-scan example, in log order.
inline std::vector<FlowRecord> netbus_probes() {
  return {rec("1,2,14:03:33,TCP,5.5.5.10:3434,10.1.2.5:12346,7,10"),
          rec("1,2,14:15:13,TCP,5.5.5.10:3434,10.1.2.6:12346,7,10"),
          rec("1,2,14:28:32,TCP,5.5.5.10:3434,10.1.2.7:12346,7,10"),
          rec("1,2,14:40:11,TCP,5.5.5.10:3434,10.1.2.8:12346,7,10")};
}

inline ScanRulesetConfig scan_config(std::int64_t timeout, TriggerPolicy policy = {}) {
  ScanRulesetConfig c;
  c.timeout_value = timeout;
  c.policy = policy;
  c.local_nets = {*Cidr::parse("10.0.0.0/8")};
  c.watchlist = Watchlist(default_watchlist());
  return c;
}

inline std::vector<ScanAlert> scan_alerts(const EngineReport& r) {
  std::vector<ScanAlert> out;
  for (const auto& a : r.alerts)
    if (auto* s = std::get_if<ScanAlert>(&a)) out.push_back(*s);
  return out;
}

inline std::vector<Ipv4> scanner_set(const std::vector<Detection>& ds) {
  std::vector<Ipv4> out;
  for (const auto& d : ds) out.push_back(d.scanner);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline BaselineOptions baseline_options() {
  BaselineOptions o;
  o.local_nets = {*Cidr::parse("10.0.0.0/8")};
  o.watchlist = Watchlist(default_watchlist());
  o.date = "2004/11/05";
  return o;
}

// Independent acceptance oracle for one log line: the anchored grammar via
// std::regex, then the numeric range checks applied to the captures.
inline bool digits_at_most(const std::string& d, const std::string& max) {
  std::size_t i = d.find_first_not_of('0');
  std::string v = i == std::string::npos ? "0" : d.substr(i);
  if (v.size() != max.size()) return v.size() < max.size();
  return v <= max;
}

inline bool oracle_accepts(const std::string& line) {
  static const std::regex re(
      "([0-9]+),([0-9]+),([0-9]+):([0-9]+):([0-9]+),(TCP|UDP|ICMP),([0-9.]+):([0-9]+|--),([0-9.]+):([0-9]+|--),"
      "([0-9]+),([0-9]+)");
  std::smatch m;
  if (!std::regex_match(line, m, re)) return false;
  const std::string u64max = "18446744073709551615";
  for (int g : {1, 2, 11, 12})
    if (!digits_at_most(m[g].str(), u64max)) return false;
  for (int g : {3, 4, 5})
    if (!digits_at_most(m[g].str(), "1000000000")) return false;
  for (int g : {7, 9}) {
    std::string ip = m[g].str();
    std::vector<std::string> parts;
    std::stringstream ss(ip);
    std::string part;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    if (!ip.empty() && ip.back() == '.') parts.push_back("");
    if (parts.size() != 4) return false;
    for (const auto& p : parts)
      if (p.empty() || p.size() > 3 || std::stoi(p) > 255) return false;
  }
  for (int g : {8, 10})
    if (m[g].str() != "--" && !digits_at_most(m[g].str(), "65535")) return false;
  return true;
}

}  // namespace testing
