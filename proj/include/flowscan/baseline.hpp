// Single-record-memory batch scanner kept as a comparison oracle.
//
// Each incoming record is compared only with the record immediately before it
// in the log (whatever its direction). Same source plus either (same dest
// host, different dest port) or (same dest port, different dest host) starts
// or continues a scan; anything else ends it. Scans whose probes are not
// adjacent in the log are therefore invisible to it.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "flowscan/alerts.hpp"
#include "flowscan/correlation.hpp"
#include "flowscan/scan_rules.hpp"
#include "flowscan/types.hpp"

namespace flowscan {

struct BaselineOptions {
  std::vector<Cidr> local_nets;
  Watchlist watchlist;
  std::string date;
  std::string tz = "-5:00";
  /// Receives every FWIN/FWOUT line (without newline), if set.
  std::function<void(std::string_view, Direction)> traffic;
  /// Called with the running record count every 10,000 records, if set.
  std::function<void(std::uint64_t)> progress;
};

struct BaselineReport {
  std::uint64_t portscans = 0;  // scan-start events
  std::vector<std::string> portscan_lines;
  std::vector<std::string> vulscan_lines;
  std::uint64_t incoming_lines = 0;
  std::uint64_t outgoing_lines = 0;
  std::vector<Detection> detections;  // one per scan start, in log order

  friend bool operator==(const BaselineReport&, const BaselineReport&) = default;
};

BaselineReport baseline_scan(const std::vector<FlowRecord>& records, const BaselineOptions& options);

/// Streaming form of baseline_scan for input that is not held in memory.
class BaselineScanner {
 public:
  explicit BaselineScanner(const BaselineOptions& options);
  void feed(const FlowRecord& record);
  const BaselineReport& report() const { return report_; }
  BaselineReport take_report() { return std::move(report_); }

 private:
  BaselineOptions options_;
  BaselineReport report_;
  FlowRecord last_;
  bool have_last_ = false;
  bool ongoing_ = false;
  std::uint64_t counter_ = 0;
};

/// Scanner source addresses compared between the engine and the baseline.
struct DiffSummary {
  std::vector<Ipv4> both;
  std::vector<Ipv4> engine_only;    // all classified as non-adjacent scans
  std::vector<Ipv4> baseline_only;

  bool empty() const { return engine_only.empty() && baseline_only.empty(); }
  friend bool operator==(const DiffSummary&, const DiffSummary&) = default;
};

DiffSummary compare_reports(const EngineReport& engine, const BaselineReport& baseline);

/// Human-readable rendering, one line per entry.
std::vector<std::string> format_diff(const DiffSummary& diff);

}  // namespace flowscan
