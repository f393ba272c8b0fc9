#include "flowscan/baseline.hpp"

#include <algorithm>
#include <set>

#include "flowscan/reporting.hpp"

namespace flowscan {

namespace {

std::string endpoints(const FlowRecord& r) {
  std::string s;
  r.source_ip.append_to(s);
  s += ':' + std::to_string(r.source_port) + " -> ";
  r.dest_ip.append_to(s);
  s += ':' + std::to_string(r.dest_port);
  return s;
}

void add_vuln_lines(BaselineReport& report, const WatchlistEntry& entry, const FlowRecord& r) {
  report.vulscan_lines.push_back("Potential Vulnerability: " + entry.name + ".");
  report.vulscan_lines.push_back(" " + r.event_time.to_string() + ": " + endpoints(r));
}

}  // namespace

BaselineScanner::BaselineScanner(const BaselineOptions& options) : options_(options) {
  if (options_.local_nets.empty()) throw ConfigError("at least one local network is required");
}

void BaselineScanner::feed(const FlowRecord& r) {
  const bool have_prev = have_last_;
  const FlowRecord prev = last_;
  last_ = r;
  have_last_ = true;

  Direction dir = classify_direction(r, options_.local_nets);
  if (options_.traffic) options_.traffic(format_fw_line(r, dir, options_.date, options_.tz), dir);

  if (dir == Direction::Outgoing) {
    ++report_.outgoing_lines;
    if (const auto* hit = options_.watchlist.find(WatchDirection::Out, r.source_port))
      add_vuln_lines(report_, *hit, r);
  } else {
    ++report_.incoming_lines;
    bool scan_step = have_prev && r.source_ip == prev.source_ip &&
                     ((r.dest_ip == prev.dest_ip && r.dest_port != prev.dest_port) ||
                      (r.dest_port == prev.dest_port && r.dest_ip != prev.dest_ip));
    if (scan_step) {
      if (const auto* hit = options_.watchlist.find(WatchDirection::In, r.dest_port)) add_vuln_lines(report_, *hit, r);
      if (!ongoing_) {
        ongoing_ = true;
        ++report_.portscans;
        bool vertical = r.dest_ip == prev.dest_ip;
        report_.portscan_lines.push_back(std::string(vertical ? "Potential vertical portscan from "
                                                              : "Potential horizontal portscan from ") +
                                         prev.source_ip.to_string() + " at " + prev.event_time.to_string());
        report_.portscan_lines.push_back(endpoints(prev));
        report_.detections.push_back(vertical ? Detection{ScanKind::Vertical, r.source_ip, r.dest_ip.value}
                                              : Detection{ScanKind::Horizontal, r.source_ip, r.dest_port});
      }
      report_.portscan_lines.push_back(endpoints(r));
    } else {
      ongoing_ = false;
    }
  }

  ++counter_;
  if (options_.progress && counter_ % 10000 == 0) options_.progress(counter_);
}

BaselineReport baseline_scan(const std::vector<FlowRecord>& records, const BaselineOptions& options) {
  BaselineScanner scanner(options);
  for (const auto& r : records) scanner.feed(r);
  return scanner.take_report();
}

DiffSummary compare_reports(const EngineReport& engine, const BaselineReport& baseline) {
  std::set<Ipv4> engine_ips, baseline_ips;
  for (const auto& d : scan_detections(engine.alerts)) engine_ips.insert(d.scanner);
  for (const auto& d : baseline.detections) baseline_ips.insert(d.scanner);

  DiffSummary diff;
  std::set_intersection(engine_ips.begin(), engine_ips.end(), baseline_ips.begin(), baseline_ips.end(),
                        std::back_inserter(diff.both));
  std::set_difference(engine_ips.begin(), engine_ips.end(), baseline_ips.begin(), baseline_ips.end(),
                      std::back_inserter(diff.engine_only));
  std::set_difference(baseline_ips.begin(), baseline_ips.end(), engine_ips.begin(), engine_ips.end(),
                      std::back_inserter(diff.baseline_only));
  return diff;
}

std::vector<std::string> format_diff(const DiffSummary& diff) {
  std::vector<std::string> out;
  out.push_back("scanners found by both: " + std::to_string(diff.both.size()));
  out.push_back("scanners found by engine only: " + std::to_string(diff.engine_only.size()));
  out.push_back("scanners found by baseline only: " + std::to_string(diff.baseline_only.size()));
  for (auto ip : diff.both) out.push_back("both " + ip.to_string());
  for (auto ip : diff.engine_only) out.push_back("engine-only " + ip.to_string() + " (non-adjacent)");
  for (auto ip : diff.baseline_only) out.push_back("baseline-only " + ip.to_string());
  return out;
}

}  // namespace flowscan
