// Deterministic synthetic flow-log generator: background traffic plus
// injected vertical/horizontal scan campaigns, with ground truth.
//
// Ground truth text format (one scan per line, `#` starts a comment):
//
//   scan <Vertical|Horizontal> <scanner_ip> <target> probes=<n> lines=<l1>,<l2>,...
//
// <target> is the probed host for Vertical scans and the probed port for
// Horizontal scans; line numbers are 1-based positions in the generated log.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "flowscan/alerts.hpp"
#include "flowscan/types.hpp"

namespace flowscan {

enum class Adjacency { Adjacent, Interleaved };

struct ScanSpec {
  ScanKind kind = ScanKind::Horizontal;
  Ipv4 scanner_ip;
  std::uint32_t target = 0;        // local host (Vertical) or local port (Horizontal)
  std::uint32_t probes = 2;
  std::int64_t inter_probe_gap = 0;
  std::vector<std::int64_t> gaps;  // optional per-gap override, size probes-1
  std::int64_t start_time = 0;     // seconds after the start of the log
  Adjacency adjacency = Adjacency::Interleaved;
  Port source_port = 0;            // 0 = random ephemeral port
  std::uint32_t first_target = 0;  // first probed port (Vertical) / host (Horizontal); 0 = random

  std::int64_t span() const;

  friend bool operator==(const ScanSpec&, const ScanSpec&) = default;
};

struct GenConfig {
  std::int64_t duration = 3600;
  double background_rate = 10.0;  // flows per second
  double outgoing_fraction = 0.3;
  std::vector<Cidr> local_nets{*Cidr::parse("10.0.0.0/8")};
  std::uint64_t seed = 1;
  TimeOfDay start_clock = TimeOfDay::from_hms(14, 0, 0);
  std::vector<ScanSpec> scans;

  friend bool operator==(const GenConfig&, const GenConfig&) = default;
};

/// Throws ConfigError when an invariant is violated.
void validate(const GenConfig& config);

struct InjectedScan {
  ScanKind kind = ScanKind::Horizontal;
  Ipv4 scanner_ip;
  std::uint32_t target = 0;
  std::vector<std::uint64_t> probe_lines;

  Detection detection() const { return {kind, scanner_ip, target}; }
  friend bool operator==(const InjectedScan&, const InjectedScan&) = default;
};

struct GroundTruth {
  std::vector<InjectedScan> scans;
  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct GeneratedLog {
  std::vector<FlowRecord> records;  // sorted by event time
  GroundTruth truth;
};

/// Background flows never repeat a (source, dest host) or (source, dest port)
/// pair and never come from a scanner, so they cannot form a scan for either
/// trigger policy or for the adjacent-entry baseline.
GeneratedLog generate(const GenConfig& config);

void write_log(const std::vector<FlowRecord>& records, std::ostream& out);
void write_log(const std::vector<FlowRecord>& records, const std::filesystem::path& path);  // throws IoError

void write_ground_truth(const GroundTruth& truth, std::ostream& out);
GroundTruth read_ground_truth(std::istream& in);  // throws ConfigError

struct TruthScore {
  double recall = 0.0;
  std::size_t false_positives = 0;
};

/// A detection matches an injected scan when kind, scanner and target agree.
/// Duplicate detections are counted once. Recall is 1.0 when nothing was injected.
TruthScore ground_truth_check(const std::vector<Detection>& detections, const GroundTruth& truth);

/// Named presets. "netbus-slow": one slow horizontal scan of port 12346
/// (4 probes at 14:03:33, 14:15:13, 14:28:32, 14:40:11) interleaved with
/// about 10,800 background flows.
GenConfig preset(const std::string& name);  // throws ConfigError
std::vector<std::string> preset_names();

/// Random corpus of 1-5 scans from distinct scanners with distinct-target
/// probes and gaps of at most 120 s, all with the given adjacency.
GenConfig random_scan_config(std::uint64_t seed, Adjacency adjacency);

/// Background-only config sized to produce about `lines` records.
GenConfig bulk_config(std::uint64_t lines, std::uint64_t seed);

/// Uniform integer in [0, bound) from a 64-bit engine, independent of the
/// standard library's distribution implementation.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

}  // namespace flowscan
