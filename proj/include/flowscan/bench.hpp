// Throughput harness for the full pipeline (parse + correlate + emit to a null sink).
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flowscan/config.hpp"

namespace flowscan {

/// Messages per second reported for the original Lisp engine; printed for
/// comparison only, since the hardware behind it is unknown.
inline constexpr double kReferenceThroughput = 72000.0;

struct BenchResult {
  std::uint64_t messages = 0;
  double wall_time = 0.0;   // median of the repetitions, seconds
  double throughput = 0.0;  // messages / wall_time
  std::string fingerprint;  // hash of the engine config and input size
  std::vector<double> samples;
  std::size_t scan_alerts = 0;
  std::size_t vuln_alerts = 0;
};

/// Throws ConfigError if repetitions < 3, IoError if the log is unreadable.
BenchResult measure_throughput(const std::filesystem::path& log_path, const EngineConfig& config,
                               unsigned repetitions);

/// `bench messages=<n> wall_time=<s> throughput=<msg/s> reference=72000 ratio=<x> fingerprint=<hex>`
std::string format_bench_record(const BenchResult& result);
std::string format_bench_summary(const BenchResult& result);

}  // namespace flowscan
