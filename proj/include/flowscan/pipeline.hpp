// End-to-end processing: ingest -> traffic split -> correlation engine -> sinks.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "flowscan/baseline.hpp"
#include "flowscan/config.hpp"
#include "flowscan/correlation.hpp"
#include "flowscan/flow_ingest.hpp"
#include "flowscan/reporting.hpp"

namespace flowscan {

struct PipelineResult {
  EngineReport engine;
  IngestStats ingest;
  std::uint64_t write_failures = 0;
};

/// Processes the inputs as one continuous stream (contexts carry across file
/// boundaries) and flushes the engine after the last file. Alerts are written
/// to `sinks` as they are produced.
PipelineResult run_pipeline(const std::vector<std::filesystem::path>& inputs, const EngineConfig& config,
                            SinkSet& sinks, bool retain_alerts = true);

/// run_pipeline with files in config.output_dir named after the first input.
PipelineResult analyze(const std::vector<std::filesystem::path>& inputs, const EngineConfig& config,
                       std::shared_ptr<Sink> console);

struct FollowOptions {
  /// Polled between reads; returning true ends the run.
  std::function<bool()> should_stop;
  /// Stop after this many seconds without new lines (0 = never).
  std::int64_t idle_exit_seconds = 0;
  /// Engine clock in seconds; defaults to a monotonic wall clock.
  std::function<std::int64_t()> clock;
  /// Informational messages (stream resets).
  std::function<void(std::string_view)> notice;
  /// Fire remaining contexts when the run ends.
  bool flush_on_exit = true;
};

/// Real-time mode: tails `input`, clocks the engine by wall time and expires
/// contexts on every tick even when no lines arrive.
PipelineResult follow(const std::filesystem::path& input, const EngineConfig& config, SinkSet& sinks,
                      const FollowOptions& options);

/// Runs the baseline over the inputs, writing its traffic split, banners and
/// vulnerability lines to `sinks`.
BaselineReport run_baseline(const std::vector<std::filesystem::path>& inputs, const EngineConfig& config,
                            SinkSet& sinks, IngestStats* stats = nullptr);

struct CompareResult {
  EngineReport engine;
  BaselineReport baseline;
  DiffSummary diff;
};

CompareResult compare(const std::vector<std::filesystem::path>& inputs, const EngineConfig& config);

/// config.date, or the first input's modification date when that is empty.
std::string resolve_date(const EngineConfig& config, const std::filesystem::path& input);

}  // namespace flowscan
