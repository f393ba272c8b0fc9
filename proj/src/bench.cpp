#include "flowscan/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "flowscan/pipeline.hpp"

namespace flowscan {

namespace {

std::string fingerprint(const EngineConfig& config, std::uintmax_t size) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  mix(to_json(config));
  mix("|");
  mix(std::to_string(size));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

BenchResult measure_throughput(const std::filesystem::path& log_path, const EngineConfig& config,
                               unsigned repetitions) {
  if (repetitions < 3) throw ConfigError("bench needs at least 3 repetitions");
  validate(config);
  std::error_code ec;
  auto size = std::filesystem::file_size(log_path, ec);
  if (ec) throw IoError("cannot open " + log_path.string());

  BenchResult result;
  result.fingerprint = fingerprint(config, size);
  for (unsigned i = 0; i < repetitions; ++i) {
    SinkSet sinks = SinkSet::null();
    auto t0 = std::chrono::steady_clock::now();
    PipelineResult run = run_pipeline({log_path}, config, sinks);
    auto t1 = std::chrono::steady_clock::now();
    result.samples.push_back(std::chrono::duration<double>(t1 - t0).count());
    result.messages = run.ingest.lines_read;
    result.scan_alerts = 0;
    result.vuln_alerts = 0;
    for (const auto& a : run.engine.alerts) (std::holds_alternative<ScanAlert>(a) ? result.scan_alerts : result.vuln_alerts)++;
  }
  std::vector<double> sorted = result.samples;
  std::sort(sorted.begin(), sorted.end());
  std::size_t n = sorted.size();
  result.wall_time = n % 2 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
  result.throughput = result.wall_time > 0 ? static_cast<double>(result.messages) / result.wall_time : 0.0;
  return result;
}

std::string format_bench_record(const BenchResult& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "bench messages=%llu wall_time=%.6f throughput=%.0f reference=%.0f ratio=%.2f fingerprint=%s",
                static_cast<unsigned long long>(r.messages), r.wall_time, r.throughput, kReferenceThroughput,
                r.throughput / kReferenceThroughput, r.fingerprint.c_str());
  return buf;
}

std::string format_bench_summary(const BenchResult& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "Processed %llu messages in %.3f s (median of %zu runs): %.0f msg/s.\n"
                "Reference figure for the original engine: %.0f msg/s (different hardware; not comparable).\n"
                "Alerts: %zu scan, %zu vulnerability.",
                static_cast<unsigned long long>(r.messages), r.wall_time, r.samples.size(), r.throughput,
                kReferenceThroughput, r.scan_alerts, r.vuln_alerts);
  return buf;
}

}  // namespace flowscan
