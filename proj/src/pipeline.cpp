#include "flowscan/pipeline.hpp"

#include <chrono>
#include <ctime>

namespace flowscan {

namespace {

std::string format_date(std::time_t t) {
  std::tm tm{};
  localtime_r(&t, &tm);
  char buf[16];
  std::strftime(buf, sizeof buf, "%Y/%m/%d", &tm);
  return buf;
}

class TrafficSplitter {
 public:
  TrafficSplitter(const EngineConfig& config, std::string date, SinkSet& sinks)
      : nets_(config.local_nets), tz_(config.tz), date_(std::move(date)), sinks_(sinks) {}

  void operator()(const FlowRecord& r) {
    Direction d = classify_direction(r, nets_);
    line_.clear();
    append_fw_line(line_, r, d, date_, tz_);
    line_.push_back('\n');
    emit_traffic(line_, d, sinks_);
  }

 private:
  const std::vector<Cidr>& nets_;
  const std::string& tz_;
  std::string date_;
  SinkSet& sinks_;
  std::string line_;
};

}  // namespace

std::string resolve_date(const EngineConfig& config, const std::filesystem::path& input) {
  if (!config.date.empty()) return config.date;
  std::error_code ec;
  auto mtime = std::filesystem::last_write_time(input, ec);
  if (ec) return format_date(std::time(nullptr));
  auto sys = std::chrono::file_clock::to_sys(mtime);
  return format_date(std::chrono::system_clock::to_time_t(std::chrono::time_point_cast<std::chrono::seconds>(sys)));
}

PipelineResult run_pipeline(const std::vector<std::filesystem::path>& inputs, const EngineConfig& config,
                            SinkSet& sinks, bool retain_alerts) {
  Ruleset rules = make_scan_ruleset(make_ruleset_config(config));
  Engine engine(std::move(rules), [&](const Alert& a) { emit(a, sinks); }, Engine::Options{retain_alerts});
  EventClock clock;
  TrafficSplitter split(config, inputs.empty() ? config.date : resolve_date(config, inputs.front()), sinks);

  PipelineResult result;
  result.ingest = ingest_each(inputs, [&](const FlowRecord& r) {
    split(r);
    engine.process(r, clock.advance(r.event_time));
  });
  engine.flush();
  result.engine = engine.take_report();
  result.write_failures = sinks.write_failures;
  return result;
}

PipelineResult analyze(const std::vector<std::filesystem::path>& inputs, const EngineConfig& config,
                       std::shared_ptr<Sink> console) {
  validate(config);
  if (inputs.empty()) throw ConfigError("no input files");
  for (const auto& p : inputs) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(p, ec)) throw IoError("cannot open " + p.string());
  }
  std::filesystem::create_directories(config.output_dir);
  SinkSet sinks = SinkSet::open_files(batch_sink_paths(config.output_dir, inputs.front()), std::move(console));
  return run_pipeline(inputs, config, sinks);
}

PipelineResult follow(const std::filesystem::path& input, const EngineConfig& config, SinkSet& sinks,
                      const FollowOptions& options) {
  Ruleset rules = make_scan_ruleset(make_ruleset_config(config));
  Engine engine(std::move(rules), [&](const Alert& a) { emit(a, sinks); }, Engine::Options{false});

  auto start = std::chrono::steady_clock::now();
  auto clock = options.clock ? options.clock : [start] {
    return static_cast<std::int64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::steady_clock::now() - start).count());
  };
  EngineConfig dated = config;
  if (dated.date.empty()) dated.date = format_date(std::time(nullptr));
  TrafficSplitter split(dated, dated.date, sinks);

  LineStream stream(input, StreamMode::Follow);
  PipelineResult result;
  const auto tick = std::chrono::milliseconds{config.tick_interval * 1000};
  auto last_activity = std::chrono::steady_clock::now();
  for (;;) {
    if (options.should_stop && options.should_stop()) break;
    StreamEvent ev = stream.next(tick);
    switch (ev.kind) {
      case StreamEvent::Kind::Line: {
        last_activity = std::chrono::steady_clock::now();
        ++result.ingest.lines_read;
        auto parsed = parse_line(ev.text);
        if (auto* r = std::get_if<FlowRecord>(&parsed)) {
          ++result.ingest.records_parsed;
          split(*r);
          engine.process(*r, clock());
        } else {
          ++result.ingest.parse_failures;
        }
        break;
      }
      case StreamEvent::Kind::Reset:
        if (options.notice) options.notice("stream reset: " + input.string() + " was truncated or replaced");
        break;
      case StreamEvent::Kind::Idle:
      case StreamEvent::Kind::End:
        break;
    }
    engine.expire_contexts(clock());
    if (options.idle_exit_seconds > 0 &&
        std::chrono::steady_clock::now() - last_activity >= std::chrono::seconds{options.idle_exit_seconds})
      break;
  }
  if (options.flush_on_exit) engine.flush();
  result.engine = engine.take_report();
  result.write_failures = sinks.write_failures;
  return result;
}

BaselineReport run_baseline(const std::vector<std::filesystem::path>& inputs, const EngineConfig& config,
                            SinkSet& sinks, IngestStats* stats) {
  validate(config);
  BaselineOptions opts;
  opts.local_nets = config.local_nets;
  opts.watchlist = make_ruleset_config(config).watchlist;
  opts.date = inputs.empty() ? config.date : resolve_date(config, inputs.front());
  opts.tz = config.tz;
  opts.traffic = [&sinks](std::string_view line, Direction d) {
    std::string l(line);
    l.push_back('\n');
    emit_traffic(l, d, sinks);
  };
  BaselineScanner scanner(opts);
  IngestStats s = ingest_each(inputs, [&](const FlowRecord& r) { scanner.feed(r); });
  if (stats) *stats = s;
  BaselineReport report = scanner.take_report();

  std::string block;
  for (const auto& l : report.portscan_lines) block += l + "\n";
  if (sinks.portscans) sinks.portscans->write(block);
  block.clear();
  for (const auto& l : report.vulscan_lines) block += l + "\n";
  if (sinks.vulscans) sinks.vulscans->write(block);
  return report;
}

CompareResult compare(const std::vector<std::filesystem::path>& inputs, const EngineConfig& config) {
  CompareResult out;
  SinkSet null = SinkSet::null();
  out.engine = run_pipeline(inputs, config, null).engine;
  out.baseline = run_baseline(inputs, config, null);
  out.diff = compare_reports(out.engine, out.baseline);
  return out;
}

}  // namespace flowscan
