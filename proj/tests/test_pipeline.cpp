#include <thread>

#include "doctest.h"
#include "flowscan/pipeline.hpp"
#include "support.hpp"

using namespace flowscan;

namespace {

EngineConfig config_in(const testing::TempDir& dir) {
  EngineConfig c;
  c.date = "2004/11/05";
  c.output_dir = dir.path().string();
  return c;
}

}  // namespace

TEST_CASE("analyze writes the four output files") {
  testing::TempDir dir;
  auto log = generate(preset("netbus-slow"));
  write_log(log.records, dir / "scans.log");
  auto console = std::make_shared<MemorySink>();
  auto result = analyze({dir / "scans.log"}, config_in(dir), console);
  CHECK(result.ingest.lines_read == log.records.size());
  CHECK(testing::scan_alerts(result.engine).size() == 1);
  auto portscans = testing::read_file(dir / "portscans_scans.log");
  CHECK(portscans.starts_with("Horizontal scan from 5.5.5.10 on port 12346: 4 messages between 14:03:33 and 14:40:11\n"));
  CHECK(console->contents() == "Horizontal scan from 5.5.5.10 on port 12346: 4 messages between 14:03:33 and 14:40:11\n");

  auto in = testing::read_file(dir / "incoming_scans.log");
  auto out = testing::read_file(dir / "outgoing_scans.log");
  auto lines = [](const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); };
  CHECK(lines(in) + lines(out) == log.records.size());
  CHECK(in.starts_with("FWIN,2004/11/05,"));
  CHECK(out.starts_with("FWOUT,2004/11/05,"));
  CHECK(lines(testing::read_file(dir / "vulscans_scans.log")) == 8);

  SUBCASE("rerun is byte-identical") {
    testing::TempDir again;
    write_log(log.records, again / "scans.log");
    analyze({again / "scans.log"}, config_in(again), nullptr);
    for (auto name : {"incoming_scans.log", "outgoing_scans.log", "portscans_scans.log", "vulscans_scans.log"})
      CHECK(testing::read_file(dir / name) == testing::read_file(again / name));
  }
}

TEST_CASE("analyze: missing input is an I/O error") {
  testing::TempDir dir;
  CHECK_THROWS_AS(analyze({dir / "missing.log"}, config_in(dir), nullptr), IoError);
}

TEST_CASE("contexts carry across input files") {
  testing::TempDir dir;
  auto probes = testing::netbus_probes();
  write_log({probes[0], probes[1]}, dir / "a.log");
  write_log({probes[2], probes[3]}, dir / "b.log");
  SinkSet sinks = SinkSet::null();
  auto r = run_pipeline({dir / "a.log", dir / "b.log"}, config_in(dir), sinks);
  auto scans = testing::scan_alerts(r.engine);
  REQUIRE(scans.size() == 1);
  CHECK(scans[0].evidence.size() == 4);
}

TEST_CASE("run_pipeline matches run_engine") {
  testing::TempDir dir;
  auto log = generate(random_scan_config(9, Adjacency::Interleaved));
  write_log(log.records, dir / "r.log");
  SinkSet sinks = SinkSet::null();
  auto cfg = config_in(dir);
  auto piped = run_pipeline({dir / "r.log"}, cfg, sinks);
  auto direct = run_engine(log.records, make_scan_ruleset(make_ruleset_config(cfg)));
  CHECK(piped.engine == direct);
}

TEST_CASE("run_baseline and compare") {
  testing::TempDir dir;
  auto log = generate(preset("netbus-slow"));
  write_log(log.records, dir / "n.log");
  auto cfg = config_in(dir);
  auto sinks = SinkSet::open_files(batch_sink_paths(dir.path(), "n.log"), nullptr);
  IngestStats stats;
  auto b = run_baseline({dir / "n.log"}, cfg, sinks, &stats);
  CHECK(b.portscans == 0);
  CHECK(stats.lines_read == log.records.size());
  auto c = compare({dir / "n.log"}, cfg);
  CHECK(c.diff.engine_only == std::vector<Ipv4>{Ipv4::from_octets(5, 5, 5, 10)});
}

TEST_CASE("resolve_date") {
  testing::TempDir dir;
  testing::write_file(dir / "x.log", "");
  EngineConfig c;
  c.date = "2001/02/03";
  CHECK(resolve_date(c, dir / "x.log") == "2001/02/03");
  c.date.clear();
  CHECK(valid_date(resolve_date(c, dir / "x.log")));
}

TEST_CASE("follow mode") {
  testing::TempDir dir;
  auto path = dir / "live.log";
  testing::write_file(path, "");
  auto cfg = config_in(dir);
  cfg.timeout_value = 5;

  std::atomic<std::int64_t> fake_now{0};
  std::atomic<bool> stop{false};
  auto console = std::make_shared<MemorySink>();
  auto sinks = SinkSet::open_files(follow_sink_paths(dir.path()), console);
  auto incoming = std::make_shared<MemorySink>();
  sinks.incoming = incoming;
  FollowOptions opts;
  opts.clock = [&] { return fake_now.load(); };
  opts.should_stop = [&] { return stop.load(); };
  opts.flush_on_exit = false;

  PipelineResult result;
  std::thread runner([&] { result = follow(path, cfg, sinks, opts); });
  {
    std::ofstream out(path, std::ios::app);
    for (int p = 0; p < 3; ++p) out << "1,2,10:00:0" << p << ",TCP,6.6.6.6:999,10.0.0.9:" << 100 + p << ",0,1\n";
  }
  // the alert must come from a clock tick, not from a new line or a flush
  auto until = std::chrono::steady_clock::now() + std::chrono::seconds{10};
  while (std::chrono::steady_clock::now() < until) {
    std::this_thread::sleep_for(std::chrono::milliseconds{100});
    auto lines = incoming->contents();
    if (std::count(lines.begin(), lines.end(), '\n') == 3) break;
  }
  CHECK(console->contents().empty());
  fake_now = 10;
  until = std::chrono::steady_clock::now() + std::chrono::seconds{10};
  while (console->contents().empty() && std::chrono::steady_clock::now() < until)
    std::this_thread::sleep_for(std::chrono::milliseconds{50});
  stop = true;
  runner.join();
  CHECK(console->contents() == "Vertical scan from 6.6.6.6 against 10.0.0.9: 3 messages between 10:00:00 and 10:00:02\n");
  CHECK(result.ingest.lines_read == 3);
  CHECK(testing::read_file(dir / "portscans.log").starts_with("Vertical scan from 6.6.6.6"));
}

TEST_CASE("follow mode exits when idle and flushes") {
  testing::TempDir dir;
  auto path = dir / "idle.log";
  auto probes = testing::netbus_probes();
  write_log(probes, path);
  auto cfg = config_in(dir);
  auto sinks = SinkSet::open_files(follow_sink_paths(dir.path()), nullptr);
  FollowOptions opts;
  opts.idle_exit_seconds = 1;
  auto r = follow(path, cfg, sinks, opts);
  CHECK(r.ingest.lines_read == 4);
  // follow runs do not retain alerts, only counts
  CHECK(r.engine.alerts.empty());
  CHECK(r.engine.contexts_fired == 1);
}
