#include <chrono>
#include <thread>

#include "doctest.h"
#include "support.hpp"

using namespace flowscan;
using testing::TempDir;

TEST_CASE("parse_line: NetBus probe line") {
  auto r = parse_line("1,2,14:03:33,TCP,10.1.2.3:3434,1.2.3.5:12346,7,10");
  REQUIRE(std::holds_alternative<FlowRecord>(r));
  const auto& f = std::get<FlowRecord>(r);
  CHECK(f.raw_field_1 == 1);
  CHECK(f.raw_field_2 == 2);
  CHECK(f.event_time == TimeOfDay::from_hms(14, 3, 33));
  CHECK(f.protocol == Protocol::TCP);
  CHECK(f.source_ip == Ipv4::from_octets(10, 1, 2, 3));
  CHECK(f.source_port == 3434);
  CHECK(f.dest_ip == Ipv4::from_octets(1, 2, 3, 5));
  CHECK(f.dest_port == 12346);
  CHECK(f.raw_field_8 == 7);
  CHECK(f.packets == 10);
}

TEST_CASE("parse_line: captures agree with the regex oracle") {
  std::regex re(
      "([0-9]+),([0-9]+),([0-9]+:[0-9]+:[0-9]+),(TCP|UDP|ICMP),([0-9.]+):([0-9]+|--),([0-9.]+):([0-9]+|--),"
      "[0-9]+,([0-9]+)");
  for (std::string line : {"1,2,14:03:33,TCP,10.1.2.3:3434,1.2.3.5:12346,7,10",
                           "99,0,00:00:00,UDP,192.168.0.1:53,10.0.0.2:1053,0,1",
                           "5,6,23:59:59,ICMP,8.8.8.8:--,10.9.9.9:--,1,123456"}) {
    std::smatch m;
    REQUIRE(std::regex_match(line, m, re));
    const auto& f = std::get<FlowRecord>(parse_line(line));
    CHECK(std::to_string(f.raw_field_1) == m[1].str());
    CHECK(std::to_string(f.raw_field_2) == m[2].str());
    CHECK(f.event_time.to_string() == m[3].str());
    CHECK(to_string(f.protocol) == m[4].str());
    CHECK(f.source_ip.to_string() == m[5].str());
    CHECK((m[6].str() == "--" ? "0" : m[6].str()) == std::to_string(f.source_port));
    CHECK(f.dest_ip.to_string() == m[7].str());
    CHECK((m[8].str() == "--" ? "0" : m[8].str()) == std::to_string(f.dest_port));
    CHECK(std::to_string(f.packets) == m[9].str());
  }
}

TEST_CASE("parse_line: ICMP dashes map to port 0") {
  const auto& f = std::get<FlowRecord>(parse_line("1,2,09:00:00,ICMP,10.0.0.1:--,1.2.3.4:--,7,1"));
  CHECK(f.protocol == Protocol::ICMP);
  CHECK(f.source_port == 0);
  CHECK(f.dest_port == 0);
}

TEST_CASE("parse_line: error offsets") {
  auto err = [](std::string_view line) {
    auto r = parse_line(line);
    REQUIRE(std::holds_alternative<ParseError>(r));
    return std::get<ParseError>(r).offset;
  };
  CHECK(err("") == 0);
  CHECK(err("x") == 0);
  CHECK(err("1") == 1);
  CHECK(err("1,2,14:03:33,TCX,1.2.3.4:1,1.2.3.5:2,7,10") == 15);
  CHECK(err("1,2,14:03:33,tcp,1.2.3.4:1,1.2.3.5:2,7,10") == 13);
  CHECK(err("1,2,14:03:33,TCP,1.2.3:1,1.2.3.5:2,7,10") == 17);
  CHECK(err("1,2,14:03:33,TCP,1.2.3.256:1,1.2.3.5:2,7,10") == 17);
  CHECK(err("1,2,14:03:33,TCP,1.2.3.4:65536,1.2.3.5:2,7,10") == 25);
  CHECK(err("1,2,14:03:33,TCP,1.2.3.4:-,1.2.3.5:2,7,10") == 26);
  CHECK(err("1,2,14:03:33,TCP,1.2.3.4:1,1.2.3.5:2,7,10 ") == 41);
  CHECK(err("1,2,14:03:33,TCP,1.2.3.4:1,1.2.3.5:2,7,10\n") == 41);
  CHECK(err("1,2,14:03,TCP,1.2.3.4:1,1.2.3.5:2,7,10") == 9);
  CHECK(err("99999999999999999999,2,14:03:33,TCP,1.2.3.4:1,1.2.3.5:2,7,10") == 0);
}

TEST_CASE("parse_line: oversize time components wrap into the day") {
  const auto& f = std::get<FlowRecord>(parse_line("1,2,25:00:61,TCP,1.2.3.4:1,1.2.3.5:2,7,10"));
  CHECK(f.event_time.to_string() == "01:01:01");
}

TEST_CASE("format_record round trip") {
  auto log = generate(preset("netbus-slow"));
  for (const auto& r : log.records) {
    auto back = parse_line(format_record(r));
    REQUIRE(std::holds_alternative<FlowRecord>(back));
    CHECK(std::get<FlowRecord>(back) == r);
  }
}

TEST_CASE("parser agrees with the oracle on hand-picked edge cases") {
  for (std::string line : {"1,2,14:03:33,TCP,010.001.002.003:00080,1.2.3.5:2,7,10",
                           "1,2,14:03:33,TCP,1.2.3.4.5:1,1.2.3.5:2,7,10",
                           "1,2,14:03:33,TCP,1..3.4:1,1.2.3.5:2,7,10",
                           "1,2,14:03:33,TCP,1.2.3.4:1,1.2.3.5:2,7,18446744073709551615",
                           "1,2,14:03:33,TCP,1.2.3.4:1,1.2.3.5:2,7,18446744073709551616",
                           "1,2,1000000000:0:0,UDP,1.2.3.4:1,1.2.3.5:2,7,1",
                           "1,2,1000000001:0:0,UDP,1.2.3.4:1,1.2.3.5:2,7,1",
                           "1,2,0:0:0,ICMP,1.2.3.4:---,1.2.3.5:2,7,1", "1,2,0:0:0,ICMP,1.2.3.4:0,1.2.3.5:--,7,1"}) {
    INFO(line);
    CHECK(std::holds_alternative<FlowRecord>(parse_line(line)) == testing::oracle_accepts(line));
  }
}

TEST_CASE("LineStream batch") {
  TempDir dir;
  SUBCASE("three lines") {
    testing::write_file(dir / "a.log", "one\ntwo\nthree\n");
    LineStream s(dir / "a.log", StreamMode::Batch);
    std::vector<std::string> got;
    for (auto ev = s.next(); ev.kind == StreamEvent::Kind::Line; ev = s.next()) {
      got.emplace_back(ev.text);
      CHECK(ev.line_number == got.size());
    }
    CHECK(got == std::vector<std::string>{"one", "two", "three"});
    CHECK(s.next().kind == StreamEvent::Kind::End);
  }
  SUBCASE("empty file") {
    testing::write_file(dir / "e.log", "");
    LineStream s(dir / "e.log", StreamMode::Batch);
    CHECK(s.next().kind == StreamEvent::Kind::End);
  }
  SUBCASE("unterminated last line and CRLF") {
    testing::write_file(dir / "c.log", "a\r\nb");
    LineStream s(dir / "c.log", StreamMode::Batch);
    CHECK(s.next().text == "a");
    CHECK(s.next().text == "b");
    CHECK(s.next().kind == StreamEvent::Kind::End);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(LineStream(dir / "nope.log", StreamMode::Batch), IoError);
  }
}

TEST_CASE("LineStream follow sees appended lines in order") {
  TempDir dir;
  auto path = dir / "f.log";
  testing::write_file(path, "first\n");
  LineStream s(path, StreamMode::Follow);
  auto ev = s.next(std::chrono::milliseconds{200});
  REQUIRE(ev.kind == StreamEvent::Kind::Line);
  CHECK(ev.text == "first");
  CHECK(s.next(std::chrono::milliseconds{50}).kind == StreamEvent::Kind::Idle);

  std::thread writer([&] {
    std::ofstream out(path, std::ios::app);
    out << "second\nthi" << std::flush;
    std::this_thread::sleep_for(std::chrono::milliseconds{100});
    out << "rd\n" << std::flush;
  });
  std::vector<std::string> got;
  auto until = std::chrono::steady_clock::now() + std::chrono::seconds{5};
  while (got.size() < 2 && std::chrono::steady_clock::now() < until) {
    auto e = s.next(std::chrono::milliseconds{100});
    if (e.kind == StreamEvent::Kind::Line) got.emplace_back(e.text);
  }
  writer.join();
  CHECK(got == std::vector<std::string>{"second", "third"});
}

TEST_CASE("LineStream follow reports truncation as a reset") {
  TempDir dir;
  auto path = dir / "t.log";
  testing::write_file(path, "aaaaaaaa\nbbbbbbbb\n");
  LineStream s(path, StreamMode::Follow);
  CHECK(s.next(std::chrono::milliseconds{100}).text == "aaaaaaaa");
  CHECK(s.next(std::chrono::milliseconds{100}).text == "bbbbbbbb");
  testing::write_file(path, "c\n");
  auto ev = s.next(std::chrono::milliseconds{500});
  CHECK(ev.kind == StreamEvent::Kind::Reset);
  ev = s.next(std::chrono::milliseconds{500});
  REQUIRE(ev.kind == StreamEvent::Kind::Line);
  CHECK(ev.text == "c");
  CHECK(ev.line_number == 1);
}

TEST_CASE("ingest counts") {
  TempDir dir;
  SUBCASE("two valid, one malformed") {
    testing::write_file(dir / "m.log",
                        "1,2,14:03:33,TCP,1.2.3.4:1,10.0.0.1:2,7,10\n"
                        "garbage\n"
                        "1,2,14:03:34,TCP,1.2.3.4:1,10.0.0.1:3,7,10\n");
    auto r = ingest(dir / "m.log");
    CHECK(r.records.size() == 2);
    CHECK(r.stats.lines_read == 3);
    CHECK(r.stats.parse_failures == 1);
    CHECK(r.stats.records_parsed == 2);
    CHECK(r.records[0].dest_port == 2);
    CHECK(r.records[1].dest_port == 3);
  }
  SUBCASE("empty") {
    testing::write_file(dir / "z.log", "");
    auto r = ingest(dir / "z.log");
    CHECK(r.records.empty());
    CHECK(r.stats == IngestStats{});
  }
  SUBCASE("all malformed") {
    auto r = ingest_lines({"a", "b", ""});
    CHECK(r.records.empty());
    CHECK(r.stats.parse_failures == 3);
  }
  SUBCASE("10,000 generated lines") {
    GenConfig g;
    g.duration = 1000;
    g.background_rate = 10;
    g.seed = 7;
    auto log = generate(g);
    REQUIRE(log.records.size() == 10000);
    write_log(log.records, dir / "g.log");
    auto r = ingest(dir / "g.log");
    CHECK(r.records == log.records);
    CHECK(r.stats.parse_failures == 0);
  }
  SUBCASE("multiple files form one stream") {
    testing::write_file(dir / "p1.log", "1,2,14:03:33,TCP,1.2.3.4:1,10.0.0.1:2,7,10\n");
    testing::write_file(dir / "p2.log", "bad\n1,2,14:03:34,TCP,1.2.3.4:1,10.0.0.1:3,7,10\n");
    std::vector<Port> ports;
    auto stats = ingest_each({dir / "p1.log", dir / "p2.log"}, [&](const FlowRecord& r) { ports.push_back(r.dest_port); });
    CHECK(ports == std::vector<Port>{2, 3});
    CHECK(stats.lines_read == 3);
    CHECK(stats.parse_failures == 1);
  }
}
