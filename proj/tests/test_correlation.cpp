#include "doctest.h"
#include "support.hpp"

using namespace flowscan;

namespace {

// Fires with a ScanAlert whenever the context holds at least two messages.
std::shared_ptr<const ContextBehavior> two_or_more() {
  auto b = std::make_shared<ContextBehavior>();
  b->trigger = [](const Context& c) { return c.messages.size() >= 2; };
  b->on_fire = [](const Context& c) -> Alert { return make_scan_alert(c); };
  return b;
}

const ContextKey kKey = ContextKey::horizontal(Ipv4::from_octets(5, 5, 5, 10), 12346);

std::int64_t at(unsigned h, unsigned m, unsigned s) { return TimeOfDay::from_hms(h, m, s).seconds; }

}  // namespace

TEST_CASE("Bindings keep insertion order and overwrite in place") {
  Bindings b;
  b.set("b", "1");
  b.set("a", "2");
  b.set("b", "3");
  REQUIRE(b.size() == 2);
  CHECK(b.begin()->first == "b");
  CHECK(b.at("b") == "3");
  CHECK(b.find("zz") == nullptr);
  CHECK_THROWS_AS(b.at("zz"), std::out_of_range);
}

TEST_CASE("match_rule") {
  auto r = testing::rec("1,2,14:03:33,TCP,5.5.5.10:3434,10.1.2.5:12346,7,10");
  Rule scan;
  scan.matcher = [](const FlowRecord& f) -> std::optional<Bindings> { return scan_bindings(f); };
  SUBCASE("scan rule binds the record fields") {
    auto b = match_rule(scan, r);
    REQUIRE(b);
    CHECK(b->at("sourceip") == r.source_ip.to_string());
    CHECK(b->at("sourceport") == std::to_string(r.source_port));
    CHECK(b->at("destip") == r.dest_ip.to_string());
    CHECK(b->at("destport") == std::to_string(r.dest_port));
    CHECK(b->at("time") == r.event_time.to_string());
  }
  SUBCASE("matcher that rejects everything") {
    Rule none;
    none.matcher = [](const FlowRecord&) -> std::optional<Bindings> { return std::nullopt; };
    CHECK_FALSE(match_rule(none, r));
    CHECK_FALSE(match_rule(Rule{}, r));
  }
  SUBCASE("deterministic") { CHECK(*match_rule(scan, r) == *match_rule(scan, r)); }
}

TEST_CASE("ensure_context identity") {
  Engine e(Ruleset{});
  e.expire_contexts(100);
  auto h1 = e.ensure_context(kKey, 900, two_or_more());
  CHECK(e.report().contexts_created == 1);
  auto h2 = e.ensure_context(kKey, 900, two_or_more());
  CHECK(h1 == h2);
  CHECK(e.report().contexts_created == 1);
  REQUIRE(e.context(h1) != nullptr);
  CHECK(e.context(h1)->deadline == 1000);
  CHECK(e.context(h1)->name() == "horizontal scan from 5.5.5.10");

  e.expire_contexts(1000);
  CHECK(e.context(h1) == nullptr);
  auto h3 = e.ensure_context(kKey, 900, two_or_more());
  CHECK(h3.id != h1.id);
  CHECK(e.report().contexts_created == 2);
  CHECK_THROWS_AS(e.ensure_context(kKey, 0, two_or_more()), std::invalid_argument);
}

TEST_CASE("add_to_context slides the deadline") {
  auto msg = testing::rec("1,2,14:03:33,TCP,5.5.5.10:3434,10.1.2.5:12346,7,10");
  Engine e(Ruleset{});
  SUBCASE("by the inter-arrival gap") {
    e.expire_contexts(500);
    auto h = e.ensure_context(kKey, 300, two_or_more());
    e.add_to_context(h, msg, "a");
    CHECK(e.context(h)->deadline == 800);
    e.expire_contexts(620);
    e.add_to_context(h, msg, "b");
    CHECK(e.context(h)->messages.size() == 2);
    CHECK(e.context(h)->deadline == 800 + 120);
  }
  SUBCASE("unchanged for an equal timestamp") {
    e.expire_contexts(500);
    auto h = e.ensure_context(kKey, 300, two_or_more());
    e.add_to_context(h, msg, "a");
    e.add_to_context(h, msg, "b");
    CHECK(e.context(h)->deadline == 800);
  }
  SUBCASE("900 s timeout, 14:03:33 then 14:15:13") {
    e.expire_contexts(at(14, 3, 33));
    auto h = e.ensure_context(kKey, 900, two_or_more());
    e.add_to_context(h, msg, "a");
    e.expire_contexts(at(14, 15, 13));
    e.add_to_context(h, msg, "b");
    CHECK(e.context(h)->deadline == at(14, 30, 13));
  }
  SUBCASE("adding to an expired context throws") {
    e.expire_contexts(0);
    auto h = e.ensure_context(kKey, 10, two_or_more());
    e.expire_contexts(10);
    CHECK_THROWS_AS(e.add_to_context(h, msg, "late"), AddToExpired);
    auto fresh = e.ensure_context(kKey, 10, two_or_more());
    CHECK_THROWS_AS(e.add_to_context(h, msg, "stale handle"), AddToExpired);
    CHECK_NOTHROW(e.add_to_context(fresh, msg, "ok"));
  }
}

TEST_CASE("expire_contexts") {
  auto msg = testing::rec("1,2,14:03:33,TCP,5.5.5.10:3434,10.1.2.5:12346,7,10");
  Engine e(Ruleset{});
  SUBCASE("two messages fire") {
    auto h = e.ensure_context(kKey, 60, two_or_more());
    e.add_to_context(h, msg, "a");
    e.add_to_context(h, msg, "b");
    auto alerts = e.expire_contexts(60);
    REQUIRE(alerts.size() == 1);
    CHECK(std::get<ScanAlert>(alerts[0]).evidence == std::vector<std::string>{"a", "b"});
    CHECK(e.live_contexts() == 0);
    CHECK(e.report().contexts_fired == 1);
  }
  SUBCASE("one message is dropped silently") {
    auto h = e.ensure_context(kKey, 60, two_or_more());
    e.add_to_context(h, msg, "a");
    CHECK(e.expire_contexts(60).empty());
    CHECK(e.live_contexts() == 0);
    CHECK(e.report().contexts_expired == 1);
    CHECK(e.report().contexts_fired == 0);
  }
  SUBCASE("nothing due") {
    auto h = e.ensure_context(kKey, 60, two_or_more());
    e.add_to_context(h, msg, "a");
    CHECK(e.expire_contexts(59).empty());
    CHECK(e.live_contexts() == 1);
  }
  SUBCASE("contexts due together fire in key order") {
    std::vector<ContextKey> keys;
    for (std::uint8_t i = 5; i > 0; --i) keys.push_back(ContextKey::horizontal(Ipv4::from_octets(9, 9, 9, i), 80));
    keys.push_back(ContextKey::vertical(Ipv4::from_octets(200, 0, 0, 1), Ipv4::from_octets(10, 0, 0, 1)));
    for (const auto& k : keys) {
      auto h = e.ensure_context(k, 30, two_or_more());
      e.add_to_context(h, msg, "x");
      e.add_to_context(h, msg, "y");
    }
    auto alerts = e.expire_contexts(30);
    REQUIRE(alerts.size() == keys.size());
    std::vector<ContextKey> fired;
    for (const auto& a : alerts) fired.push_back(std::get<ScanAlert>(a).key());
    CHECK(std::is_sorted(fired.begin(), fired.end()));
    CHECK(fired.front().kind == ScanKind::Vertical);
  }
  SUBCASE("the clock never moves backwards") {
    e.expire_contexts(100);
    e.expire_contexts(50);
    CHECK(e.now() == 100);
  }
}

TEST_CASE("flush evaluates every live context") {
  auto msg = testing::rec("1,2,14:03:33,TCP,5.5.5.10:3434,10.1.2.5:12346,7,10");
  Engine e(Ruleset{});
  auto h = e.ensure_context(kKey, 900, two_or_more());
  e.add_to_context(h, msg, "a");
  e.add_to_context(h, msg, "b");
  auto other = e.ensure_context(ContextKey::horizontal(Ipv4::from_octets(1, 1, 1, 1), 22), 900, two_or_more());
  e.add_to_context(other, msg, "c");
  CHECK(e.flush().size() == 1);
  CHECK(e.live_contexts() == 0);
  CHECK(e.report().contexts_expired == 2);
}

TEST_CASE("run_engine") {
  SUBCASE("empty stream") {
    auto r = run_engine({}, make_scan_ruleset(testing::scan_config(900)));
    CHECK(r == EngineReport{});
  }
  SUBCASE("NetBus stream, 900 s") {
    auto r = run_engine(testing::netbus_probes(), make_scan_ruleset(testing::scan_config(900)));
    auto scans = testing::scan_alerts(r);
    REQUIRE(scans.size() == 1);
    CHECK(scans[0].kind == ScanKind::Horizontal);
    CHECK(scans[0].remote_ip == Ipv4::from_octets(5, 5, 5, 10));
    CHECK(scans[0].fixed == 12346);
    CHECK(scans[0].evidence.size() == 4);
    CHECK(scans[0].distinct_targets == 4);
  }
  SUBCASE("NetBus stream, 60 s") {
    auto r = run_engine(testing::netbus_probes(), make_scan_ruleset(testing::scan_config(60)));
    CHECK(testing::scan_alerts(r).empty());
    CHECK(r.contexts_created == 8);
    CHECK(r.contexts_expired == 8);
  }
  SUBCASE("deterministic") {
    auto rs = [] { return make_scan_ruleset(testing::scan_config(900)); };
    CHECK(run_engine(testing::netbus_probes(), rs()) == run_engine(testing::netbus_probes(), rs()));
  }
  SUBCASE("handler sees the alerts in report order") {
    std::vector<Alert> seen;
    auto r = run_engine(testing::netbus_probes(), make_scan_ruleset(testing::scan_config(900)),
                        [&](const Alert& a) { seen.push_back(a); });
    CHECK(seen == r.alerts);
  }
}

TEST_CASE("a context survives any chain of gaps shorter than the timeout") {
  auto msg = testing::rec("1,2,14:03:33,TCP,5.5.5.10:3434,10.1.2.5:12346,7,10");
  Engine e(Ruleset{});
  auto h = e.ensure_context(kKey, 100, two_or_more());
  std::int64_t t = 0;
  for (int i = 0; i < 200; ++i) {
    t += 99;
    e.expire_contexts(t);
    REQUIRE(e.context(h) != nullptr);
    e.add_to_context(h, msg, "m");
  }
  CHECK(t > 100 * 100);
  CHECK(e.expire_contexts(t + 100).size() == 1);
}

TEST_CASE("EventClock") {
  EventClock c;
  CHECK(c.advance(TimeOfDay::from_hms(23, 59, 0)) == at(23, 59, 0));
  CHECK(c.advance(TimeOfDay::from_hms(23, 59, 30)) == at(23, 59, 30));
  CHECK(c.advance(TimeOfDay::from_hms(23, 58, 0)) == at(23, 59, 30));
  CHECK(c.advance(TimeOfDay::from_hms(0, 0, 10)) == 86400 + 10);
  CHECK(c.advance(TimeOfDay::from_hms(0, 1, 0)) == 86400 + 60);
}
