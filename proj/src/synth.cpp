#include "flowscan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "flowscan/flow_ingest.hpp"

namespace flowscan {

namespace {

constexpr Port kBenignPorts[] = {80, 443, 53, 25, 22, 110, 143, 123, 993, 8080, 3306, 389};

Protocol protocol_for(Port port) { return port == 53 || port == 123 ? Protocol::UDP : Protocol::TCP; }

std::uint64_t host_count(const Cidr& net) { return std::uint64_t{1} << (32 - net.prefix); }

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t below(std::uint64_t bound) { return uniform_below(rng_, bound); }
  bool chance(double p) { return static_cast<double>(below(1'000'000)) < p * 1'000'000.0; }

  Ipv4 host_in(const Cidr& net) {
    std::uint64_t n = host_count(net);
    std::uint64_t offset = n > 2 ? 1 + below(n - 2) : below(n);
    return Ipv4{net.network.value + static_cast<std::uint32_t>(offset)};
  }

  Ipv4 local_host(const std::vector<Cidr>& nets) { return host_in(nets[below(nets.size())]); }

  Ipv4 remote_host(const std::vector<Cidr>& nets, const std::unordered_set<std::uint32_t>& excluded) {
    for (;;) {
      auto first = static_cast<std::uint8_t>(1 + below(223));
      if (first == 127) continue;
      Ipv4 ip = Ipv4::from_octets(first, static_cast<std::uint8_t>(below(256)), static_cast<std::uint8_t>(below(256)),
                                  static_cast<std::uint8_t>(1 + below(254)));
      bool local = std::any_of(nets.begin(), nets.end(), [&](const Cidr& c) { return c.contains(ip); });
      if (!local && !excluded.count(ip.value)) return ip;
    }
  }

  Port ephemeral_port() { return static_cast<Port>(1024 + below(65536 - 1024)); }

  FlowRecord base_record() {
    FlowRecord r;
    r.raw_field_1 = below(1000);
    r.raw_field_2 = below(1000);
    r.raw_field_8 = below(100000);
    r.packets = 1 + below(50);
    return r;
  }

 private:
  std::mt19937_64 rng_;
};

struct Event {
  std::int64_t time;
  std::uint64_t seq;
  FlowRecord record;
  int scan = -1;
};

// Places background flows so that no (source, dest host) or (source, dest
// port) pair ever repeats.
class BackgroundFactory {
 public:
  BackgroundFactory(Draw& draw, const GenConfig& config, std::unordered_set<std::uint32_t> scanners)
      : draw_(draw), config_(config), scanners_(std::move(scanners)) {}

  FlowRecord incoming() {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      FlowRecord r = draw_.base_record();
      r.source_ip = draw_.remote_host(config_.local_nets, scanners_);
      r.dest_ip = draw_.local_host(config_.local_nets);
      if (draw_.chance(0.02)) {
        r.protocol = Protocol::ICMP;
        r.source_port = r.dest_port = 0;
      } else {
        r.dest_port = kBenignPorts[draw_.below(std::size(kBenignPorts))];
        r.source_port = draw_.ephemeral_port();
        r.protocol = protocol_for(r.dest_port);
      }
      std::uint64_t host_key = (std::uint64_t{r.source_ip.value} << 32) | r.dest_ip.value;
      std::uint64_t port_key = (std::uint64_t{r.source_ip.value} << 32) | r.dest_port;
      if (host_keys_.count(host_key) || port_keys_.count(port_key)) continue;
      host_keys_.insert(host_key);
      port_keys_.insert(port_key);
      return r;
    }
    throw ConfigError("generator could not place a non-colliding background flow");
  }

  FlowRecord outgoing() {
    FlowRecord r = draw_.base_record();
    r.source_ip = draw_.local_host(config_.local_nets);
    r.dest_ip = draw_.remote_host(config_.local_nets, scanners_);
    r.dest_port = kBenignPorts[draw_.below(std::size(kBenignPorts))];
    r.source_port = draw_.ephemeral_port();
    r.protocol = protocol_for(r.dest_port);
    return r;
  }

 private:
  Draw& draw_;
  const GenConfig& config_;
  std::unordered_set<std::uint32_t> scanners_;
  std::unordered_set<std::uint64_t> host_keys_;
  std::unordered_set<std::uint64_t> port_keys_;
};

std::vector<std::int64_t> probe_offsets(const ScanSpec& s) {
  std::vector<std::int64_t> out{s.start_time};
  for (std::uint32_t i = 1; i < s.probes; ++i)
    out.push_back(out.back() + (s.gaps.empty() ? s.inter_probe_gap : s.gaps[i - 1]));
  return out;
}

}  // namespace

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) return 0;
  std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    std::uint64_t x = rng();
    if (x >= threshold) return x % bound;
  }
}

std::int64_t ScanSpec::span() const {
  if (probes < 2) return 0;
  if (!gaps.empty()) return std::accumulate(gaps.begin(), gaps.end(), std::int64_t{0});
  return inter_probe_gap * static_cast<std::int64_t>(probes - 1);
}

void validate(const GenConfig& c) {
  if (c.duration < 0) throw ConfigError("duration must be non-negative");
  if (!(c.background_rate >= 0.0) || !std::isfinite(c.background_rate))
    throw ConfigError("background_rate must be a non-negative number");
  if (!(c.outgoing_fraction >= 0.0 && c.outgoing_fraction <= 1.0))
    throw ConfigError("outgoing_fraction must be within [0, 1]");
  if (c.local_nets.empty()) throw ConfigError("at least one local network is required");
  for (std::size_t i = 0; i < c.scans.size(); ++i) {
    const auto& s = c.scans[i];
    std::string where = "scan " + std::to_string(i) + ": ";
    if (s.probes < 2) throw ConfigError(where + "probes must be >= 2");
    if (s.inter_probe_gap < 0) throw ConfigError(where + "inter_probe_gap must be >= 0");
    if (!s.gaps.empty() && s.gaps.size() != s.probes - 1) throw ConfigError(where + "gaps must have probes-1 entries");
    if (std::any_of(s.gaps.begin(), s.gaps.end(), [](std::int64_t g) { return g < 0; }))
      throw ConfigError(where + "gaps must be >= 0");
    if (s.start_time < 0 || s.start_time + s.span() > c.duration)
      throw ConfigError(where + "probes must fall within [0, duration]");
    if (std::any_of(c.local_nets.begin(), c.local_nets.end(), [&](const Cidr& n) { return n.contains(s.scanner_ip); }))
      throw ConfigError(where + "scanner_ip must be outside the local networks");
    if (s.kind == ScanKind::Horizontal && (s.target == 0 || s.target > 65535))
      throw ConfigError(where + "horizontal target must be a port in 1-65535");
    if (s.kind == ScanKind::Vertical && s.first_target != 0 && s.first_target + s.probes - 1 > 65535)
      throw ConfigError(where + "probed ports exceed 65535");
  }
  for (std::size_t i = 0; i < c.scans.size(); ++i) {
    if (c.scans[i].adjacency != Adjacency::Adjacent) continue;
    const auto& a = c.scans[i];
    for (std::size_t j = 0; j < c.scans.size(); ++j) {
      if (i == j) continue;
      const auto& b = c.scans[j];
      bool disjoint = a.start_time + a.span() < b.start_time || b.start_time + b.span() < a.start_time;
      if (!disjoint)
        throw ConfigError("scan " + std::to_string(i) + " is adjacent and overlaps scan " + std::to_string(j) +
                          " in time");
    }
  }
}

GeneratedLog generate(const GenConfig& config) {
  validate(config);
  Draw draw(config.seed);

  std::unordered_set<std::uint32_t> scanners;
  for (const auto& s : config.scans) scanners.insert(s.scanner_ip.value);
  BackgroundFactory background(draw, config, scanners);

  auto count = static_cast<std::uint64_t>(std::llround(static_cast<double>(config.duration) * config.background_rate));
  std::vector<std::int64_t> times;
  if (config.duration > 0) {
    times.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i)
      times.push_back(static_cast<std::int64_t>(draw.below(static_cast<std::uint64_t>(config.duration))));
    std::sort(times.begin(), times.end());
  }
  // Adjacent scans own their time window exclusively.
  for (const auto& s : config.scans) {
    if (s.adjacency != Adjacency::Adjacent) continue;
    std::int64_t lo = s.start_time, hi = s.start_time + s.span();
    std::erase_if(times, [&](std::int64_t t) { return t > lo && t <= hi; });
  }

  std::vector<Event> events;
  events.reserve(times.size() + 64);
  std::uint64_t seq = 0;
  for (std::int64_t t : times) {
    bool out = draw.chance(config.outgoing_fraction);
    events.push_back({t, seq++, out ? background.outgoing() : background.incoming()});
  }

  for (std::size_t k = 0; k < config.scans.size(); ++k) {
    const auto& s = config.scans[k];
    Port sport = s.source_port ? s.source_port : draw.ephemeral_port();
    std::uint32_t first = s.first_target;
    if (first == 0) {
      if (s.kind == ScanKind::Vertical) {
        first = static_cast<std::uint32_t>(1 + draw.below(std::min<std::uint64_t>(1024, 65536 - s.probes)));
      } else {
        const Cidr& net = config.local_nets.front();
        std::uint64_t room = host_count(net) > s.probes + 1 ? host_count(net) - s.probes - 1 : 1;
        first = net.network.value + 1 + static_cast<std::uint32_t>(draw.below(room));
      }
    }
    auto offsets = probe_offsets(s);
    for (std::uint32_t i = 0; i < s.probes; ++i) {
      FlowRecord r = draw.base_record();
      r.packets = 1 + draw.below(3);
      r.protocol = Protocol::TCP;
      r.source_ip = s.scanner_ip;
      r.source_port = sport;
      if (s.kind == ScanKind::Vertical) {
        r.dest_ip = Ipv4{s.target};
        r.dest_port = static_cast<Port>(first + i);
      } else {
        r.dest_ip = Ipv4{first + i};
        r.dest_port = static_cast<Port>(s.target);
      }
      events.push_back({offsets[i], seq++, r, static_cast<int>(k)});
      if (s.adjacency == Adjacency::Interleaved && i + 1 < s.probes)
        events.push_back({offsets[i], seq++, background.incoming()});
    }
  }

  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b) { return a.time != b.time ? a.time < b.time : a.seq < b.seq; });

  GeneratedLog log;
  log.records.reserve(events.size());
  for (const auto& s : config.scans) log.truth.scans.push_back({s.kind, s.scanner_ip, s.target, {}});
  for (std::size_t line = 0; line < events.size(); ++line) {
    Event& e = events[line];
    e.record.event_time = TimeOfDay{static_cast<std::uint32_t>(
        (static_cast<std::int64_t>(config.start_clock.seconds) + e.time) % TimeOfDay::kSecondsPerDay)};
    if (e.scan >= 0) log.truth.scans[static_cast<std::size_t>(e.scan)].probe_lines.push_back(line + 1);
    log.records.push_back(e.record);
  }
  return log;
}

void write_log(const std::vector<FlowRecord>& records, std::ostream& out) {
  std::string buf;
  buf.reserve(1 << 16);
  for (const auto& r : records) {
    append_record(buf, r);
    buf.push_back('\n');
    if (buf.size() > (1 << 16) - 128) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_log(const std::vector<FlowRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_log(records, out);
  out.flush();
  if (!out) throw IoError("write failed on " + path.string());
}

void write_ground_truth(const GroundTruth& truth, std::ostream& out) {
  out << "# flowscan ground truth v1\n";
  for (const auto& s : truth.scans) {
    out << "scan " << to_string(s.kind) << ' ' << s.scanner_ip.to_string() << ' '
        << (s.kind == ScanKind::Vertical ? Ipv4{s.target}.to_string() : std::to_string(s.target))
        << " probes=" << s.probe_lines.size() << " lines=";
    for (std::size_t i = 0; i < s.probe_lines.size(); ++i) out << (i ? "," : "") << s.probe_lines[i];
    out << '\n';
  }
}

GroundTruth read_ground_truth(std::istream& in) {
  GroundTruth truth;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto bad = [&] { return ConfigError("ground truth line " + std::to_string(lineno) + " is malformed"); };
    std::istringstream ls(line);
    std::string word, kind, scanner, target, probes, lines;
    if (!(ls >> word >> kind >> scanner >> target >> probes >> lines) || word != "scan") throw bad();
    InjectedScan s;
    if (kind == "Vertical")
      s.kind = ScanKind::Vertical;
    else if (kind == "Horizontal")
      s.kind = ScanKind::Horizontal;
    else
      throw bad();
    auto ip = Ipv4::parse(scanner);
    if (!ip) throw bad();
    s.scanner_ip = *ip;
    if (s.kind == ScanKind::Vertical) {
      auto t = Ipv4::parse(target);
      if (!t) throw bad();
      s.target = t->value;
    } else {
      try {
        s.target = static_cast<std::uint32_t>(std::stoul(target));
      } catch (const std::exception&) {
        throw bad();
      }
    }
    if (!lines.starts_with("lines=")) throw bad();
    std::istringstream ns(lines.substr(6));
    std::string n;
    while (std::getline(ns, n, ',')) {
      try {
        s.probe_lines.push_back(std::stoull(n));
      } catch (const std::exception&) {
        throw bad();
      }
    }
    truth.scans.push_back(std::move(s));
  }
  return truth;
}

TruthScore ground_truth_check(const std::vector<Detection>& detections, const GroundTruth& truth) {
  std::vector<Detection> unique = detections;
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

  TruthScore score;
  std::size_t found = 0;
  for (const auto& s : truth.scans)
    if (std::binary_search(unique.begin(), unique.end(), s.detection())) ++found;
  score.recall = truth.scans.empty() ? 1.0 : static_cast<double>(found) / static_cast<double>(truth.scans.size());

  std::vector<Detection> injected;
  for (const auto& s : truth.scans) injected.push_back(s.detection());
  std::sort(injected.begin(), injected.end());
  for (const auto& d : unique)
    if (!std::binary_search(injected.begin(), injected.end(), d)) ++score.false_positives;
  return score;
}

GenConfig preset(const std::string& name) {
  if (name == "netbus-slow") {
    GenConfig c;
    c.duration = 2700;
    c.background_rate = 4.0;
    c.seed = 20041105;
    c.start_clock = TimeOfDay::from_hms(14, 0, 0);
    ScanSpec s;
    s.kind = ScanKind::Horizontal;
    s.scanner_ip = Ipv4::from_octets(5, 5, 5, 10);
    s.source_port = 3434;
    s.target = 12346;
    s.first_target = Ipv4::from_octets(10, 1, 2, 5).value;
    s.probes = 4;
    s.inter_probe_gap = 720;
    s.gaps = {700, 799, 699};
    s.start_time = 213;
    s.adjacency = Adjacency::Interleaved;
    c.scans.push_back(s);
    return c;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() { return {"netbus-slow"}; }

GenConfig random_scan_config(std::uint64_t seed, Adjacency adjacency) {
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 7);
  auto below = [&](std::uint64_t n) { return uniform_below(rng, n); };

  GenConfig c;
  c.seed = seed;
  c.duration = 1800;
  c.background_rate = 1.0 + static_cast<double>(below(4));
  const std::uint64_t n = 1 + below(5);
  const std::int64_t segment = c.duration / static_cast<std::int64_t>(n);
  std::unordered_set<std::uint32_t> used;
  for (std::uint64_t k = 0; k < n; ++k) {
    ScanSpec s;
    s.kind = below(2) ? ScanKind::Vertical : ScanKind::Horizontal;
    do {
      s.scanner_ip = Ipv4::from_octets(static_cast<std::uint8_t>(100 + below(100)), static_cast<std::uint8_t>(below(256)),
                                       static_cast<std::uint8_t>(below(256)), static_cast<std::uint8_t>(1 + below(254)));
    } while (!used.insert(s.scanner_ip.value).second);
    s.probes = static_cast<std::uint32_t>(2 + below(7));
    std::int64_t room = segment * 3 / 4 / static_cast<std::int64_t>(s.probes - 1);
    s.inter_probe_gap = static_cast<std::int64_t>(below(static_cast<std::uint64_t>(std::min<std::int64_t>(121, room + 1))));
    s.start_time = segment * static_cast<std::int64_t>(k) + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(segment / 8)));
    s.adjacency = adjacency;
    if (s.kind == ScanKind::Vertical)
      s.target = Ipv4::from_octets(10, static_cast<std::uint8_t>(below(256)), static_cast<std::uint8_t>(below(256)),
                                   static_cast<std::uint8_t>(1 + below(254))).value;
    else
      s.target = static_cast<std::uint32_t>(1 + below(65535));
    c.scans.push_back(s);
  }
  return c;
}

GenConfig bulk_config(std::uint64_t lines, std::uint64_t seed) {
  GenConfig c;
  c.seed = seed;
  c.duration = 3600;
  c.background_rate = static_cast<double>(lines) / 3600.0;
  return c;
}

}  // namespace flowscan
