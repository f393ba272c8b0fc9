#include "flowscan/reporting.hpp"

#include <charconv>
#include <ostream>
#include <set>

namespace flowscan {

namespace {

void append_port(std::string& out, Port p) {
  char buf[8];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, p);
  out.append(buf, end);
}

void append_endpoint(std::string& out, Ipv4 ip, Port port) {
  ip.append_to(out);
  out.push_back(':');
  append_port(out, port);
}

void write_counted(const std::shared_ptr<Sink>& sink, std::string_view block, SinkSet& sinks) {
  if (!sink) return;
  try {
    sink->write(block);
  } catch (const IoError&) {
    ++sinks.write_failures;
  }
}

}  // namespace

void append_fw_line(std::string& out, const FlowRecord& r, Direction direction, std::string_view date,
                    std::string_view tz) {
  out += direction == Direction::Incoming ? "FWIN," : "FWOUT,";
  out += date;
  out.push_back(',');
  r.event_time.append_to(out);
  out.push_back(' ');
  out += tz;
  out += " GMT,";
  append_endpoint(out, r.source_ip, r.source_port);
  out.push_back(',');
  append_endpoint(out, r.dest_ip, r.dest_port);
  out.push_back(',');
  out += to_string(r.protocol);
}

std::string format_fw_line(const FlowRecord& record, Direction direction, std::string_view date, std::string_view tz) {
  std::string s;
  append_fw_line(s, record, direction, date, tz);
  return s;
}

std::string format_scan_summary(const ScanAlert& a) {
  std::string s(to_string(a.kind));
  s += " scan from ";
  a.remote_ip.append_to(s);
  s += a.kind == ScanKind::Vertical ? " against " : " on ";
  s += a.key().fixed_to_string();
  s += ": ";
  s += std::to_string(a.evidence.size());
  s += a.evidence.size() == 1 ? " message between " : " messages between ";
  a.first_time.append_to(s);
  s += " and ";
  a.last_time.append_to(s);
  return s;
}

std::string format_scan_alert(const ScanAlert& a) {
  std::string s = format_scan_summary(a);
  s.push_back('\n');
  for (const auto& line : a.evidence) {
    s += line;
    s.push_back('\n');
  }
  return s;
}

std::string format_vuln_alert(const VulnAlert& a) {
  std::string s = "Potential Vulnerability: ";
  s += a.entry.name;
  s += ".\n ";
  a.record.event_time.append_to(s);
  s += ": ";
  append_endpoint(s, a.record.source_ip, a.record.source_port);
  s += " -> ";
  append_endpoint(s, a.record.dest_ip, a.record.dest_port);
  s.push_back('\n');
  return s;
}

void MemorySink::write(std::string_view block) {
  std::lock_guard lock(mu_);
  data_.append(block);
}

std::string MemorySink::contents() const {
  std::lock_guard lock(mu_);
  return data_;
}

FileSink::FileSink(const std::filesystem::path& path, bool flush_each_write)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), flush_each_write_(flush_each_write) {
  if (!out_) throw IoError("cannot open " + path.string() + " for writing");
}

void FileSink::write(std::string_view block) {
  std::lock_guard lock(mu_);
  out_.write(block.data(), static_cast<std::streamsize>(block.size()));
  if (flush_each_write_) out_.flush();
  if (!out_) {
    out_.clear();
    throw IoError("write failed on " + path_.string());
  }
}

void StreamSink::write(std::string_view block) {
  std::lock_guard lock(mu_);
  out_.write(block.data(), static_cast<std::streamsize>(block.size()));
  out_.flush();
  if (!out_) {
    out_.clear();
    throw IoError("console write failed");
  }
}

SinkPaths batch_sink_paths(const std::filesystem::path& output_dir, const std::filesystem::path& input) {
  std::string base = input.filename().string();
  return {output_dir / ("incoming_" + base), output_dir / ("outgoing_" + base), output_dir / ("portscans_" + base),
          output_dir / ("vulscans_" + base)};
}

SinkPaths follow_sink_paths(const std::filesystem::path& output_dir) {
  return {output_dir / "incoming.log", output_dir / "outgoing.log", output_dir / "portscans.log",
          output_dir / "vulscans.log"};
}

SinkSet SinkSet::open_files(const SinkPaths& paths, std::shared_ptr<Sink> console) {
  std::set<std::filesystem::path> distinct;
  for (const auto* p : {&paths.incoming, &paths.outgoing, &paths.portscans, &paths.vulscans})
    distinct.insert(std::filesystem::weakly_canonical(*p));
  if (distinct.size() != 4) throw ConfigError("output paths must be distinct");

  SinkSet s;
  // Traffic splits are large; buffer them and flush on close.
  s.incoming = std::make_shared<FileSink>(paths.incoming, false);
  s.outgoing = std::make_shared<FileSink>(paths.outgoing, false);
  s.portscans = std::make_shared<FileSink>(paths.portscans);
  s.vulscans = std::make_shared<FileSink>(paths.vulscans);
  s.console = std::move(console);
  return s;
}

SinkSet SinkSet::null() {
  auto n = std::make_shared<NullSink>();
  return {n, n, n, n, nullptr, 0};
}

void emit(const Alert& alert, SinkSet& sinks) {
  if (const auto* scan = std::get_if<ScanAlert>(&alert)) {
    write_counted(sinks.portscans, format_scan_alert(*scan), sinks);
    if (sinks.console) write_counted(sinks.console, format_scan_summary(*scan) + "\n", sinks);
  } else {
    write_counted(sinks.vulscans, format_vuln_alert(std::get<VulnAlert>(alert)), sinks);
  }
}

void emit_traffic(std::string_view fw_line, Direction direction, SinkSet& sinks) {
  write_counted(direction == Direction::Incoming ? sinks.incoming : sinks.outgoing, fw_line, sinks);
}

}  // namespace flowscan
