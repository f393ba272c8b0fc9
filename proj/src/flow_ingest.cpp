#include "flowscan/flow_ingest.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <thread>

namespace flowscan {

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ == s_.size(); }

  bool literal(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  // Consumes [0-9]* and returns how many digits were taken.
  std::size_t digits() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') ++pos_;
    return pos_ - start;
  }

  std::string_view slice(std::size_t from) const { return s_.substr(from, pos_ - from); }
  std::string_view rest() const { return s_.substr(pos_); }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

ParseError fail(std::size_t offset, std::string_view reason) { return ParseError{offset, reason}; }

bool to_u64(std::string_view digits, std::uint64_t& out) {
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), out);
  return ec == std::errc{} && ptr == digits.data() + digits.size();
}

constexpr std::uint64_t kMaxTimeComponent = 1'000'000'000;

// The parse steps report the first violation through `err` and return false.
struct LineParser {
  Cursor cur;
  ParseError err;

  bool number(std::uint64_t& out) {
    std::size_t start = cur.pos();
    if (cur.digits() == 0) return error(start, "expected digit");
    if (!to_u64(cur.slice(start), out)) return error(start, "number out of range");
    return true;
  }

  bool expect(char c) {
    if (!cur.literal(c)) {
      return error(cur.pos(), c == ',' ? "expected ','" : c == ':' ? "expected ':'" : "unexpected character");
    }
    return true;
  }

  bool time(TimeOfDay& out) {
    std::uint64_t hms[3];
    for (int i = 0; i < 3; ++i) {
      if (i > 0 && !expect(':')) return false;
      std::size_t start = cur.pos();
      if (!number(hms[i])) return false;
      if (hms[i] > kMaxTimeComponent) return error(start, "time component out of range");
    }
    out = TimeOfDay::from_hms(hms[0], hms[1], hms[2]);
    return true;
  }

  bool protocol(Protocol& out) {
    static constexpr std::pair<std::string_view, Protocol> kProtocols[] = {
        {"TCP", Protocol::TCP}, {"UDP", Protocol::UDP}, {"ICMP", Protocol::ICMP}};
    std::string_view rest = cur.rest();
    std::size_t best = 0;
    for (auto [name, proto] : kProtocols) {
      if (rest.starts_with(name)) {
        cur.advance(name.size());
        out = proto;
        return true;
      }
      std::size_t common = 0;
      while (common < name.size() && common < rest.size() && rest[common] == name[common]) ++common;
      best = std::max(best, common);
    }
    return error(cur.pos() + best, "expected TCP, UDP or ICMP");
  }

  bool address(Ipv4& out) {
    std::size_t start = cur.pos();
    while (!cur.at_end() && (cur.rest().front() == '.' || (cur.rest().front() >= '0' && cur.rest().front() <= '9')))
      cur.advance(1);
    if (cur.pos() == start) return error(start, "expected IPv4 address");
    auto ip = Ipv4::parse(cur.slice(start));
    if (!ip) return error(start, "invalid IPv4 address");
    out = *ip;
    return true;
  }

  bool port(Port& out) {
    std::size_t start = cur.pos();
    if (cur.literal('-')) {
      if (!cur.literal('-')) return error(cur.pos(), "expected '--'");
      out = 0;
      return true;
    }
    std::uint64_t v = 0;
    if (cur.digits() == 0) return error(start, "expected port");
    if (!to_u64(cur.slice(start), v) || v > 65535) return error(start, "port out of range");
    out = static_cast<Port>(v);
    return true;
  }

  bool error(std::size_t offset, std::string_view reason) {
    err = fail(offset, reason);
    return false;
  }
};

void append_port(std::string& out, Port p) {
  if (p == 0) {
    out += "--";
    return;
  }
  char buf[8];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, p);
  out.append(buf, end);
}

void append_u64(std::string& out, std::uint64_t v) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

}  // namespace

ParseResult parse_line(std::string_view line) {
  LineParser p{Cursor{line}, {}};
  FlowRecord r;
  bool ok = p.number(r.raw_field_1) && p.expect(',') &&
            p.number(r.raw_field_2) && p.expect(',') &&
            p.time(r.event_time) && p.expect(',') &&
            p.protocol(r.protocol) && p.expect(',') &&
            p.address(r.source_ip) && p.expect(':') && p.port(r.source_port) && p.expect(',') &&
            p.address(r.dest_ip) && p.expect(':') && p.port(r.dest_port) && p.expect(',') &&
            p.number(r.raw_field_8) && p.expect(',') &&
            p.number(r.packets);
  if (!ok) return p.err;
  if (!p.cur.at_end()) return fail(p.cur.pos(), "trailing characters");
  return r;
}

void append_record(std::string& out, const FlowRecord& r) {
  append_u64(out, r.raw_field_1);
  out.push_back(',');
  append_u64(out, r.raw_field_2);
  out.push_back(',');
  r.event_time.append_to(out);
  out.push_back(',');
  out += to_string(r.protocol);
  out.push_back(',');
  r.source_ip.append_to(out);
  out.push_back(':');
  append_port(out, r.source_port);
  out.push_back(',');
  r.dest_ip.append_to(out);
  out.push_back(':');
  append_port(out, r.dest_port);
  out.push_back(',');
  append_u64(out, r.raw_field_8);
  out.push_back(',');
  append_u64(out, r.packets);
}

std::string format_record(const FlowRecord& record) {
  std::string s;
  append_record(s, record);
  return s;
}

// ---------------------------------------------------------------------------
// LineStream

struct LineStream::Impl {
  std::filesystem::path path;
  StreamMode mode;
  int fd = -1;
  ino_t inode = 0;
  std::uint64_t offset = 0;  // bytes consumed from the file
  std::uint64_t line_number = 0;
  std::string buffer;
  std::size_t scan_from = 0;  // start of the unconsumed part of buffer
  std::string current;        // line handed out by the last next()
  bool eof = false;

  Impl(std::filesystem::path p, StreamMode m) : path(std::move(p)), mode(m) { open(); }
  ~Impl() { close(); }

  void open() {
    fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd < 0) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
    struct stat st {};
    if (::fstat(fd, &st) != 0 || S_ISDIR(st.st_mode)) {
      close();
      throw IoError("cannot read " + path.string() + ": not a regular file");
    }
    inode = st.st_ino;
    offset = 0;
    buffer.clear();
    scan_from = 0;
    eof = false;
  }

  void close() {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }

  // Appends newly available bytes; returns number read (0 at EOF).
  std::size_t fill() {
    if (scan_from > 0 && scan_from >= buffer.size() / 2) {
      buffer.erase(0, scan_from);
      scan_from = 0;
    }
    constexpr std::size_t kChunk = 1 << 16;
    std::size_t old = buffer.size();
    buffer.resize(old + kChunk);
    ssize_t n;
    do {
      n = ::read(fd, buffer.data() + old, kChunk);
    } while (n < 0 && errno == EINTR);
    if (n < 0) {
      buffer.resize(old);
      throw IoError("read failed on " + path.string() + ": " + std::strerror(errno));
    }
    buffer.resize(old + static_cast<std::size_t>(n));
    offset += static_cast<std::uint64_t>(n);
    return static_cast<std::size_t>(n);
  }

  bool take_line(StreamEvent& ev) {
    auto nl = buffer.find('\n', scan_from);
    if (nl == std::string::npos) return false;
    std::size_t len = nl - scan_from;
    if (len > 0 && buffer[nl - 1] == '\r') --len;
    current.assign(buffer, scan_from, len);
    scan_from = nl + 1;
    ev = {StreamEvent::Kind::Line, ++line_number, current};
    return true;
  }

  // True if the followed file was truncated or replaced.
  bool file_reset() {
    struct stat st {};
    if (::stat(path.c_str(), &st) != 0) return false;  // transiently missing during rotation
    if (st.st_ino != inode) return true;
    return static_cast<std::uint64_t>(st.st_size) < offset;
  }

  StreamEvent next(std::chrono::milliseconds wait) {
    StreamEvent ev;
    if (take_line(ev)) return ev;
    if (mode == StreamMode::Batch) {
      while (!eof) {
        if (fill() == 0) eof = true;
        if (take_line(ev)) return ev;
      }
      if (scan_from < buffer.size()) {
        std::size_t len = buffer.size() - scan_from;
        if (buffer.back() == '\r') --len;
        current.assign(buffer, scan_from, len);
        scan_from = buffer.size();
        return {StreamEvent::Kind::Line, ++line_number, current};
      }
      return {StreamEvent::Kind::End, line_number, {}};
    }

    auto deadline = std::chrono::steady_clock::now() + wait;
    for (;;) {
      while (fill() > 0) {
        if (take_line(ev)) return ev;
      }
      if (file_reset()) {
        close();
        open();
        line_number = 0;
        return {StreamEvent::Kind::Reset, 0, {}};
      }
      auto now = std::chrono::steady_clock::now();
      if (now >= deadline) return {StreamEvent::Kind::Idle, line_number, {}};
      auto nap = std::min<std::chrono::steady_clock::duration>(deadline - now, std::chrono::milliseconds{20});
      std::this_thread::sleep_for(nap);
    }
  }
};

LineStream::LineStream(const std::filesystem::path& path, StreamMode mode)
    : impl_(std::make_unique<Impl>(path, mode)) {}
LineStream::~LineStream() = default;
LineStream::LineStream(LineStream&&) noexcept = default;
LineStream& LineStream::operator=(LineStream&&) noexcept = default;

StreamEvent LineStream::next(std::chrono::milliseconds wait) { return impl_->next(wait); }
StreamMode LineStream::mode() const { return impl_->mode; }

// ---------------------------------------------------------------------------

IngestStats ingest_each(const std::vector<std::filesystem::path>& paths, const RecordCallback& on_record) {
  IngestStats stats;
  for (const auto& path : paths) {
    LineStream stream(path, StreamMode::Batch);
    for (auto ev = stream.next(); ev.kind == StreamEvent::Kind::Line; ev = stream.next()) {
      ++stats.lines_read;
      auto parsed = parse_line(ev.text);
      if (auto* rec = std::get_if<FlowRecord>(&parsed)) {
        ++stats.records_parsed;
        on_record(*rec);
      } else {
        ++stats.parse_failures;
      }
    }
  }
  return stats;
}

IngestResult ingest(const std::filesystem::path& path) {
  IngestResult result;
  result.stats = ingest_each({path}, [&](const FlowRecord& r) { result.records.push_back(r); });
  return result;
}

IngestResult ingest_lines(const std::vector<std::string>& lines) {
  IngestResult result;
  for (const auto& line : lines) {
    ++result.stats.lines_read;
    auto parsed = parse_line(line);
    if (auto* rec = std::get_if<FlowRecord>(&parsed)) {
      ++result.stats.records_parsed;
      result.records.push_back(*rec);
    } else {
      ++result.stats.parse_failures;
    }
  }
  return result;
}

}  // namespace flowscan
