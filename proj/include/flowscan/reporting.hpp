// Output formats and sinks: FWIN/FWOUT traffic splits, the portscans and
// vulscans files, and console alerts.
#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "flowscan/alerts.hpp"
#include "flowscan/types.hpp"

namespace flowscan {

/// `FWIN|FWOUT,<date>,<time> <tz> GMT,<src>:<sport>,<dst>:<dport>,<proto>`
std::string format_fw_line(const FlowRecord& record, Direction direction, std::string_view date, std::string_view tz);
void append_fw_line(std::string& out, const FlowRecord& record, Direction direction, std::string_view date,
                    std::string_view tz);

/// One-line summary, also used as the header of the alert block.
/// e.g. "Horizontal scan from 5.5.5.10 on port 12346: 4 messages between 14:03:33 and 14:40:11"
std::string format_scan_summary(const ScanAlert& alert);

/// Header line followed by one evidence line per message, each newline-terminated.
std::string format_scan_alert(const ScanAlert& alert);

/// "Potential Vulnerability: <name>.\n <time>: <src>:<sport> -> <dst>:<dport>\n"
std::string format_vuln_alert(const VulnAlert& alert);

/// Append-only text destination. Implementations serialize writes, so a
/// block passed to write() never interleaves with another.
class Sink {
 public:
  virtual ~Sink() = default;
  virtual void write(std::string_view block) = 0;  // throws IoError
};

class NullSink final : public Sink {
 public:
  void write(std::string_view) override {}
};

class MemorySink final : public Sink {
 public:
  void write(std::string_view block) override;
  std::string contents() const;

 private:
  mutable std::mutex mu_;
  std::string data_;
};

class FileSink final : public Sink {
 public:
  /// Truncates or creates the file. Throws IoError.
  explicit FileSink(const std::filesystem::path& path, bool flush_each_write = true);
  void write(std::string_view block) override;

 private:
  std::mutex mu_;
  std::filesystem::path path_;
  std::ofstream out_;
  bool flush_each_write_;
};

class StreamSink final : public Sink {
 public:
  explicit StreamSink(std::ostream& out) : out_(out) {}
  void write(std::string_view block) override;

 private:
  std::mutex mu_;
  std::ostream& out_;
};

struct SinkPaths {
  std::filesystem::path incoming;
  std::filesystem::path outgoing;
  std::filesystem::path portscans;
  std::filesystem::path vulscans;
};

/// Batch naming: incoming_<input>, outgoing_<input>, portscans_<input>, vulscans_<input>.
SinkPaths batch_sink_paths(const std::filesystem::path& output_dir, const std::filesystem::path& input);
/// Follow naming: incoming.log, outgoing.log, portscans.log, vulscans.log.
SinkPaths follow_sink_paths(const std::filesystem::path& output_dir);

struct SinkSet {
  std::shared_ptr<Sink> incoming;
  std::shared_ptr<Sink> outgoing;
  std::shared_ptr<Sink> portscans;
  std::shared_ptr<Sink> vulscans;
  std::shared_ptr<Sink> console;  // may be null
  std::uint64_t write_failures = 0;

  /// Opens all four files; paths must be distinct. Throws ConfigError / IoError.
  static SinkSet open_files(const SinkPaths& paths, std::shared_ptr<Sink> console);
  static SinkSet null();
};

/// Scan alert: block to portscans, summary line to console. Vuln alert: vulscans.
/// Write failures are counted in `sinks.write_failures`, never thrown.
void emit(const Alert& alert, SinkSet& sinks);
/// `fw_line` must be newline-terminated.
void emit_traffic(std::string_view fw_line, Direction direction, SinkSet& sinks);

}  // namespace flowscan
