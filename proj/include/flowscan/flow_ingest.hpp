// Flow log line grammar, file streaming (batch and follow) and ingestion.
//
// Accepted line grammar (anchored, no whitespace):
//
//   ^([0-9]+),([0-9]+),([0-9]+:[0-9]+:[0-9]+),(TCP|UDP|ICMP),
//    ([0-9.]+):([0-9]+|--),([0-9.]+):([0-9]+|--),[0-9]+,([0-9]+)$
//
// On top of the grammar, addresses must be valid dotted quads, ports must be
// <= 65535 and numeric fields must fit in 64 bits.
#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "flowscan/types.hpp"

namespace flowscan {

struct ParseError {
  std::size_t offset = 0;    // byte offset of the first violation
  std::string_view reason;   // static string

  friend bool operator==(const ParseError&, const ParseError&) = default;
};

using ParseResult = std::variant<FlowRecord, ParseError>;

/// Pure; safe to call from any thread.
ParseResult parse_line(std::string_view line);

/// Renders a record in the input grammar. Port 0 is written as `--`.
std::string format_record(const FlowRecord& record);
void append_record(std::string& out, const FlowRecord& record);

struct IngestStats {
  std::uint64_t lines_read = 0;
  std::uint64_t records_parsed = 0;
  std::uint64_t parse_failures = 0;

  friend bool operator==(const IngestStats&, const IngestStats&) = default;
};

enum class StreamMode { Batch, Follow };

struct StreamEvent {
  enum class Kind { Line, End, Idle, Reset };
  Kind kind = Kind::End;
  std::uint64_t line_number = 0;  // 1-based, restarts after Reset
  std::string_view text;          // valid until the next call to next()
};

/// Line reader over a file. Batch mode ends at EOF (a final unterminated line
/// is delivered). Follow mode never ends: at EOF it waits for the file to
/// grow, holding back partial lines until their newline arrives, and reports
/// truncation or replacement of the file as a Reset before rereading it
/// from the start.
class LineStream {
 public:
  LineStream(const std::filesystem::path& path, StreamMode mode);  // throws IoError
  ~LineStream();
  LineStream(LineStream&&) noexcept;
  LineStream& operator=(LineStream&&) noexcept;

  /// Batch: Line or End. Follow: Line, Reset, or Idle when nothing arrived
  /// within `wait`.
  StreamEvent next(std::chrono::milliseconds wait = std::chrono::milliseconds{0});

  StreamMode mode() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

using RecordCallback = std::function<void(const FlowRecord&)>;

/// Batch-reads each file in order as one continuous stream and calls `on_record`
/// for every parseable line. Malformed lines are only counted.
IngestStats ingest_each(const std::vector<std::filesystem::path>& paths, const RecordCallback& on_record);

struct IngestResult {
  std::vector<FlowRecord> records;
  IngestStats stats;
};

IngestResult ingest(const std::filesystem::path& path);
IngestResult ingest_lines(const std::vector<std::string>& lines);

}  // namespace flowscan
