// Rule/context correlation engine.
//
// Messages are matched against an ordered list of rules. A matching rule
// yields named bindings and runs its actions, which typically find or create a
// keyed context and append the message to it. Every context carries a sliding
// deadline (time of the last appended message + its timeout). When the engine
// clock reaches a deadline the context is removed and, if its trigger holds,
// its fire action produces an alert.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "flowscan/alerts.hpp"
#include "flowscan/types.hpp"

namespace flowscan {

/// Named captures produced by a rule match, in insertion order.
class Bindings {
 public:
  void set(std::string name, std::string value);
  const std::string* find(std::string_view name) const;
  const std::string& at(std::string_view name) const;  // throws std::out_of_range

  std::size_t size() const { return items_.size(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  friend bool operator==(const Bindings&, const Bindings&) = default;

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

class Engine;

using Matcher = std::function<std::optional<Bindings>(const FlowRecord&)>;
using Action = std::function<void(Engine&, const FlowRecord&, const Bindings&)>;

struct Rule {
  std::string id;
  Matcher matcher;
  std::vector<Action> actions;
  bool stop_on_match = false;  // skip the remaining rules after this one matches
};

struct Ruleset {
  std::vector<Rule> rules;
};

std::optional<Bindings> match_rule(const Rule& rule, const FlowRecord& message);

struct ContextMessage {
  FlowRecord record;
  std::int64_t time = 0;  // engine time when appended
  std::string text;
};

struct Context;

struct ContextBehavior {
  std::function<bool(const Context&)> trigger;
  std::function<Alert(const Context&)> on_fire;
};

struct Context {
  ContextKey key;
  std::uint64_t id = 0;  // unique per engine, identifies one lifetime of a key
  std::vector<ContextMessage> messages;
  std::int64_t deadline = 0;
  std::int64_t timeout_value = 0;
  std::shared_ptr<const ContextBehavior> behavior;

  /// Display name, e.g. "horizontal scan from 5.5.5.10".
  std::string name() const;
};

/// Refers to one lifetime of a context; stale once that context expires.
struct ContextHandle {
  ContextKey key;
  std::uint64_t id = 0;

  friend bool operator==(const ContextHandle&, const ContextHandle&) = default;
};

/// Raised when a message is appended to a context that has already expired.
class AddToExpired : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct EngineReport {
  std::vector<Alert> alerts;
  std::uint64_t contexts_created = 0;
  std::uint64_t contexts_expired = 0;
  std::uint64_t contexts_fired = 0;
  std::uint64_t messages_processed = 0;

  friend bool operator==(const EngineReport&, const EngineReport&) = default;
};

struct EngineOptions {
  bool retain_alerts = true;  // keep alerts in the report (off for long-running follow mode)
};

class Engine {
 public:
  using Options = EngineOptions;

  explicit Engine(Ruleset ruleset, AlertHandler on_alert = {}, Options options = {});

  /// Advances the clock to `now` (the clock never moves backwards), expires
  /// due contexts, then evaluates the rules in order.
  void process(const FlowRecord& record, std::int64_t now);

  /// Advances the clock and fires every context whose deadline <= now, in key order.
  std::vector<Alert> expire_contexts(std::int64_t now);

  /// Expires every live context regardless of its deadline (end of stream).
  std::vector<Alert> flush();

  ContextHandle ensure_context(const ContextKey& key, std::int64_t timeout_value,
                               std::shared_ptr<const ContextBehavior> behavior);
  /// Appends at the current engine time and slides the deadline. Throws AddToExpired.
  void add_to_context(const ContextHandle& handle, const FlowRecord& message, std::string formatted);
  /// Emits an alert that is not tied to a context (e.g. a watchlist hit).
  void raise(Alert alert);

  /// nullptr once the handle's context has expired.
  const Context* context(const ContextHandle& handle) const;
  const Context* find_context(const ContextKey& key) const;
  std::size_t live_contexts() const { return contexts_.size(); }
  std::vector<const Context*> live_context_list() const;  // key order

  std::int64_t now() const { return now_; }
  const EngineReport& report() const { return report_; }
  EngineReport take_report();

 private:
  struct DeadlineEntry {
    std::int64_t deadline;
    ContextKey key;
    std::uint64_t id;
    bool operator>(const DeadlineEntry& o) const { return deadline > o.deadline; }
  };

  std::vector<Alert> expire_due();
  std::vector<Alert> fire(std::vector<Context> expired);
  void deliver(const Alert& alert);

  Ruleset ruleset_;
  AlertHandler on_alert_;
  Options options_;
  std::unordered_map<ContextKey, Context, ContextKeyHash> contexts_;
  std::priority_queue<DeadlineEntry, std::vector<DeadlineEntry>, std::greater<>> deadlines_;
  std::int64_t now_ = 0;
  std::uint64_t next_id_ = 1;
  EngineReport report_;
};

/// Maps date-less HH:MM:SS stamps onto a monotone engine clock in seconds.
/// A drop of more than 12 hours is taken as a midnight wrap; smaller drops
/// are clamped to the current clock.
class EventClock {
 public:
  std::int64_t advance(TimeOfDay t);
  std::int64_t now() const { return now_; }

 private:
  bool started_ = false;
  std::int64_t day_offset_ = 0;
  std::uint32_t last_tod_ = 0;
  std::int64_t now_ = 0;
};

/// Batch run over an ordered record sequence, clocked by event time, with a
/// final flush that evaluates every remaining context.
EngineReport run_engine(const std::vector<FlowRecord>& records, Ruleset ruleset, AlertHandler on_alert = {});

}  // namespace flowscan
