#include "flowscan/correlation.hpp"

#include <algorithm>

namespace flowscan {

void Bindings::set(std::string name, std::string value) {
  for (auto& [k, v] : items_) {
    if (k == name) {
      v = std::move(value);
      return;
    }
  }
  items_.emplace_back(std::move(name), std::move(value));
}

const std::string* Bindings::find(std::string_view name) const {
  for (const auto& [k, v] : items_)
    if (k == name) return &v;
  return nullptr;
}

const std::string& Bindings::at(std::string_view name) const {
  if (const auto* v = find(name)) return *v;
  throw std::out_of_range("no binding named " + std::string(name));
}

std::optional<Bindings> match_rule(const Rule& rule, const FlowRecord& message) {
  if (!rule.matcher) return std::nullopt;
  return rule.matcher(message);
}

std::string Context::name() const {
  std::string s = key.kind == ScanKind::Vertical ? "vertical scan from " : "horizontal scan from ";
  key.remote_ip.append_to(s);
  return s;
}

Engine::Engine(Ruleset ruleset, AlertHandler on_alert, Options options)
    : ruleset_(std::move(ruleset)), on_alert_(std::move(on_alert)), options_(options) {}

void Engine::process(const FlowRecord& record, std::int64_t now) {
  expire_contexts(now);
  ++report_.messages_processed;
  for (const auto& rule : ruleset_.rules) {
    auto bindings = match_rule(rule, record);
    if (!bindings) continue;
    for (const auto& action : rule.actions) action(*this, record, *bindings);
    if (rule.stop_on_match) break;
  }
}

std::vector<Alert> Engine::expire_contexts(std::int64_t now) {
  now_ = std::max(now_, now);
  return expire_due();
}

std::vector<Alert> Engine::expire_due() {
  std::vector<Context> expired;
  while (!deadlines_.empty() && deadlines_.top().deadline <= now_) {
    DeadlineEntry entry = deadlines_.top();
    deadlines_.pop();
    auto it = contexts_.find(entry.key);
    // Entries left behind by a slid deadline or an earlier lifetime are stale.
    if (it == contexts_.end() || it->second.id != entry.id || it->second.deadline != entry.deadline) continue;
    expired.push_back(std::move(it->second));
    contexts_.erase(it);
  }
  if (expired.empty()) return {};
  return fire(std::move(expired));
}

std::vector<Alert> Engine::flush() {
  std::vector<Context> expired;
  expired.reserve(contexts_.size());
  for (auto& [key, ctx] : contexts_) expired.push_back(std::move(ctx));
  contexts_.clear();
  deadlines_ = {};
  return fire(std::move(expired));
}

std::vector<Alert> Engine::fire(std::vector<Context> expired) {
  std::sort(expired.begin(), expired.end(), [](const Context& a, const Context& b) { return a.key < b.key; });
  std::vector<Alert> alerts;
  for (const auto& ctx : expired) {
    ++report_.contexts_expired;
    if (!ctx.behavior || !ctx.behavior->trigger || !ctx.behavior->trigger(ctx)) continue;
    ++report_.contexts_fired;
    if (!ctx.behavior->on_fire) continue;
    Alert alert = ctx.behavior->on_fire(ctx);
    deliver(alert);
    alerts.push_back(std::move(alert));
  }
  return alerts;
}

ContextHandle Engine::ensure_context(const ContextKey& key, std::int64_t timeout_value,
                                     std::shared_ptr<const ContextBehavior> behavior) {
  if (timeout_value <= 0) throw std::invalid_argument("context timeout must be positive");
  expire_due();
  auto it = contexts_.find(key);
  if (it != contexts_.end()) return {key, it->second.id};

  Context ctx;
  ctx.key = key;
  ctx.id = next_id_++;
  ctx.timeout_value = timeout_value;
  ctx.deadline = now_ + timeout_value;
  ctx.behavior = std::move(behavior);
  deadlines_.push({ctx.deadline, key, ctx.id});
  ++report_.contexts_created;
  ContextHandle handle{key, ctx.id};
  contexts_.emplace(key, std::move(ctx));
  return handle;
}

void Engine::add_to_context(const ContextHandle& handle, const FlowRecord& message, std::string formatted) {
  auto it = contexts_.find(handle.key);
  if (it == contexts_.end() || it->second.id != handle.id || it->second.deadline <= now_)
    throw AddToExpired("add to expired context '" + (it == contexts_.end() ? handle.key.remote_ip.to_string()
                                                                            : it->second.name()) + "'");
  Context& ctx = it->second;
  ctx.messages.push_back({message, now_, std::move(formatted)});
  std::int64_t deadline = now_ + ctx.timeout_value;
  if (deadline != ctx.deadline) {
    ctx.deadline = deadline;
    deadlines_.push({deadline, ctx.key, ctx.id});
  }
}

void Engine::raise(Alert alert) {
  deliver(alert);
}

void Engine::deliver(const Alert& alert) {
  if (on_alert_) on_alert_(alert);
  if (options_.retain_alerts) report_.alerts.push_back(alert);
}

const Context* Engine::context(const ContextHandle& handle) const {
  auto it = contexts_.find(handle.key);
  if (it == contexts_.end() || it->second.id != handle.id) return nullptr;
  return &it->second;
}

const Context* Engine::find_context(const ContextKey& key) const {
  auto it = contexts_.find(key);
  return it == contexts_.end() ? nullptr : &it->second;
}

std::vector<const Context*> Engine::live_context_list() const {
  std::vector<const Context*> out;
  out.reserve(contexts_.size());
  for (const auto& [key, ctx] : contexts_) out.push_back(&ctx);
  std::sort(out.begin(), out.end(), [](const Context* a, const Context* b) { return a->key < b->key; });
  return out;
}

EngineReport Engine::take_report() {
  EngineReport r = std::move(report_);
  report_ = {};
  return r;
}

std::int64_t EventClock::advance(TimeOfDay t) {
  constexpr std::int64_t kHalfDay = TimeOfDay::kSecondsPerDay / 2;
  if (!started_) {
    started_ = true;
    last_tod_ = t.seconds;
    now_ = t.seconds;
    return now_;
  }
  if (static_cast<std::int64_t>(last_tod_) - static_cast<std::int64_t>(t.seconds) > kHalfDay)
    day_offset_ += TimeOfDay::kSecondsPerDay;
  last_tod_ = t.seconds;
  now_ = std::max(now_, day_offset_ + static_cast<std::int64_t>(t.seconds));
  return now_;
}

EngineReport run_engine(const std::vector<FlowRecord>& records, Ruleset ruleset, AlertHandler on_alert) {
  Engine engine(std::move(ruleset), std::move(on_alert));
  EventClock clock;
  for (const auto& record : records) engine.process(record, clock.advance(record.event_time));
  engine.flush();
  return engine.take_report();
}

}  // namespace flowscan
