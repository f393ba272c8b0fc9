// extern "C" surface over the C++ core.
#include "flowscan/flowscan.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>

#include "flowscan/bench.hpp"
#include "flowscan/config.hpp"
#include "flowscan/pipeline.hpp"
#include "flowscan/synth.hpp"

struct fs_config {
  flowscan::EngineConfig config;
};

struct fs_report {
  flowscan::IngestStats ingest;
  flowscan::EngineReport engine;
  std::uint64_t baseline_portscans = 0;
};

namespace {

thread_local std::string g_last_error;

fs_status fail(fs_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <class F>
fs_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return FS_OK;
  } catch (const flowscan::ConfigError& e) {
    return fail(FS_ERR_CONFIG, e.what());
  } catch (const flowscan::IoError& e) {
    return fail(FS_ERR_IO, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(FS_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(FS_ERR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(FS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(FS_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<std::filesystem::path> to_paths(const char* const* paths, size_t count) {
  if (count > 0 && !paths) throw flowscan::ConfigError("paths is null");
  std::vector<std::filesystem::path> out;
  for (size_t i = 0; i < count; ++i) {
    if (!paths[i]) throw flowscan::ConfigError("path is null");
    out.emplace_back(paths[i]);
  }
  if (out.empty()) throw flowscan::ConfigError("no input files");
  return out;
}

void require(const void* p, const char* what) {
  if (!p) throw flowscan::ConfigError(std::string(what) + " is null");
}

void check_inputs(const std::vector<std::filesystem::path>& inputs) {
  for (const auto& p : inputs) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(p, ec)) throw flowscan::IoError("cannot open " + p.string());
  }
}

// Forwards each newline-terminated line of a written block to a C callback.
class CallbackSink final : public flowscan::Sink {
 public:
  CallbackSink(fs_line_fn fn, void* user) : fn_(fn), user_(user) {}
  void write(std::string_view block) override {
    std::lock_guard lock(mu_);
    std::size_t start = 0;
    while (start < block.size()) {
      auto nl = block.find('\n', start);
      std::string line(block.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
      fn_(line.c_str(), user_);
      if (nl == std::string_view::npos) break;
      start = nl + 1;
    }
  }

 private:
  std::mutex mu_;
  fs_line_fn fn_;
  void* user_;
};

std::shared_ptr<flowscan::Sink> console_sink(fs_line_fn fn, void* user) {
  if (!fn) return nullptr;
  return std::make_shared<CallbackSink>(fn, user);
}

template <class T>
std::uint64_t count_alerts(const fs_report* r) {
  if (!r) return 0;
  std::uint64_t n = 0;
  for (const auto& a : r->engine.alerts) n += std::holds_alternative<T>(a);
  return n;
}

}  // namespace

extern "C" {

const char* fs_version(void) { return "1.0.0"; }

const char* fs_last_error(void) { return g_last_error.c_str(); }

void fs_string_free(char* s) { std::free(s); }

fs_status fs_config_create(fs_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new fs_config{};
  });
}

void fs_config_destroy(fs_config* config) { delete config; }

fs_status fs_config_load_file(fs_config* config, const char* path) {
  return guarded([&] {
    require(config, "config");
    require(path, "path");
    config->config = flowscan::load_engine_config(path, config->config);
  });
}

fs_status fs_config_set(fs_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    flowscan::apply_setting(config->config, key, value);
  });
}

fs_status fs_config_apply_environment(fs_config* config) {
  return guarded([&] {
    require(config, "config");
    flowscan::apply_environment(config->config);
  });
}

fs_status fs_config_to_json(const fs_config* config, char** out_json) {
  return guarded([&] {
    require(config, "config");
    require(out_json, "out_json");
    *out_json = dup_string(flowscan::to_json(config->config));
  });
}

fs_status fs_config_validate(const fs_config* config) {
  return guarded([&] {
    require(config, "config");
    flowscan::validate(config->config);
  });
}

fs_status fs_analyze(const fs_config* config, const char* const* paths, size_t count, fs_line_fn console, void* user,
                     fs_report** out) {
  return guarded([&] {
    require(config, "config");
    auto inputs = to_paths(paths, count);
    auto result = flowscan::analyze(inputs, config->config, console_sink(console, user));
    if (result.write_failures > 0)
      throw flowscan::IoError(std::to_string(result.write_failures) + " output writes failed");
    if (out) *out = new fs_report{result.ingest, std::move(result.engine), 0};
  });
}

fs_status fs_follow(const fs_config* config, const char* path, fs_line_fn console, void* user, fs_stop_fn should_stop,
                    void* stop_user, int64_t idle_exit_seconds, fs_report** out) {
  return guarded([&] {
    require(config, "config");
    require(path, "path");
    flowscan::validate(config->config);
    std::filesystem::create_directories(config->config.output_dir);
    auto console_out = console_sink(console, user);
    auto sinks = flowscan::SinkSet::open_files(flowscan::follow_sink_paths(config->config.output_dir), console_out);
    flowscan::FollowOptions opts;
    if (should_stop) opts.should_stop = [=] { return should_stop(stop_user) != 0; };
    opts.idle_exit_seconds = idle_exit_seconds;
    if (console_out) opts.notice = [console_out](std::string_view msg) { console_out->write(std::string(msg) + "\n"); };
    auto result = flowscan::follow(path, config->config, sinks, opts);
    if (out) *out = new fs_report{result.ingest, std::move(result.engine), 0};
  });
}

fs_status fs_baseline(const fs_config* config, const char* const* paths, size_t count, fs_line_fn progress, void* user,
                      fs_report** out) {
  return guarded([&] {
    require(config, "config");
    auto inputs = to_paths(paths, count);
    flowscan::validate(config->config);
    check_inputs(inputs);
    std::filesystem::create_directories(config->config.output_dir);
    auto sinks = flowscan::SinkSet::open_files(flowscan::batch_sink_paths(config->config.output_dir, inputs.front()),
                                               nullptr);
    flowscan::IngestStats stats;
    auto report = flowscan::run_baseline(inputs, config->config, sinks, &stats);
    if (progress) {
      std::string line = std::to_string(report.portscans) + " Portscans detected and written to portscans_" +
                         inputs.front().filename().string();
      progress(line.c_str(), user);
    }
    if (out) *out = new fs_report{stats, {}, report.portscans};
  });
}

fs_status fs_compare(const fs_config* config, const char* const* paths, size_t count, fs_line_fn out_line, void* user,
                     fs_report** out) {
  return guarded([&] {
    require(config, "config");
    auto inputs = to_paths(paths, count);
    flowscan::validate(config->config);
    check_inputs(inputs);
    auto result = flowscan::compare(inputs, config->config);
    if (out_line)
      for (const auto& line : flowscan::format_diff(result.diff)) out_line(line.c_str(), user);
    if (out) *out = new fs_report{{}, std::move(result.engine), result.baseline.portscans};
  });
}

fs_status fs_generate(const char* genconfig_path, const char* preset, uint64_t seed, const char* log_path,
                      const char* truth_path, uint64_t* out_lines) {
  return guarded([&] {
    require(log_path, "log_path");
    flowscan::GenConfig gen;
    if (genconfig_path)
      gen = flowscan::load_gen_config(genconfig_path);
    else if (preset)
      gen = flowscan::preset(preset);
    else
      throw flowscan::ConfigError("either a generator config or a preset is required");
    if (seed != 0) gen.seed = seed;
    auto log = flowscan::generate(gen);
    flowscan::write_log(log.records, std::filesystem::path(log_path));
    if (truth_path) {
      std::ofstream t(truth_path, std::ios::trunc);
      if (!t) throw flowscan::IoError(std::string("cannot open ") + truth_path + " for writing");
      flowscan::write_ground_truth(log.truth, t);
      if (!t.flush()) throw flowscan::IoError(std::string("write failed on ") + truth_path);
    }
    if (out_lines) *out_lines = log.records.size();
  });
}

fs_status fs_bench(const fs_config* config, const char* log_path, unsigned repetitions, fs_line_fn out_line, void* user,
                   fs_bench_result* out) {
  return guarded([&] {
    require(config, "config");
    require(log_path, "log_path");
    auto r = flowscan::measure_throughput(log_path, config->config, repetitions);
    if (out_line) {
      out_line(flowscan::format_bench_record(r).c_str(), user);
      CallbackSink(out_line, user).write(flowscan::format_bench_summary(r));
    }
    if (out) *out = {r.messages, r.wall_time, r.throughput, flowscan::kReferenceThroughput};
  });
}

void fs_report_destroy(fs_report* report) { delete report; }

uint64_t fs_report_lines_read(const fs_report* r) { return r ? r->ingest.lines_read : 0; }
uint64_t fs_report_parse_failures(const fs_report* r) { return r ? r->ingest.parse_failures : 0; }
uint64_t fs_report_messages(const fs_report* r) { return r ? r->engine.messages_processed : 0; }
uint64_t fs_report_contexts_created(const fs_report* r) { return r ? r->engine.contexts_created : 0; }
uint64_t fs_report_contexts_expired(const fs_report* r) { return r ? r->engine.contexts_expired : 0; }
uint64_t fs_report_contexts_fired(const fs_report* r) { return r ? r->engine.contexts_fired : 0; }
uint64_t fs_report_scan_alerts(const fs_report* r) { return count_alerts<flowscan::ScanAlert>(r); }
uint64_t fs_report_vuln_alerts(const fs_report* r) { return count_alerts<flowscan::VulnAlert>(r); }
uint64_t fs_report_baseline_portscans(const fs_report* r) { return r ? r->baseline_portscans : 0; }

fs_status fs_report_scan_alert_text(const fs_report* report, size_t index, char** out_text) {
  return guarded([&] {
    require(report, "report");
    require(out_text, "out_text");
    size_t seen = 0;
    for (const auto& a : report->engine.alerts) {
      if (const auto* scan = std::get_if<flowscan::ScanAlert>(&a)) {
        if (seen++ == index) {
          *out_text = dup_string(flowscan::format_scan_alert(*scan));
          return;
        }
      }
    }
    throw flowscan::ConfigError("scan alert index out of range");
  });
}

}  // extern "C"
