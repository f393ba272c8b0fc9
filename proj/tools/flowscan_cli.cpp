// flowscan command-line tool. Uses only the C API.
//
// Exit status: 0 success, 1 configuration or usage error, 2 I/O error.
#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flowscan/flowscan.h"

namespace {

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

int exit_code(fs_status s) {
  switch (s) {
    case FS_OK: return 0;
    case FS_ERR_CONFIG: return 1;
    case FS_ERR_IO: return 2;
    default: return 3;
  }
}

int report_failure(fs_status s) {
  std::cerr << "flowscan: " << fs_last_error() << "\n";
  return exit_code(s);
}

void print_line(const char* line, void*) {
  std::fputs(line, stdout);
  std::fputc('\n', stdout);
  std::fflush(stdout);
}

struct ConfigHandle {
  fs_config* ptr = nullptr;
  ~ConfigHandle() { fs_config_destroy(ptr); }
};

struct ReportHandle {
  fs_report* ptr = nullptr;
  ~ReportHandle() { fs_report_destroy(ptr); }
};

// Engine settings shared by the subcommands that run the engine.
struct EngineFlags {
  std::optional<std::string> timeout, policy, min_messages, local_nets, watchlist, date, tz, output_dir, tick;

  void attach(CLI::App* cmd, bool with_tick) {
    cmd->add_option("--timeout", timeout, "Context timeout in seconds");
    cmd->add_option("--policy", policy, "Trigger policy: min_messages or distinct_targets");
    cmd->add_option("--min-messages", min_messages, "Trigger threshold (>= 2)");
    cmd->add_option("--local-nets", local_nets, "Comma-separated local CIDR networks");
    cmd->add_option("--watchlist", watchlist, "Vulnerable-port watchlist file");
    cmd->add_option("--date", date, "Date for traffic lines (yyyy/mm/dd)");
    cmd->add_option("--tz", tz, "Timezone offset for traffic lines");
    cmd->add_option("--output-dir", output_dir, "Directory for output files");
    if (with_tick) cmd->add_option("--tick", tick, "Expiry tick in seconds");
  }

  fs_status apply(fs_config* cfg) const {
    const std::pair<const char*, const std::optional<std::string>*> items[] = {
        {"timeout_value", &timeout}, {"trigger_policy", &policy}, {"min_messages", &min_messages},
        {"local_nets", &local_nets}, {"watchlist_path", &watchlist}, {"date", &date},
        {"tz", &tz},                 {"output_dir", &output_dir},    {"tick_interval", &tick}};
    for (const auto& [key, value] : items) {
      if (!*value) continue;
      if (fs_status s = fs_config_set(cfg, key, (*value)->c_str()); s != FS_OK) return s;
    }
    return fs_config_validate(cfg);
  }
};

std::vector<const char*> c_paths(const std::vector<std::string>& paths) {
  std::vector<const char*> out;
  for (const auto& p : paths) out.push_back(p.c_str());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowscan: port-scan detection for flow logs"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "Engine config file (JSON)");

  EngineFlags flags;
  std::vector<std::string> logs;

  auto* analyze = app.add_subcommand("analyze", "Run the correlation engine over one or more logs");
  analyze->add_option("logs", logs, "Log files, processed as one stream")->required();
  flags.attach(analyze, false);

  std::string follow_log;
  std::int64_t idle_exit = 0;
  auto* follow = app.add_subcommand("follow", "Analyze a growing log in real time");
  follow->add_option("log", follow_log, "Log file to follow")->required();
  follow->add_option("--idle-exit", idle_exit, "Stop after this many idle seconds (0 = run until interrupted)");
  flags.attach(follow, true);

  std::string genconfig, preset, gen_out, truth_out;
  std::uint64_t seed = 0;
  auto* generate = app.add_subcommand("generate", "Generate a synthetic log");
  generate->add_option("genconfig", genconfig, "Generator config file (JSON)");
  generate->add_option("--preset", preset, "Named preset (netbus-slow)");
  generate->add_option("--seed", seed, "Override the generator seed");
  generate->add_option("-o,--output", gen_out, "Output log path")->required();
  generate->add_option("--truth", truth_out, "Ground truth output path");

  auto* baseline = app.add_subcommand("baseline", "Run the adjacent-entry baseline");
  baseline->add_option("logs", logs, "Log files")->required();
  flags.attach(baseline, false);

  auto* compare = app.add_subcommand("compare", "Compare engine and baseline detections");
  compare->add_option("logs", logs, "Log files")->required();
  flags.attach(compare, false);

  std::string bench_log;
  unsigned repetitions = 3;
  auto* bench = app.add_subcommand("bench", "Measure pipeline throughput");
  bench->add_option("log", bench_log, "Pre-generated log")->required();
  bench->add_option("--repetitions", repetitions, "Repetitions (>= 3)");
  flags.attach(bench, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "flowscan: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  if (generate->parsed()) {
    if (genconfig.empty() == preset.empty()) {
      std::cerr << "flowscan: generate needs exactly one of <genconfig> or --preset\n";
      return 1;
    }
    std::uint64_t lines = 0;
    fs_status s = fs_generate(genconfig.empty() ? nullptr : genconfig.c_str(), preset.empty() ? nullptr : preset.c_str(),
                              seed, gen_out.c_str(), truth_out.empty() ? nullptr : truth_out.c_str(), &lines);
    if (s != FS_OK) return report_failure(s);
    std::cout << "wrote " << lines << " lines to " << gen_out << "\n";
    return 0;
  }

  ConfigHandle cfg;
  if (fs_status s = fs_config_create(&cfg.ptr); s != FS_OK) return report_failure(s);
  if (!config_path.empty())
    if (fs_status s = fs_config_load_file(cfg.ptr, config_path.c_str()); s != FS_OK) return report_failure(s);
  if (fs_status s = fs_config_apply_environment(cfg.ptr); s != FS_OK) return report_failure(s);
  if (fs_status s = flags.apply(cfg.ptr); s != FS_OK) return report_failure(s);

  auto paths = c_paths(logs);
  ReportHandle report;

  if (analyze->parsed()) {
    if (fs_status s = fs_analyze(cfg.ptr, paths.data(), paths.size(), print_line, nullptr, &report.ptr); s != FS_OK)
      return report_failure(s);
    std::cout << fs_report_messages(report.ptr) << " messages, " << fs_report_parse_failures(report.ptr)
              << " malformed lines, " << fs_report_scan_alerts(report.ptr) << " scan alerts, "
              << fs_report_vuln_alerts(report.ptr) << " vulnerability alerts\n";
    return 0;
  }

  if (follow->parsed()) {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    auto stop = [](void*) -> int { return g_stop != 0; };
    if (fs_status s = fs_follow(cfg.ptr, follow_log.c_str(), print_line, nullptr, stop, nullptr, idle_exit, &report.ptr);
        s != FS_OK)
      return report_failure(s);
    std::cout << fs_report_messages(report.ptr) << " messages, " << fs_report_parse_failures(report.ptr)
              << " malformed lines\n";
    return 0;
  }

  if (baseline->parsed()) {
    if (fs_status s = fs_baseline(cfg.ptr, paths.data(), paths.size(), print_line, nullptr, &report.ptr); s != FS_OK)
      return report_failure(s);
    return 0;
  }

  if (compare->parsed()) {
    if (fs_status s = fs_compare(cfg.ptr, paths.data(), paths.size(), print_line, nullptr, &report.ptr); s != FS_OK)
      return report_failure(s);
    return 0;
  }

  if (bench->parsed()) {
    fs_bench_result r{};
    if (fs_status s = fs_bench(cfg.ptr, bench_log.c_str(), repetitions, print_line, nullptr, &r); s != FS_OK)
      return report_failure(s);
    return 0;
  }
  return 1;
}
