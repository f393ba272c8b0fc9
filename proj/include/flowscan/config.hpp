// Engine and generator configuration, JSON (de)serialization and flag overrides.
//
// Engine config file (JSON object, every key optional):
//
//   {
//     "timeout_value": 900,              // seconds, > 0
//     "trigger_policy": "min_messages",  // or "distinct_targets"
//     "min_messages": 2,                 // threshold for either policy, >= 2
//     "local_nets": ["10.0.0.0/8"],
//     "watchlist_path": "",              // empty = built-in NetBus list
//     "date": "2004/11/05",              // empty = input file's modification date
//     "tz": "-5:00",
//     "output_dir": ".",
//     "tick_interval": 1                 // seconds, follow mode
//   }
//
// The FLOWSCAN_OUTPUT_DIR environment variable overrides output_dir from the
// file; command-line flags override both.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "flowscan/scan_rules.hpp"
#include "flowscan/synth.hpp"
#include "flowscan/types.hpp"

namespace flowscan {

struct EngineConfig {
  std::int64_t timeout_value = 900;
  TriggerPolicyKind trigger_policy = TriggerPolicyKind::MinMessages;
  std::size_t min_messages = 2;
  std::vector<Cidr> local_nets{*Cidr::parse("10.0.0.0/8")};
  std::string watchlist_path;
  std::string date;
  std::string tz = "-5:00";
  std::string output_dir = ".";
  std::int64_t tick_interval = 1;

  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

/// Throws ConfigError.
void validate(const EngineConfig& config);

std::string to_json(const EngineConfig& config);
/// Keys absent from `json` keep their value in `base`. Unknown keys are errors.
EngineConfig engine_config_from_json(std::string_view json, EngineConfig base = {});
EngineConfig load_engine_config(const std::filesystem::path& path, EngineConfig base = {});  // IoError/ConfigError

/// Sets one key from its textual value, e.g. ("timeout_value", "60") or
/// ("local_nets", "10.0.0.0/8,192.168.0.0/16").
void apply_setting(EngineConfig& config, std::string_view key, std::string_view value);

/// Applies FLOWSCAN_OUTPUT_DIR if set.
void apply_environment(EngineConfig& config);

/// Resolves the watchlist (file or built-in) and trigger policy.
ScanRulesetConfig make_ruleset_config(const EngineConfig& config);

std::string to_json(const GenConfig& config);
GenConfig gen_config_from_json(std::string_view json);
GenConfig load_gen_config(const std::filesystem::path& path);

bool valid_date(std::string_view date);  // yyyy/mm/dd

}  // namespace flowscan
