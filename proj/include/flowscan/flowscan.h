/*
 * flowscan C API.
 *
 * Every function returns an fs_status. On failure the message for the
 * calling thread is available from fs_last_error() until the next call.
 * Handles are opaque and owned by the caller; release them with the matching
 * *_destroy function. Strings returned through char** must be released with
 * fs_string_free().
 */
#ifndef FLOWSCAN_FLOWSCAN_H
#define FLOWSCAN_FLOWSCAN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define FS_API __declspec(dllexport)
#else
#  define FS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fs_status {
  FS_OK = 0,
  FS_ERR_CONFIG = 1,   /* invalid configuration or argument */
  FS_ERR_IO = 2,       /* file could not be opened, read or written */
  FS_ERR_INTERNAL = 3  /* unexpected failure */
} fs_status;

typedef struct fs_config fs_config;
typedef struct fs_report fs_report;

/* Receives one line of text (no trailing newline). */
typedef void (*fs_line_fn)(const char* line, void* user);
/* Returns nonzero to stop a follow run. */
typedef int (*fs_stop_fn)(void* user);

FS_API const char* fs_version(void);
FS_API const char* fs_last_error(void);
FS_API void fs_string_free(char* s);

/* --- engine configuration ------------------------------------------------- */

FS_API fs_status fs_config_create(fs_config** out);
FS_API void fs_config_destroy(fs_config* config);
/* Merges a JSON config file into `config`. */
FS_API fs_status fs_config_load_file(fs_config* config, const char* path);
/* Sets one key from text, e.g. ("timeout_value", "900"). */
FS_API fs_status fs_config_set(fs_config* config, const char* key, const char* value);
/* Applies FLOWSCAN_OUTPUT_DIR when set. */
FS_API fs_status fs_config_apply_environment(fs_config* config);
FS_API fs_status fs_config_to_json(const fs_config* config, char** out_json);
FS_API fs_status fs_config_validate(const fs_config* config);

/* --- runs ------------------------------------------------------------------- */

/* Batch analysis of one or more logs processed as one stream. Writes
 * incoming_/outgoing_/portscans_/vulscans_<first input> into output_dir and
 * passes every scan alert summary to `console` as it is produced. */
FS_API fs_status fs_analyze(const fs_config* config, const char* const* paths, size_t count, fs_line_fn console,
                            void* user, fs_report** out);

/* Real-time mode on a growing file. Runs until `should_stop` returns nonzero
 * or, if idle_exit_seconds > 0, until no line arrived for that long. Writes
 * incoming.log/outgoing.log/portscans.log/vulscans.log into output_dir. */
FS_API fs_status fs_follow(const fs_config* config, const char* path, fs_line_fn console, void* user,
                           fs_stop_fn should_stop, void* stop_user, int64_t idle_exit_seconds, fs_report** out);

/* Adjacent-entry baseline; same file naming as fs_analyze. */
FS_API fs_status fs_baseline(const fs_config* config, const char* const* paths, size_t count, fs_line_fn progress,
                             void* user, fs_report** out);

/* Engine versus baseline; every line of the difference summary goes to `out_line`. */
FS_API fs_status fs_compare(const fs_config* config, const char* const* paths, size_t count, fs_line_fn out_line,
                            void* user, fs_report** out);

/* Generates a log from a JSON generator config (`genconfig_path`) or a named
 * preset (`preset`, used when genconfig_path is NULL). `truth_path` may be
 * NULL. A nonzero `seed` overrides the configured seed. */
FS_API fs_status fs_generate(const char* genconfig_path, const char* preset, uint64_t seed, const char* log_path,
                             const char* truth_path, uint64_t* out_lines);

typedef struct fs_bench_result {
  uint64_t messages;
  double wall_time;
  double throughput;
  double reference_throughput;
} fs_bench_result;

/* Median-of-`repetitions` throughput (repetitions >= 3). Each of the machine
 * readable record and the human summary lines is passed to `out_line`. */
FS_API fs_status fs_bench(const fs_config* config, const char* log_path, unsigned repetitions, fs_line_fn out_line,
                          void* user, fs_bench_result* out);

/* --- reports ------------------------------------------------------------------ */

FS_API void fs_report_destroy(fs_report* report);
FS_API uint64_t fs_report_lines_read(const fs_report* report);
FS_API uint64_t fs_report_parse_failures(const fs_report* report);
FS_API uint64_t fs_report_messages(const fs_report* report);
FS_API uint64_t fs_report_contexts_created(const fs_report* report);
FS_API uint64_t fs_report_contexts_expired(const fs_report* report);
FS_API uint64_t fs_report_contexts_fired(const fs_report* report);
FS_API uint64_t fs_report_scan_alerts(const fs_report* report);
FS_API uint64_t fs_report_vuln_alerts(const fs_report* report);
/* Scan-start count of a baseline run (0 for other runs). */
FS_API uint64_t fs_report_baseline_portscans(const fs_report* report);
/* Text of the i-th scan alert (summary plus evidence lines). */
FS_API fs_status fs_report_scan_alert_text(const fs_report* report, size_t index, char** out_text);

#ifdef __cplusplus
}
#endif

#endif /* FLOWSCAN_FLOWSCAN_H */
