#ifndef FOCKBENCH_FOCKBENCH_H
#define FOCKBENCH_FOCKBENCH_H

#include <stddef.h>

#if defined(_WIN32)
#if defined(FOCKBENCH_BUILDING_LIBRARY)
#define FB_API __declspec(dllexport)
#else
#define FB_API __declspec(dllimport)
#endif
#else
#define FB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as process exit codes. */
typedef enum fb_status {
  FB_OK = 0,
  FB_ERR_INTERNAL = 1, /* bad argument, I/O failure or unexpected exception */
  FB_ERR_PARSE = 2,
  FB_ERR_NUMERIC = 3,
  FB_ERR_TRUNCATION = 4,
  FB_ERR_CONSISTENCY = 5
} fb_status;

typedef struct fb_scenario fb_scenario;
typedef struct fb_result fb_result;

FB_API const char* fb_version(void);

/* Message of the most recent failure on the calling thread, or "". */
FB_API const char* fb_last_error(void);

/* Strings returned through char** are owned by the caller. */
FB_API void fb_string_free(char* text);

FB_API fb_status fb_scenario_parse(const char* text, const char* origin, fb_scenario** out);
FB_API fb_status fb_scenario_load(const char* path, fb_scenario** out);
FB_API fb_status fb_scenario_from_preset(const char* name, fb_scenario** out);
FB_API void fb_scenario_free(fb_scenario* scenario);

/* Borrowed strings, valid while the scenario lives. */
FB_API const char* fb_scenario_name(const fb_scenario* scenario);
FB_API const char* fb_scenario_description(const fb_scenario* scenario);
FB_API const char* fb_scenario_engine(const fb_scenario* scenario);
FB_API int fb_scenario_has_sweep(const fb_scenario* scenario);
/* Declared time budget in seconds, or a negative value when none is set. */
FB_API double fb_scenario_budget_seconds(const fb_scenario* scenario);

/* threads = 0 uses every hardware thread. On return *out holds the result
 * whenever the engine produced tables, even if the status reports a failed
 * check or a failed sweep instance. */
FB_API fb_status fb_run(const fb_scenario* scenario, unsigned threads, fb_result** out);
FB_API fb_status fb_sweep(const fb_scenario* scenario, unsigned threads, fb_result** out);

/* Runs the checks for the scenario and returns a line-per-check report. */
FB_API fb_status fb_validate(const fb_scenario* scenario, unsigned threads, char** report);

FB_API void fb_result_free(fb_result* result);
FB_API size_t fb_result_table_count(const fb_result* result);
FB_API const char* fb_result_table_name(const fb_result* result, size_t index);
FB_API size_t fb_result_table_rows(const fb_result* result, size_t index);
FB_API fb_status fb_result_table_csv(const fb_result* result, size_t index, char** csv);
FB_API size_t fb_result_warning_count(const fb_result* result);
FB_API const char* fb_result_warning(const fb_result* result, size_t index);
FB_API size_t fb_result_note_count(const fb_result* result);
FB_API const char* fb_result_note(const fb_result* result, size_t index);
/* Failure recorded inside a completed run, or "" when it passed. */
FB_API const char* fb_result_failure(const fb_result* result);

/* Writes the CSV tables and manifest.yaml into dir. */
FB_API fb_status fb_result_write(const fb_result* result, const fb_scenario* scenario, const char* dir,
                                 const char* command, double wall_seconds, unsigned threads, int exit_code);

FB_API size_t fb_preset_count(void);
FB_API const char* fb_preset_name(size_t index);
/* Borrowed preset text, or NULL for an unknown name. */
FB_API const char* fb_preset_text(const char* name);

#ifdef __cplusplus
}
#endif

#endif
