#ifndef PLUME_STE_H
#define PLUME_STE_H

/* C interface to the plume source-term-estimation library.
 *
 * Every run function takes one JSON configuration document (see README for
 * the layout), writes the command's output files under the document's
 * output_dir, and hands back a JSON summary string. The summary is allocated
 * by the library; release it with ste_string_free. On failure the out
 * parameter is left untouched and ste_last_error() describes what went wrong
 * for the calling thread.
 *
 * Runs are pure functions of the document: the same document produces byte
 * identical output files on every call.
 */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ste_status {
  STE_OK = 0,
  STE_ERROR_CONFIG = 1,     /* malformed document or invalid values */
  STE_ERROR_CHECKPOINT = 2, /* unreadable or inconsistent checkpoint/state */
  STE_ERROR_DIVERGED = 3,   /* training hit a non-finite loss or weight */
  STE_ERROR_GUARD = 4,      /* exhaustive oracle instance too large */
  STE_ERROR_IO = 5,         /* output file could not be written */
  STE_ERROR_INVALID = 6,    /* null pointer argument */
  STE_ERROR_INTERNAL = 7    /* unexpected failure; see ste_last_error */
} ste_status;

/* Library version as "major.minor.patch". Static storage; do not free. */
const char* ste_version(void);

/* Thread-local message for this thread's most recent failed call. Static
 * storage; do not free. Empty string when the last call succeeded. */
const char* ste_last_error(void);

/* Release a string returned through an out parameter. NULL is a no-op. */
void ste_string_free(char* s);

ste_status ste_run_simulate(const char* config_json, char** out_summary_json);
ste_status ste_run_train(const char* config_json, char** out_summary_json);
ste_status ste_run_eval(const char* config_json, char** out_summary_json);
ste_status ste_run_sweep(const char* config_json, char** out_summary_json);
ste_status ste_run_oracle(const char* config_json, char** out_summary_json);

#ifdef __cplusplus
}
#endif

#endif /* PLUME_STE_H */
