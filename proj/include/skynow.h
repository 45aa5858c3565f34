/* skynow.h - C interface to the sky-image irradiance nowcasting pipeline.
 *
 * Usage: open a run handle over a config file and a run directory, invoke
 * pipeline commands on it, close it. All functions return skynow_status;
 * on failure skynow_last_error(run) holds a message for the failed call.
 * Handles are not thread-safe; use one handle per thread.
 */
#ifndef SKYNOW_H
#define SKYNOW_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum skynow_status {
  SKYNOW_OK = 0,
  SKYNOW_ERROR = 1,         /* unexpected failure */
  SKYNOW_ERROR_CONFIG = 2,  /* bad configuration or arguments */
  SKYNOW_ERROR_DATA = 3,    /* missing or malformed inputs */
  SKYNOW_ERROR_NUMERIC = 4  /* numerical failure */
} skynow_status;

typedef struct skynow_run skynow_run;

/* Opens a run handle. config_path may be NULL to use built-in defaults.
 * threads <= 1 selects the bit-exact single-threaded reference path. */
skynow_status skynow_run_open(const char* config_path, const char* run_dir,
                              int threads, skynow_run** out_run);
void skynow_run_close(skynow_run* run);

/* Message for the last failed call on this handle (empty string if none).
 * The pointer stays valid until the next call on the same handle. */
const char* skynow_last_error(const skynow_run* run);

const char* skynow_version(void);

/* Pipeline stages, in their natural order. */
skynow_status skynow_cmd_synth(skynow_run* run);
skynow_status skynow_cmd_calibrate(skynow_run* run);
skynow_status skynow_cmd_preprocess(skynow_run* run);
skynow_status skynow_cmd_segment(skynow_run* run);
skynow_status skynow_cmd_flow(skynow_run* run);
skynow_status skynow_cmd_cbh(skynow_run* run);
skynow_status skynow_cmd_features(skynow_run* run);
/* method is "A", "B" or "C" */
skynow_status skynow_cmd_train(skynow_run* run, const char* method);
skynow_status skynow_cmd_predict(skynow_run* run, const char* method);
skynow_status skynow_cmd_evaluate(skynow_run* run);
skynow_status skynow_cmd_importance(skynow_run* run);
/* Prints one line per check to stdout; fail_count may be NULL. */
skynow_status skynow_cmd_selftest(skynow_run* run, int* fail_count);

#ifdef __cplusplus
}
#endif

#endif /* SKYNOW_H */
