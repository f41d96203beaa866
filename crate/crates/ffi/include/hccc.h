#ifndef HCCC_H
#define HCCC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every exported function.
 */
typedef enum HcccStatus {
  HCCC_STATUS_OK = 0,
  HCCC_STATUS_NULL_POINTER = 1,
  HCCC_STATUS_INVALID_UTF8 = 2,
  HCCC_STATUS_CONFIG_ERROR = 3,
  HCCC_STATUS_SIMULATION_ERROR = 4,
  HCCC_STATUS_INVALID_ARGUMENT = 5,
  HCCC_STATUS_MALFORMED_FEEDBACK = 6,
  HCCC_STATUS_BUFFER_TOO_SMALL = 7,
  HCCC_STATUS_PANIC = 8,
} HcccStatus;

/**
 * Opaque scenario configuration.
 */
typedef struct HcccConfig HcccConfig;

/**
 * Opaque result of one simulation run.
 */
typedef struct HcccReport HcccReport;

/**
 * Headline metrics of a run. `fairness` is NaN when `has_fairness` is 0.
 */
typedef struct HcccSummary {
  uint64_t generated;
  uint64_t delivered;
  uint64_t dropped_buffer_overflow;
  uint64_t dropped_mac_retry;
  uint64_t in_flight;
  double packet_loss_ratio;
  double throughput_pps;
  double avg_source_rate_pps;
  double source_rate_cv;
  double energy_efficiency;
  double fairness;
  uint8_t has_fairness;
  double mean_access_delay_us;
  double mean_end_to_end_delay_us;
  uint64_t data_attempts;
  uint64_t collisions;
  uint64_t carrier_violations;
} HcccSummary;

/**
 * Outcome of one application of the window/rate feedback rule.
 */
typedef struct HcccFeedbackResult {
  /**
   * Case number 1 to 4.
   */
  uint8_t case_number;
  double rate_unclamped;
  double window_unclamped;
  double rate;
  double window;
  double rate_max;
} HcccFeedbackResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hccc_version(void);

/**
 * Message of the most recent failure on this thread, or an empty string.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *hccc_last_error(void);

/**
 * Allocates the stock configuration.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum HcccStatus hccc_config_default(struct HcccConfig **out);

/**
 * Parses configuration text (the same INI format the CLI reads).
 *
 * # Safety
 * `text` must be NUL-terminated; `out` must be writable.
 */
enum HcccStatus hccc_config_parse(const char *text, struct HcccConfig **out);

/**
 * Applies one `section.key=value` override.
 *
 * # Safety
 * `cfg` must come from this library; `assignment` must be NUL-terminated.
 */
enum HcccStatus hccc_config_set(struct HcccConfig *cfg, const char *assignment);

/**
 * Checks every parameter range.
 *
 * # Safety
 * `cfg` must come from this library.
 */
enum HcccStatus hccc_config_validate(const struct HcccConfig *cfg);

/**
 * Renders the configuration as text. Call with a null `buf` to learn the
 * size through `needed`.
 *
 * # Safety
 * `cfg` must come from this library; `buf` must hold `len` bytes.
 */
enum HcccStatus hccc_config_to_string(const struct HcccConfig *cfg,
                                      char *buf,
                                      size_t len,
                                      size_t *needed);

/**
 * Releases a configuration. Null is ignored.
 *
 * # Safety
 * `cfg` must come from this library and not be used afterwards.
 */
void hccc_config_free(struct HcccConfig *cfg);

/**
 * Runs one simulation. Traces requested in the configuration are kept in
 * memory only; nothing is written to disk.
 *
 * # Safety
 * `cfg` must come from this library; `out` must be writable.
 */
enum HcccStatus hccc_run(const struct HcccConfig *cfg, uint64_t seed, struct HcccReport **out);

/**
 * Fills `out` with the headline metrics.
 *
 * # Safety
 * `report` must come from this library; `out` must be writable.
 */
enum HcccStatus hccc_report_summary(const struct HcccReport *report, struct HcccSummary *out);

/**
 * Writes the summary CSV (header plus one row), same columns as the CLI.
 *
 * # Safety
 * `report` must come from this library; `buf` must hold `len` bytes.
 */
enum HcccStatus hccc_report_summary_csv(const struct HcccReport *report,
                                        char *buf,
                                        size_t len,
                                        size_t *needed);

/**
 * Releases a report. Null is ignored.
 *
 * # Safety
 * `report` must come from this library and not be used afterwards.
 */
void hccc_report_free(struct HcccReport *report);

/**
 * Fairness degree of `n` rates. `printed` selects the unsquared numerator
 * instead of the Jain index. Returns `InvalidArgument` when `n` is 0 or
 * every rate is zero.
 *
 * # Safety
 * `rates` must point to `n` doubles; `out` must be writable.
 */
enum HcccStatus hccc_fairness(const double *rates, size_t n, uint8_t printed, double *out);

/**
 * Applies the feedback rule with the parameters of `cfg`.
 *
 * # Safety
 * `cfg` must come from this library; `out` must be writable.
 */
enum HcccStatus hccc_process_feedback(const struct HcccConfig *cfg,
                                      double b_r_local,
                                      double b_r_down,
                                      double rate,
                                      double window,
                                      double rate_max,
                                      struct HcccFeedbackResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HCCC_H */
