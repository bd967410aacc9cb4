#ifndef V2I_ADVISORY_H
#define V2I_ADVISORY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Frame family. Passing `UNKNOWN` to [`v2i_decode`] auto-detects.
 */
typedef enum V2iFormat {
  V2I_FORMAT_UNKNOWN = 0,
  V2I_FORMAT_M60 = 1,
  V2I_FORMAT_TW900 = 2,
} V2iFormat;

typedef enum V2iStatus {
  V2I_STATUS_OK = 0,
  V2I_STATUS_NULL_ARGUMENT = 1,
  V2I_STATUS_INVALID_ARGUMENT = 2,
  V2I_STATUS_BAD_FRAME = 3,
  V2I_STATUS_FIELD_OVERFLOW = 4,
  V2I_STATUS_BUFFER_TOO_SMALL = 5,
  V2I_STATUS_BAD_CONFIG = 6,
  V2I_STATUS_BAD_SCENARIO = 7,
  V2I_STATUS_FINISHED = 8,
  V2I_STATUS_PANIC = 99,
} V2iStatus;

typedef enum V2iAdviceKind {
  V2I_ADVICE_KIND_NONE = 0,
  V2I_ADVICE_KIND_PROCEED = 1,
  V2I_ADVICE_KIND_PREPARE_TO_STOP = 2,
} V2iAdviceKind;

/**
 * Opaque running simulation.
 */
typedef struct V2iSimulation V2iSimulation;

/**
 * Opaque validated zone configuration.
 */
typedef struct V2iZoneConfig V2iZoneConfig;

/**
 * Color codes: 0 red, 1 green, 2 yellow.
 */
typedef struct V2iPhase {
  uint8_t phase_id;
  uint8_t color;
  uint32_t remaining_ds;
  uint32_t next1_ds;
  uint32_t next2_ds;
} V2iPhase;

/**
 * Phases are ordered by id, 1 to 8.
 */
typedef struct V2iSnapshot {
  uint32_t intersection_id;
  uint32_t controller_time_ds;
  uint32_t seq;
  struct V2iPhase phases[8];
} V2iSnapshot;

typedef struct V2iAdvice {
  enum V2iAdviceKind kind;
  /**
   * Only meaningful for `PROCEED`; zero otherwise.
   */
  double target_mps;
  double window_lo_mps;
  double window_hi_mps;
} V2iAdvice;

typedef struct V2iLinkConfig {
  double drop_prob;
  uint32_t latency_min_ticks;
  uint32_t latency_max_ticks;
  uint64_t seed;
} V2iLinkConfig;

typedef struct V2iAdvisory {
  bool active;
  uint8_t phase_id;
  uint8_t color;
  uint32_t countdown_ds;
  double distance_m;
  struct V2iAdvice advice;
} V2iAdvisory;

typedef struct V2iTick {
  uint64_t tick;
  double lat_deg;
  double lon_deg;
  double speed_mps;
  /**
   * Signed distance to the stop bar along the approach.
   */
  double distance_m;
  double accel_mps2;
  /**
   * False until the on-board unit holds data for a zone; `advisory` is zeroed then.
   */
  bool has_advisory;
  struct V2iAdvisory advisory;
  uint32_t phase_changes;
  bool beep;
  bool finished;
} V2iTick;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *v2i_last_error_message(void);

/**
 * Sniffs the frame family from magic and length.
 *
 * # Safety
 * `bytes` must point to `len` readable octets (or be null).
 */
enum V2iFormat v2i_detect_format(const uint8_t *bytes, size_t len);

/**
 * Decodes a raw frame. `format` is a [`V2iFormat`] value; 0 auto-detects.
 *
 * # Safety
 * `bytes` must point to `len` readable octets; `out` must be writable.
 */
enum V2iStatus v2i_decode(uint32_t format,
                          const uint8_t *bytes,
                          size_t len,
                          struct V2iSnapshot *out);

/**
 * Encodes a snapshot into `buf`. `*out_len` receives the frame length,
 * also when the buffer is too small.
 *
 * # Safety
 * `snapshot` must be readable, `buf` writable for `cap` octets, `out_len` writable.
 */
enum V2iStatus v2i_encode(uint32_t format,
                          const struct V2iSnapshot *snapshot,
                          uint8_t *buf,
                          size_t cap,
                          size_t *out_len);

/**
 * Formats the RSU broadcast line. Free the result with [`v2i_string_free`].
 *
 * # Safety
 * `snapshot` must be readable and `out` writable.
 */
enum V2iStatus v2i_rsu_string(const struct V2iSnapshot *snapshot, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void v2i_string_free(char *s);

/**
 * Parses an RSU broadcast line.
 *
 * # Safety
 * `line` must be a NUL-terminated string and `out` writable.
 */
enum V2iStatus v2i_parse_rsu_string(const char *line, struct V2iSnapshot *out);

/**
 * Parses and validates a zone configuration JSON document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum V2iStatus v2i_zone_config_load(const char *json, struct V2iZoneConfig **out);

/**
 * # Safety
 * `cfg` must come from [`v2i_zone_config_load`] and not be freed twice. Null is ignored.
 */
void v2i_zone_config_free(struct V2iZoneConfig *cfg);

/**
 * Number of zones; 0 for null.
 *
 * # Safety
 * `cfg` must be a live handle or null.
 */
size_t v2i_zone_config_zone_count(const struct V2iZoneConfig *cfg);

/**
 * Finds the zone containing a point. Writes -1 and phase 0 when none does.
 *
 * # Safety
 * `cfg` must be a live handle; `out_index` and `out_phase_id` writable.
 */
enum V2iStatus v2i_zone_config_locate(const struct V2iZoneConfig *cfg,
                                      double lat_deg,
                                      double lon_deg,
                                      int32_t *out_index,
                                      uint8_t *out_phase_id);

/**
 * Distance in meters from a point to a zone's stop bar.
 *
 * # Safety
 * `cfg` must be a live handle and `out_m` writable.
 */
enum V2iStatus v2i_zone_config_distance_to_stopbar(const struct V2iZoneConfig *cfg,
                                                   size_t zone_index,
                                                   double lat_deg,
                                                   double lon_deg,
                                                   double *out_m);

/**
 * Speed advice for one phase state with the default advisory parameters.
 *
 * # Safety
 * `phase` must be readable and `out` writable.
 */
enum V2iStatus v2i_speed_advice(double distance_m,
                                const struct V2iPhase *phase,
                                double speed_limit_mps,
                                struct V2iAdvice *out);

/**
 * Creates a simulation from a configuration handle and a scenario JSON
 * document. The configuration may be freed afterwards.
 *
 * # Safety
 * `cfg` must be a live handle, `scenario_json` NUL-terminated, `link` readable, `out` writable.
 */
enum V2iStatus v2i_simulation_new(const struct V2iZoneConfig *cfg,
                                  const char *scenario_json,
                                  const struct V2iLinkConfig *link,
                                  struct V2iSimulation **out);

/**
 * Advances one tick. Returns `FINISHED` without writing once the run is over.
 *
 * # Safety
 * `sim` must be a live handle and `out` writable.
 */
enum V2iStatus v2i_simulation_step(struct V2iSimulation *sim, struct V2iTick *out);

/**
 * Sets the external driver's acceleration command; it holds until replaced.
 * Scripted and advice-following drivers ignore it.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum V2iStatus v2i_simulation_set_accel(struct V2iSimulation *sim, double accel_mps2);

/**
 * Rewinds to tick 0.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum V2iStatus v2i_simulation_reset(struct V2iSimulation *sim);

/**
 * # Safety
 * `sim` must come from [`v2i_simulation_new`] and not be freed twice. Null is ignored.
 */
void v2i_simulation_free(struct V2iSimulation *sim);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* V2I_ADVISORY_H */
