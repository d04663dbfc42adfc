/* lorawan-lab C bindings. Generated by cbindgen; do not edit. */

#ifndef LORAWAN_LAB_H
#define LORAWAN_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LwStatus {
  LW_STATUS_OK = 0,
  LW_STATUS_NULL_POINTER = 1,
  LW_STATUS_INVALID_ARGUMENT = 2,
  LW_STATUS_PAYLOAD_TOO_LARGE = 3,
  LW_STATUS_PARSE_ERROR = 4,
  LW_STATUS_NOT_DATA_FRAME = 5,
  LW_STATUS_NO_PAYLOAD = 6,
  LW_STATUS_BUFFER_TOO_SMALL = 7,
  LW_STATUS_PANIC = 8,
} LwStatus;

/*
 Opaque decoded uplink.
 */
typedef struct LwFrame LwFrame;

/*
 Opaque simulation configuration.
 */
typedef struct LwSimConfig LwSimConfig;

/*
 Opaque simulation result.
 */
typedef struct LwSimReport LwSimReport;

/*
 Aggregate counters of a simulation report.
 */
typedef struct LwSimSummary {
  uint64_t total_uplinks;
  uint64_t delivered;
  uint64_t collided;
  uint64_t lost_gateway_busy;
  uint64_t acks_sent;
  uint64_t acks_dropped;
  double loss_rate;
  double gateway_tx_time_s;
  double gateway_airtime_fraction;
  bool duty_violation;
} LwSimSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Static description of a status code.
 */
const char *lw_status_message(enum LwStatus status);

const char *lw_version(void);

/*
 Time on air in seconds of a `payload_bytes` PHY payload.
 */
enum LwStatus lw_frame_airtime(uint8_t sf,
                               uint32_t bw_hz,
                               uint8_t cr,
                               uint16_t preamble,
                               size_t payload_bytes,
                               double *out_seconds);

/*
 EU868 frames per day on one channel at the given duty cycle.
 */
enum LwStatus lw_frames_per_day(uint8_t sf,
                                size_t payload_bytes,
                                double duty_cycle,
                                uint64_t *out_frames);

enum LwStatus lw_indicative_bitrate(uint8_t sf, uint32_t bw_hz, uint32_t *out_bps);

enum LwStatus lw_estimate_distance(double freq_mhz, double level_db, double *out_meters);

enum LwStatus lw_great_circle_distance(double lat1_deg,
                                       double lon1_deg,
                                       double lat2_deg,
                                       double lon2_deg,
                                       double *out_meters);

/*
 New configuration with default parameters (EU868, 100 packets per
 60 s window, no confirmations, 100 trials, seed 0).
 */
struct LwSimConfig *lw_sim_config_new(void);

void lw_sim_config_free(struct LwSimConfig *cfg);

/*
 Uplinks per window.
 */
enum LwStatus lw_sim_config_set_packets(struct LwSimConfig *cfg, size_t value);

/*
 Window length in seconds.
 */
enum LwStatus lw_sim_config_set_window(struct LwSimConfig *cfg, double value);

/*
 Share of uplinks requesting an ACK, in [0, 1].
 */
enum LwStatus lw_sim_config_set_confirmed_fraction(struct LwSimConfig *cfg, double value);

enum LwStatus lw_sim_config_set_trials(struct LwSimConfig *cfg, size_t value);

enum LwStatus lw_sim_config_set_seed(struct LwSimConfig *cfg, uint64_t value);

/*
 Application payload bytes per uplink.
 */
enum LwStatus lw_sim_config_set_payload(struct LwSimConfig *cfg, size_t value);

/*
 Header bytes added to each uplink's PHY payload.
 */
enum LwStatus lw_sim_config_set_overhead(struct LwSimConfig *cfg, size_t value);

/*
 Delay in seconds between uplink end and ACK start.
 */
enum LwStatus lw_sim_config_set_rx1_delay(struct LwSimConfig *cfg, double value);

/*
 Gateway duty cycle used for the violation flag.
 */
enum LwStatus lw_sim_config_set_duty_cycle(struct LwSimConfig *cfg, double value);

/*
 Runs the full simulation. On success `*out_report` owns a report to be
 released with [`lw_sim_report_free`].
 */
enum LwStatus lw_simulate(const struct LwSimConfig *cfg, struct LwSimReport **out_report);

void lw_sim_report_free(struct LwSimReport *report);

enum LwStatus lw_sim_report_summary(const struct LwSimReport *report, struct LwSimSummary *out);

/*
 Collision rate of one spreading factor; `InvalidArgument` if the SF was
 not simulated.
 */
enum LwStatus lw_sim_report_collision_rate(const struct LwSimReport *report,
                                           uint8_t sf,
                                           double *out_rate);

/*
 Parses and decrypts an uplink. `key` may be null for the generic key,
 otherwise it points at 16 bytes used as both session keys. A MIC
 mismatch is not an error; query it with [`lw_frame_mic_ok`].
 */
enum LwStatus lw_decode(const uint8_t *bytes,
                        size_t len,
                        const uint8_t *key,
                        struct LwFrame **out_frame);

void lw_frame_free(struct LwFrame *frame);

/*
 DevAddr, or 0 for a null handle.
 */
uint32_t lw_frame_dev_addr(const struct LwFrame *frame);

uint16_t lw_frame_fcnt(const struct LwFrame *frame);

/*
 FPort, or -1 when absent.
 */
int16_t lw_frame_fport(const struct LwFrame *frame);

bool lw_frame_mic_ok(const struct LwFrame *frame);

/*
 Copies the plaintext into `buf`. `*out_len` always receives the full
 plaintext length; if `cap` is smaller nothing is copied and
 `BufferTooSmall` is returned.
 */
enum LwStatus lw_frame_plaintext(const struct LwFrame *frame,
                                 uint8_t *buf,
                                 size_t cap,
                                 size_t *out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LORAWAN_LAB_H */
