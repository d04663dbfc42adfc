//! C ABI for lorawan-lab.
//!
//! Every fallible function returns an [`LwStatus`] and writes its result
//! through an out-pointer. Simulation configs, reports and decoded frames are
//! opaque handles owned by the caller and released with the matching
//! `*_free` function. The header `include/lorawan_lab.h` is generated by
//! cbindgen at build time.

#![allow(clippy::missing_safety_doc)]

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lorawan_lab::codec::{decode_with, CodecError, Decoded, SessionKeys, GENERIC_KEY};
use lorawan_lab::pathloss::{
    estimate_distance, great_circle_distance, GeoPoint, SignalObservation,
};
use lorawan_lab::radio::{
    frame_airtime, frames_per_day, indicative_bitrate, RadioConfig, RadioError, RegionPlan,
};
use lorawan_lab::sim::{simulate_with_confirmations, SimConfig, SimReport};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    PayloadTooLarge = 3,
    ParseError = 4,
    NotDataFrame = 5,
    NoPayload = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Opaque simulation configuration.
pub struct LwSimConfig {
    inner: SimConfig,
}

/// Opaque simulation result.
pub struct LwSimReport {
    inner: SimReport,
}

/// Opaque decoded uplink.
pub struct LwFrame {
    inner: Decoded,
}

/// Aggregate counters of a simulation report.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LwSimSummary {
    pub total_uplinks: u64,
    pub delivered: u64,
    pub collided: u64,
    pub lost_gateway_busy: u64,
    pub acks_sent: u64,
    pub acks_dropped: u64,
    pub loss_rate: f64,
    pub gateway_tx_time_s: f64,
    pub gateway_airtime_fraction: f64,
    pub duty_violation: bool,
}

fn guard(f: impl FnOnce() -> LwStatus) -> LwStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(LwStatus::Panic)
}

fn radio_status(e: &RadioError) -> LwStatus {
    match e {
        RadioError::PayloadTooLarge { .. } => LwStatus::PayloadTooLarge,
        _ => LwStatus::InvalidArgument,
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn lw_status_message(status: LwStatus) -> *const c_char {
    let msg: &'static CStr = match status {
        LwStatus::Ok => c"ok",
        LwStatus::NullPointer => c"null pointer argument",
        LwStatus::InvalidArgument => c"invalid argument",
        LwStatus::PayloadTooLarge => c"payload exceeds the spreading factor limit",
        LwStatus::ParseError => c"frame could not be parsed",
        LwStatus::NotDataFrame => c"frame is not a data frame",
        LwStatus::NoPayload => c"frame has no FPort",
        LwStatus::BufferTooSmall => c"output buffer too small",
        LwStatus::Panic => c"internal error",
    };
    msg.as_ptr()
}

#[no_mangle]
pub extern "C" fn lw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Time on air in seconds of a `payload_bytes` PHY payload.
#[no_mangle]
pub unsafe extern "C" fn lw_frame_airtime(
    sf: u8,
    bw_hz: u32,
    cr: u8,
    preamble: u16,
    payload_bytes: usize,
    out_seconds: *mut f64,
) -> LwStatus {
    guard(|| {
        if out_seconds.is_null() {
            return LwStatus::NullPointer;
        }
        match RadioConfig::new(sf, bw_hz, cr) {
            Ok(cfg) => {
                *out_seconds = frame_airtime(&cfg.with_preamble(preamble), payload_bytes);
                LwStatus::Ok
            }
            Err(e) => radio_status(&e),
        }
    })
}

/// EU868 frames per day on one channel at the given duty cycle.
#[no_mangle]
pub unsafe extern "C" fn lw_frames_per_day(
    sf: u8,
    payload_bytes: usize,
    duty_cycle: f64,
    out_frames: *mut u64,
) -> LwStatus {
    guard(|| {
        if out_frames.is_null() {
            return LwStatus::NullPointer;
        }
        let result = RadioConfig::eu868(sf).and_then(|cfg| {
            let plan = RegionPlan::eu868().with_duty_cycle(duty_cycle)?;
            frames_per_day(&cfg, payload_bytes, &plan)
        });
        match result {
            Ok(n) => {
                *out_frames = n;
                LwStatus::Ok
            }
            Err(e) => radio_status(&e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn lw_indicative_bitrate(sf: u8, bw_hz: u32, out_bps: *mut u32) -> LwStatus {
    guard(|| {
        if out_bps.is_null() {
            return LwStatus::NullPointer;
        }
        match RadioConfig::new(sf, bw_hz, 1).and_then(|c| indicative_bitrate(&c)) {
            Ok(bps) => {
                *out_bps = bps;
                LwStatus::Ok
            }
            Err(e) => radio_status(&e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn lw_estimate_distance(
    freq_mhz: f64,
    level_db: f64,
    out_meters: *mut f64,
) -> LwStatus {
    guard(|| {
        if out_meters.is_null() {
            return LwStatus::NullPointer;
        }
        match SignalObservation::new(freq_mhz, level_db).and_then(|o| estimate_distance(&o)) {
            Ok(d) => {
                *out_meters = d;
                LwStatus::Ok
            }
            Err(_) => LwStatus::InvalidArgument,
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn lw_great_circle_distance(
    lat1_deg: f64,
    lon1_deg: f64,
    lat2_deg: f64,
    lon2_deg: f64,
    out_meters: *mut f64,
) -> LwStatus {
    guard(|| {
        if out_meters.is_null() {
            return LwStatus::NullPointer;
        }
        match (
            GeoPoint::new(lat1_deg, lon1_deg),
            GeoPoint::new(lat2_deg, lon2_deg),
        ) {
            (Ok(a), Ok(b)) => {
                *out_meters = great_circle_distance(&a, &b);
                LwStatus::Ok
            }
            _ => LwStatus::InvalidArgument,
        }
    })
}

/// New configuration with default parameters (EU868, 100 packets per
/// 60 s window, no confirmations, 100 trials, seed 0).
#[no_mangle]
pub extern "C" fn lw_sim_config_new() -> *mut LwSimConfig {
    Box::into_raw(Box::new(LwSimConfig {
        inner: SimConfig::default(),
    }))
}

#[no_mangle]
pub unsafe extern "C" fn lw_sim_config_free(cfg: *mut LwSimConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

unsafe fn with_config(cfg: *mut LwSimConfig, f: impl FnOnce(&mut SimConfig)) -> LwStatus {
    match cfg.as_mut() {
        Some(cfg) => {
            f(&mut cfg.inner);
            LwStatus::Ok
        }
        None => LwStatus::NullPointer,
    }
}

/// Uplinks per window.
#[no_mangle]
pub unsafe extern "C" fn lw_sim_config_set_packets(
    cfg: *mut LwSimConfig,
    value: usize,
) -> LwStatus {
    with_config(cfg, |c| c.packets_per_window = value)
}

/// Window length in seconds.
#[no_mangle]
pub unsafe extern "C" fn lw_sim_config_set_window(cfg: *mut LwSimConfig, value: f64) -> LwStatus {
    with_config(cfg, |c| c.window_s = value)
}

/// Share of uplinks requesting an ACK, in [0, 1].
#[no_mangle]
pub unsafe extern "C" fn lw_sim_config_set_confirmed_fraction(
    cfg: *mut LwSimConfig,
    value: f64,
) -> LwStatus {
    with_config(cfg, |c| c.confirmed_fraction = value)
}

#[no_mangle]
pub unsafe extern "C" fn lw_sim_config_set_trials(cfg: *mut LwSimConfig, value: usize) -> LwStatus {
    with_config(cfg, |c| c.trials = value)
}

#[no_mangle]
pub unsafe extern "C" fn lw_sim_config_set_seed(cfg: *mut LwSimConfig, value: u64) -> LwStatus {
    with_config(cfg, |c| c.seed = value)
}

/// Application payload bytes per uplink.
#[no_mangle]
pub unsafe extern "C" fn lw_sim_config_set_payload(
    cfg: *mut LwSimConfig,
    value: usize,
) -> LwStatus {
    with_config(cfg, |c| c.payload_bytes = value)
}

/// Header bytes added to each uplink's PHY payload.
#[no_mangle]
pub unsafe extern "C" fn lw_sim_config_set_overhead(
    cfg: *mut LwSimConfig,
    value: usize,
) -> LwStatus {
    with_config(cfg, |c| c.overhead_bytes = value)
}

/// Delay in seconds between uplink end and ACK start.
#[no_mangle]
pub unsafe extern "C" fn lw_sim_config_set_rx1_delay(
    cfg: *mut LwSimConfig,
    value: f64,
) -> LwStatus {
    with_config(cfg, |c| c.rx1_delay_s = value)
}

/// Gateway duty cycle used for the violation flag.
#[no_mangle]
pub unsafe extern "C" fn lw_sim_config_set_duty_cycle(
    cfg: *mut LwSimConfig,
    value: f64,
) -> LwStatus {
    with_config(cfg, |c| c.duty_cycle = value)
}

/// Runs the full simulation. On success `*out_report` owns a report to be
/// released with [`lw_sim_report_free`].
#[no_mangle]
pub unsafe extern "C" fn lw_simulate(
    cfg: *const LwSimConfig,
    out_report: *mut *mut LwSimReport,
) -> LwStatus {
    guard(|| {
        let (Some(cfg), false) = (cfg.as_ref(), out_report.is_null()) else {
            return LwStatus::NullPointer;
        };
        *out_report = ptr::null_mut();
        match simulate_with_confirmations(&cfg.inner) {
            Ok(report) => {
                *out_report = Box::into_raw(Box::new(LwSimReport { inner: report }));
                LwStatus::Ok
            }
            Err(_) => LwStatus::InvalidArgument,
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn lw_sim_report_free(report: *mut LwSimReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

#[no_mangle]
pub unsafe extern "C" fn lw_sim_report_summary(
    report: *const LwSimReport,
    out: *mut LwSimSummary,
) -> LwStatus {
    let (Some(report), false) = (report.as_ref(), out.is_null()) else {
        return LwStatus::NullPointer;
    };
    let r = &report.inner;
    *out = LwSimSummary {
        total_uplinks: r.total_uplinks,
        delivered: r.delivered,
        collided: r.collided,
        lost_gateway_busy: r.lost_gateway_busy,
        acks_sent: r.acks_sent,
        acks_dropped: r.acks_dropped,
        loss_rate: r.loss_rate(),
        gateway_tx_time_s: r.gateway_tx_time_s,
        gateway_airtime_fraction: r.gateway_airtime_fraction,
        duty_violation: r.duty_violation,
    };
    LwStatus::Ok
}

/// Collision rate of one spreading factor; `InvalidArgument` if the SF was
/// not simulated.
#[no_mangle]
pub unsafe extern "C" fn lw_sim_report_collision_rate(
    report: *const LwSimReport,
    sf: u8,
    out_rate: *mut f64,
) -> LwStatus {
    let (Some(report), false) = (report.as_ref(), out_rate.is_null()) else {
        return LwStatus::NullPointer;
    };
    match report.inner.per_sf.get(&sf) {
        Some(stats) => {
            *out_rate = stats.collision_rate();
            LwStatus::Ok
        }
        None => LwStatus::InvalidArgument,
    }
}

/// Parses and decrypts an uplink. `key` may be null for the generic key,
/// otherwise it points at 16 bytes used as both session keys. A MIC
/// mismatch is not an error; query it with [`lw_frame_mic_ok`].
#[no_mangle]
pub unsafe extern "C" fn lw_decode(
    bytes: *const u8,
    len: usize,
    key: *const u8,
    out_frame: *mut *mut LwFrame,
) -> LwStatus {
    guard(|| {
        if (bytes.is_null() && len > 0) || out_frame.is_null() {
            return LwStatus::NullPointer;
        }
        *out_frame = ptr::null_mut();
        let raw: &[u8] = if len == 0 {
            &[]
        } else {
            std::slice::from_raw_parts(bytes, len)
        };
        let mut session = GENERIC_KEY;
        if !key.is_null() {
            session.copy_from_slice(std::slice::from_raw_parts(key, 16));
        }
        match decode_with(raw, &SessionKeys::shared(session)) {
            Ok(decoded) => {
                *out_frame = Box::into_raw(Box::new(LwFrame { inner: decoded }));
                LwStatus::Ok
            }
            Err(CodecError::NotDataFrame(_)) => LwStatus::NotDataFrame,
            Err(CodecError::NoPayload) => LwStatus::NoPayload,
            Err(_) => LwStatus::ParseError,
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn lw_frame_free(frame: *mut LwFrame) {
    if !frame.is_null() {
        drop(Box::from_raw(frame));
    }
}

/// DevAddr, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn lw_frame_dev_addr(frame: *const LwFrame) -> u32 {
    frame.as_ref().map_or(0, |f| f.inner.frame.dev_addr)
}

#[no_mangle]
pub unsafe extern "C" fn lw_frame_fcnt(frame: *const LwFrame) -> u16 {
    frame.as_ref().map_or(0, |f| f.inner.frame.fcnt)
}

/// FPort, or -1 when absent.
#[no_mangle]
pub unsafe extern "C" fn lw_frame_fport(frame: *const LwFrame) -> i16 {
    frame
        .as_ref()
        .and_then(|f| f.inner.frame.fport)
        .map_or(-1, i16::from)
}

#[no_mangle]
pub unsafe extern "C" fn lw_frame_mic_ok(frame: *const LwFrame) -> bool {
    frame.as_ref().is_some_and(|f| f.inner.mic_ok)
}

/// Copies the plaintext into `buf`. `*out_len` always receives the full
/// plaintext length; if `cap` is smaller nothing is copied and
/// `BufferTooSmall` is returned.
#[no_mangle]
pub unsafe extern "C" fn lw_frame_plaintext(
    frame: *const LwFrame,
    buf: *mut u8,
    cap: usize,
    out_len: *mut usize,
) -> LwStatus {
    let (Some(frame), false) = (frame.as_ref(), out_len.is_null()) else {
        return LwStatus::NullPointer;
    };
    let text = &frame.inner.plaintext;
    *out_len = text.len();
    if text.len() > cap {
        return LwStatus::BufferTooSmall;
    }
    if !text.is_empty() {
        if buf.is_null() {
            return LwStatus::NullPointer;
        }
        ptr::copy_nonoverlapping(text.as_ptr(), buf, text.len());
    }
    LwStatus::Ok
}
