#![allow(dead_code)]

use chrono::{DateTime, TimeZone, Utc};
use lorawan_lab::codec::{encode_uplink, SessionKeys};
use lorawan_lab::pathloss::GeoPoint;
use lorawan_lab::trace::ReceptionRecord;

pub fn at_ms(ms: i64) -> DateTime<Utc> {
    Utc.timestamp_millis_opt(1_488_369_600_000 + ms).unwrap()
}

/// Generic-key unconfirmed uplink on FPort 1.
pub fn uplink(dev_addr: u32, fcnt: u16, text: &[u8]) -> Vec<u8> {
    encode_uplink(false, dev_addr, fcnt, 1, text, &SessionKeys::generic())
}

pub fn reception(gateway: &str, t_ms: i64, sf: u8, payload: Vec<u8>) -> ReceptionRecord {
    ReceptionRecord {
        gateway_id: gateway.to_string(),
        time_utc: at_ms(t_ms),
        freq_hz: 868_100_000,
        sf,
        bw_hz: 125_000,
        rssi_dbm: -100.0,
        snr_db: 5.0,
        raw_payload: payload,
        gateway_location: None,
    }
}

pub fn located(mut rec: ReceptionRecord, lat: f64, lon: f64) -> ReceptionRecord {
    rec.gateway_location = Some(GeoPoint::new(lat, lon).unwrap());
    rec
}

/// Free-space loss in dB, written out independently of the library.
pub fn fspl_db(freq_mhz: f64, distance_m: f64) -> f64 {
    20.0 * distance_m.log10() + 20.0 * freq_mhz.log10() - 27.55
}

/// Haversine on a 6371 km sphere, written out independently of the library.
pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * 6_371_000.0 * a.sqrt().atan2((1.0 - a).sqrt())
}

/// Fisher-Yates with a fixed LCG so shuffles are reproducible without extra
/// dependencies.
pub fn shuffle<T>(items: &mut [T], mut state: u64) {
    for i in (1..items.len()).rev() {
        state = state
            .wrapping_mul(6_364_136_223_846_793_005)
            .wrapping_add(1_442_695_040_888_963_407);
        let j = ((state >> 33) % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}
