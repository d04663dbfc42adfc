//! Free-space path-loss distance estimation and great-circle ground truth.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Free-space path-loss constant for distance in meters and frequency in MHz.
const FSPL_CONSTANT_DB: f64 = 27.55;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathlossError {
    #[error("frequency must be positive and finite, got {0} MHz")]
    Frequency(f64),
    #[error("distance must be positive and finite, got {0} m")]
    Distance(f64),
    #[error("latitude {0} outside -90..=90")]
    Latitude(f64),
    #[error("longitude {0} outside -180..=180")]
    Longitude(f64),
}

/// A received signal level at a carrier frequency.
///
/// `level_db` is the reported RSSI; antenna gains are taken as zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalObservation {
    pub freq_mhz: f64,
    pub level_db: f64,
}

impl SignalObservation {
    pub fn new(freq_mhz: f64, level_db: f64) -> Result<Self, PathlossError> {
        check_frequency(freq_mhz)?;
        Ok(Self { freq_mhz, level_db })
    }
}

fn check_frequency(freq_mhz: f64) -> Result<(), PathlossError> {
    if freq_mhz > 0.0 && freq_mhz.is_finite() {
        Ok(())
    } else {
        Err(PathlossError::Frequency(freq_mhz))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat_deg: f64,
    pub lon_deg: f64,
}

impl GeoPoint {
    pub fn new(lat_deg: f64, lon_deg: f64) -> Result<Self, PathlossError> {
        if !(-90.0..=90.0).contains(&lat_deg) {
            return Err(PathlossError::Latitude(lat_deg));
        }
        if !(-180.0..=180.0).contains(&lon_deg) {
            return Err(PathlossError::Longitude(lon_deg));
        }
        Ok(Self { lat_deg, lon_deg })
    }
}

/// Distance in meters at which free-space loss equals `|level_db|`:
/// `10^((27.55 - 20 log10(f) + |s|) / 20)`.
pub fn estimate_distance(obs: &SignalObservation) -> Result<f64, PathlossError> {
    check_frequency(obs.freq_mhz)?;
    let exponent = (FSPL_CONSTANT_DB - 20.0 * obs.freq_mhz.log10() + obs.level_db.abs()) / 20.0;
    Ok(10f64.powf(exponent))
}

/// Free-space loss magnitude in dB over `distance_m`. Inverse of
/// [`estimate_distance`]; the received level is the negation.
pub fn free_space_loss_db(freq_mhz: f64, distance_m: f64) -> Result<f64, PathlossError> {
    check_frequency(freq_mhz)?;
    if !(distance_m > 0.0 && distance_m.is_finite()) {
        return Err(PathlossError::Distance(distance_m));
    }
    Ok(20.0 * distance_m.log10() + 20.0 * freq_mhz.log10() - FSPL_CONSTANT_DB)
}

/// Haversine distance on a spherical Earth.
pub fn great_circle_distance(a: &GeoPoint, b: &GeoPoint) -> f64 {
    let (lat1, lat2) = (a.lat_deg.to_radians(), b.lat_deg.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon_deg - a.lon_deg).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Estimated minus measured distance. Positive values mean the signal
/// suggests a longer path than the real one, as happens with urban damping.
pub fn distance_error(
    node: &GeoPoint,
    gateway: &GeoPoint,
    obs: &SignalObservation,
) -> Result<f64, PathlossError> {
    Ok(estimate_distance(obs)? - great_circle_distance(node, gateway))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_estimates() {
        let d = estimate_distance(&SignalObservation::new(868.1, -100.0).unwrap()).unwrap();
        assert!((d - 2747.0).abs() <= 1.0, "{d}");
        let d = estimate_distance(&SignalObservation::new(433.0, -80.0).unwrap()).unwrap();
        assert!((d - 550.7).abs() <= 1.0, "{d}");
    }

    #[test]
    fn unit_distance() {
        let level = 20.0 * 868.1f64.log10() - 27.55;
        let d = estimate_distance(&SignalObservation::new(868.1, -level).unwrap()).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sign_of_level_is_ignored() {
        let neg = estimate_distance(&SignalObservation::new(868.1, -90.0).unwrap()).unwrap();
        let pos = estimate_distance(&SignalObservation::new(868.1, 90.0).unwrap()).unwrap();
        assert_eq!(neg, pos);
    }

    #[test]
    fn rejects_bad_frequency() {
        assert!(SignalObservation::new(0.0, -80.0).is_err());
        assert!(SignalObservation::new(-1.0, -80.0).is_err());
        let raw = SignalObservation {
            freq_mhz: 0.0,
            level_db: -80.0,
        };
        assert_eq!(estimate_distance(&raw), Err(PathlossError::Frequency(0.0)));
    }

    #[test]
    fn great_circle_reference() {
        let a = GeoPoint::new(52.00, 4.36).unwrap();
        let b = GeoPoint::new(52.01, 4.36).unwrap();
        assert_eq!(great_circle_distance(&a, &a), 0.0);
        assert!((great_circle_distance(&a, &b) - 1111.9).abs() <= 1.0);
        assert_eq!(great_circle_distance(&a, &b), great_circle_distance(&b, &a));
    }

    #[test]
    fn geo_point_ranges() {
        assert!(GeoPoint::new(90.5, 0.0).is_err());
        assert!(GeoPoint::new(0.0, -180.5).is_err());
        assert!(GeoPoint::new(-90.0, 180.0).is_ok());
    }

    #[test]
    fn error_sign() {
        let gw = GeoPoint::new(52.0, 4.36).unwrap();
        let node = GeoPoint::new(52.01, 4.36).unwrap();
        let truth = great_circle_distance(&node, &gw);
        let loss = free_space_loss_db(868.1, truth).unwrap();
        let exact = SignalObservation::new(868.1, -loss).unwrap();
        assert!(distance_error(&node, &gw, &exact).unwrap().abs() < 1e-6);
        let damped = SignalObservation::new(868.1, -loss - 6.0).unwrap();
        assert!(distance_error(&node, &gw, &damped).unwrap() > 0.0);
    }
}
