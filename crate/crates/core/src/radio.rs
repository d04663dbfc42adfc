//! LoRa time-on-air and EU868 capacity limits.
//!
//! Airtime follows the Semtech modem formula: a frame is a preamble of
//! `n_preamble + 4.25` symbols followed by a payload whose symbol count
//! depends on SF, coding rate, the explicit header flag and low data rate
//! optimization. Everything here is a pure function of its inputs.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SECONDS_PER_DAY: f64 = 86_400.0;

pub const MIN_SF: u8 = 7;
pub const MAX_SF: u8 = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadioError {
    #[error("spreading factor {0} outside 7..=12")]
    SpreadingFactor(u8),
    #[error("coding rate index {0} outside 1..=4")]
    CodingRate(u8),
    #[error("bandwidth must be positive, got {0} Hz")]
    Bandwidth(u32),
    #[error("payload of {payload} bytes exceeds the SF{sf} limit of {max} bytes")]
    PayloadTooLarge { sf: u8, payload: usize, max: usize },
    #[error("region plan has no payload limit for SF{0}")]
    NoPayloadLimit(u8),
    #[error("invalid duty cycle {0}, expected a fraction in [0, 1]")]
    DutyCycle(f64),
    #[error("no data rate matches {0}")]
    UnknownDataRate(RadioConfig),
    #[error("data rate {0} is not a LoRa data rate")]
    NotLora(u8),
}

/// PHY parameters of one LoRa transmission.
///
/// The low data rate optimization flag is derived from SF and bandwidth and
/// cannot be set directly: it is on for SF11/SF12 at 125 kHz and off
/// everywhere else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RadioConfig {
    sf: u8,
    bw_hz: u32,
    cr: u8,
    n_preamble: u16,
    header_disabled: bool,
    low_dr_opt: bool,
}

impl RadioConfig {
    /// LoRaWAN defaults for the remaining fields: 8 preamble symbols and an
    /// explicit header.
    pub fn new(sf: u8, bw_hz: u32, cr: u8) -> Result<Self, RadioError> {
        if !(MIN_SF..=MAX_SF).contains(&sf) {
            return Err(RadioError::SpreadingFactor(sf));
        }
        if !(1..=4).contains(&cr) {
            return Err(RadioError::CodingRate(cr));
        }
        if bw_hz == 0 {
            return Err(RadioError::Bandwidth(bw_hz));
        }
        Ok(Self {
            sf,
            bw_hz,
            cr,
            n_preamble: 8,
            header_disabled: false,
            low_dr_opt: sf >= 11 && bw_hz == 125_000,
        })
    }

    /// EU868 uplink: 125 kHz, coding rate 4/5.
    pub fn eu868(sf: u8) -> Result<Self, RadioError> {
        Self::new(sf, 125_000, 1)
    }

    pub fn with_preamble(mut self, n_preamble: u16) -> Self {
        self.n_preamble = n_preamble;
        self
    }

    /// Implicit header mode. LoRaWAN frames always carry the header; this
    /// exists for raw LoRa links.
    pub fn with_header_disabled(mut self, disabled: bool) -> Self {
        self.header_disabled = disabled;
        self
    }

    pub fn sf(&self) -> u8 {
        self.sf
    }

    pub fn bw_hz(&self) -> u32 {
        self.bw_hz
    }

    pub fn cr(&self) -> u8 {
        self.cr
    }

    pub fn n_preamble(&self) -> u16 {
        self.n_preamble
    }

    pub fn header_disabled(&self) -> bool {
        self.header_disabled
    }

    pub fn low_dr_opt(&self) -> bool {
        self.low_dr_opt
    }
}

impl fmt::Display for RadioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SF{}/{} kHz CR4/{}",
            self.sf,
            f64::from(self.bw_hz) / 1000.0,
            self.cr + 4
        )
    }
}

/// Duration of one chirp symbol, `2^SF / BW`, in seconds.
pub fn symbol_time(cfg: &RadioConfig) -> f64 {
    f64::from(1u32 << cfg.sf) / f64::from(cfg.bw_hz)
}

pub fn preamble_time(cfg: &RadioConfig) -> f64 {
    (f64::from(cfg.n_preamble) + 4.25) * symbol_time(cfg)
}

/// Number of payload symbols for a PHY payload of `pl_bytes`, including the
/// fixed 8 symbols that follow the preamble.
pub fn payload_symbols(cfg: &RadioConfig, pl_bytes: usize) -> u64 {
    let sf = i64::from(cfg.sf);
    let h = i64::from(cfg.header_disabled);
    let de = i64::from(cfg.low_dr_opt);
    let numerator = 8 * pl_bytes as i64 - 4 * sf + 28 + 16 - 20 * h;
    let denominator = 4 * (sf - 2 * de);
    let blocks = div_ceil(numerator, denominator);
    (blocks * (i64::from(cfg.cr) + 4)).max(0) as u64 + 8
}

fn div_ceil(n: i64, d: i64) -> i64 {
    let q = n / d;
    if n % d != 0 && (n > 0) == (d > 0) {
        q + 1
    } else {
        q
    }
}

/// Time on air of a whole frame in seconds.
pub fn frame_airtime(cfg: &RadioConfig, pl_bytes: usize) -> f64 {
    preamble_time(cfg) + payload_symbols(cfg, pl_bytes) as f64 * symbol_time(cfg)
}

/// Channel plan and regulatory limits of a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPlan {
    pub channels_hz: Vec<u32>,
    pub duty_cycle: f64,
    pub max_tx_dbm: f64,
    pub max_payload_by_sf: BTreeMap<u8, usize>,
}

impl RegionPlan {
    /// The three mandatory EU868 channels, 1% duty cycle, 14 dBm.
    pub fn eu868() -> Self {
        Self {
            channels_hz: vec![868_100_000, 868_300_000, 868_500_000],
            duty_cycle: 0.01,
            max_tx_dbm: 14.0,
            max_payload_by_sf: [(7, 230), (8, 230), (9, 123), (10, 59), (11, 59), (12, 59)]
                .into_iter()
                .collect(),
        }
    }

    pub fn with_duty_cycle(mut self, duty_cycle: f64) -> Result<Self, RadioError> {
        if !(0.0..=1.0).contains(&duty_cycle) {
            return Err(RadioError::DutyCycle(duty_cycle));
        }
        self.duty_cycle = duty_cycle;
        Ok(self)
    }

    pub fn max_payload(&self, sf: u8) -> Result<usize, RadioError> {
        self.max_payload_by_sf
            .get(&sf)
            .copied()
            .ok_or(RadioError::NoPayloadLimit(sf))
    }

    fn check_payload(&self, cfg: &RadioConfig, pl_bytes: usize) -> Result<(), RadioError> {
        let max = self.max_payload(cfg.sf)?;
        if pl_bytes > max {
            return Err(RadioError::PayloadTooLarge {
                sf: cfg.sf,
                payload: pl_bytes,
                max,
            });
        }
        Ok(())
    }
}

impl Default for RegionPlan {
    fn default() -> Self {
        Self::eu868()
    }
}

/// Unconfirmed frames a node may send per day on a single channel without
/// exceeding the duty cycle.
///
/// Accounting is per channel rather than per ETSI sub-band.
pub fn frames_per_day(
    cfg: &RadioConfig,
    pl_bytes: usize,
    plan: &RegionPlan,
) -> Result<u64, RadioError> {
    plan.check_payload(cfg, pl_bytes)?;
    let budget = SECONDS_PER_DAY * plan.duty_cycle;
    Ok((budget / frame_airtime(cfg, pl_bytes)).floor() as u64)
}

/// Payload bytes per day per channel: `frames_per_day * pl_bytes`.
pub fn data_per_day(
    cfg: &RadioConfig,
    pl_bytes: usize,
    plan: &RegionPlan,
) -> Result<u64, RadioError> {
    Ok(frames_per_day(cfg, pl_bytes, plan)? * pl_bytes as u64)
}

/// What an EU863-870 data rate index stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataRateKind {
    Lora { sf: u8, bw_hz: u32 },
    Fsk { bitrate: u32 },
    Reserved,
}

/// EU863-870 data rate index (0..=15).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DataRate(u8);

const EU868_DATA_RATES: [(DataRateKind, u32); 8] = [
    (
        DataRateKind::Lora {
            sf: 12,
            bw_hz: 125_000,
        },
        250,
    ),
    (
        DataRateKind::Lora {
            sf: 11,
            bw_hz: 125_000,
        },
        440,
    ),
    (
        DataRateKind::Lora {
            sf: 10,
            bw_hz: 125_000,
        },
        980,
    ),
    (
        DataRateKind::Lora {
            sf: 9,
            bw_hz: 125_000,
        },
        1760,
    ),
    (
        DataRateKind::Lora {
            sf: 8,
            bw_hz: 125_000,
        },
        3125,
    ),
    (
        DataRateKind::Lora {
            sf: 7,
            bw_hz: 125_000,
        },
        5470,
    ),
    (
        DataRateKind::Lora {
            sf: 7,
            bw_hz: 250_000,
        },
        11_000,
    ),
    (DataRateKind::Fsk { bitrate: 50_000 }, 50_000),
];

impl DataRate {
    pub fn new(index: u8) -> Option<Self> {
        (index <= 15).then_some(Self(index))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn kind(self) -> DataRateKind {
        EU868_DATA_RATES
            .get(usize::from(self.0))
            .map_or(DataRateKind::Reserved, |(kind, _)| *kind)
    }

    /// Indicative physical bit rate; `None` for reserved indices.
    pub fn indicative_bitrate(self) -> Option<u32> {
        EU868_DATA_RATES
            .get(usize::from(self.0))
            .map(|(_, bps)| *bps)
    }

    /// LoRaWAN radio configuration for this data rate. FSK and reserved
    /// indices are rejected since airtime is only modelled for LoRa.
    pub fn radio_config(self) -> Result<RadioConfig, RadioError> {
        match self.kind() {
            DataRateKind::Lora { sf, bw_hz } => RadioConfig::new(sf, bw_hz, 1),
            _ => Err(RadioError::NotLora(self.0)),
        }
    }

    pub fn from_radio_config(cfg: &RadioConfig) -> Option<Self> {
        EU868_DATA_RATES
            .iter()
            .position(|(kind, _)| {
                *kind
                    == DataRateKind::Lora {
                        sf: cfg.sf,
                        bw_hz: cfg.bw_hz,
                    }
            })
            .map(|i| Self(i as u8))
    }
}

impl fmt::Display for DataRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DR{}", self.0)
    }
}

/// Indicative bit rate of the EU868 data rate matching `cfg`'s SF and
/// bandwidth.
pub fn indicative_bitrate(cfg: &RadioConfig) -> Result<u32, RadioError> {
    DataRate::from_radio_config(cfg)
        .and_then(DataRate::indicative_bitrate)
        .ok_or(RadioError::UnknownDataRate(*cfg))
}
