//! Monte-Carlo model of a single half-duplex gateway.
//!
//! Each trial is one window of `window_s` seconds in which
//! `packets_per_window` uplinks start at uniformly random instants on a random
//! channel and SF. Two uplinks collide when their airtime intervals overlap on
//! the same channel and SF; both are lost, there is no capture effect.
//!
//! With confirmations enabled the gateway answers every successfully received
//! confirmed uplink with a 13-byte ACK on the same channel and SF, one receive
//! delay after the uplink ends. While the gateway transmits it hears nothing
//! on any channel, and an ACK whose start falls inside an ongoing
//! transmission is dropped.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::radio::{frame_airtime, RadioConfig, RadioError, RegionPlan};

/// PHY length of an acknowledgement: header only, no payload.
pub const ACK_FRAME_BYTES: usize = 13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("window must be positive, got {0} s")]
    Window(f64),
    #[error("confirmed fraction {0} outside [0, 1]")]
    ConfirmedFraction(f64),
    #[error("receive delay must be non-negative, got {0} s")]
    RxDelay(f64),
    #[error("at least one channel is required")]
    NoChannels,
    #[error("at least one spreading factor is required")]
    NoSpreadingFactors,
    #[error("at least one trial is required")]
    NoTrials,
    #[error("uplink-only simulation requires confirmed_fraction = 0, got {0}")]
    ConfirmationsRequested(f64),
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error(transparent)]
    Radio(#[from] RadioError),
}

/// Simulation parameters. The uplink PHY payload is
/// `payload_bytes + overhead_bytes`; by default that is a single byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub packets_per_window: usize,
    pub window_s: f64,
    pub payload_bytes: usize,
    pub overhead_bytes: usize,
    pub confirmed_fraction: f64,
    pub rx1_delay_s: f64,
    pub channels: Vec<u32>,
    pub sfs: Vec<u8>,
    pub duty_cycle: f64,
    pub seed: u64,
    pub trials: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        let plan = RegionPlan::eu868();
        Self {
            packets_per_window: 100,
            window_s: 60.0,
            payload_bytes: 1,
            overhead_bytes: 0,
            confirmed_fraction: 0.0,
            rx1_delay_s: 1.0,
            channels: plan.channels_hz,
            sfs: (7..=12).collect(),
            duty_cycle: plan.duty_cycle,
            seed: 0,
            trials: 100,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.window_s > 0.0 && self.window_s.is_finite()) {
            return Err(SimError::Window(self.window_s));
        }
        if !(0.0..=1.0).contains(&self.confirmed_fraction) {
            return Err(SimError::ConfirmedFraction(self.confirmed_fraction));
        }
        if !(self.rx1_delay_s >= 0.0 && self.rx1_delay_s.is_finite()) {
            return Err(SimError::RxDelay(self.rx1_delay_s));
        }
        if self.channels.is_empty() {
            return Err(SimError::NoChannels);
        }
        if self.sfs.is_empty() {
            return Err(SimError::NoSpreadingFactors);
        }
        if self.trials == 0 {
            return Err(SimError::NoTrials);
        }
        for &sf in &self.sfs {
            RadioConfig::eu868(sf)?;
        }
        Ok(())
    }

    fn uplink_bytes(&self) -> usize {
        self.payload_bytes + self.overhead_bytes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Uplink,
    DownlinkAck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Fate {
    Delivered,
    Collided,
    LostGatewayBusy,
    AckDropped,
}

/// One frame on air.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionEvent {
    pub start_s: f64,
    pub airtime_s: f64,
    pub channel_hz: u32,
    pub sf: u8,
    pub direction: Direction,
    pub wants_ack: bool,
    pub fate: Option<Fate>,
}

impl TransmissionEvent {
    pub fn end_s(&self) -> f64 {
        self.start_s + self.airtime_s
    }

    pub fn overlaps(&self, other: &TransmissionEvent) -> bool {
        self.start_s < other.end_s() && other.start_s < self.end_s()
    }
}

/// EU868 airtime of `pl_bytes` at every SF in `sfs`, keyed by SF.
fn airtime_table(sfs: &[u8], pl_bytes: usize) -> Result<BTreeMap<u8, f64>, RadioError> {
    sfs.iter()
        .map(|&sf| Ok((sf, frame_airtime(&RadioConfig::eu868(sf)?, pl_bytes))))
        .collect()
}

/// Draws one window of uplinks. Every event consumes the same four random
/// values whatever the confirmed fraction, so traffic for a given seed does
/// not depend on `confirmed_fraction` except for the ACK flags.
pub fn generate_traffic<R: Rng + ?Sized>(
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<Vec<TransmissionEvent>, SimError> {
    cfg.validate()?;
    let airtimes = airtime_table(&cfg.sfs, cfg.uplink_bytes())?;
    Ok(draw_uplinks(cfg, &airtimes, rng))
}

fn draw_uplinks<R: Rng + ?Sized>(
    cfg: &SimConfig,
    airtimes: &BTreeMap<u8, f64>,
    rng: &mut R,
) -> Vec<TransmissionEvent> {
    (0..cfg.packets_per_window)
        .map(|_| {
            let start_s = rng.random::<f64>() * cfg.window_s;
            let sf = cfg.sfs[rng.random_range(0..cfg.sfs.len())];
            let channel_hz = cfg.channels[rng.random_range(0..cfg.channels.len())];
            let wants_ack = rng.random::<f64>() < cfg.confirmed_fraction;
            TransmissionEvent {
                start_s,
                airtime_s: airtimes[&sf],
                channel_hz,
                sf,
                direction: Direction::Uplink,
                wants_ack,
                fate: None,
            }
        })
        .collect()
}

/// Marks every event `Collided` if it overlaps another event on the same
/// channel and SF, `Delivered` otherwise.
///
/// Events are swept per (channel, SF) in start order. An event overlaps an
/// earlier one iff it starts before the latest end seen so far, and overlaps
/// a later one iff the next event in start order begins before it ends.
pub fn detect_collisions(events: &mut [TransmissionEvent]) {
    let mut cells: BTreeMap<(u32, u8), Vec<usize>> = BTreeMap::new();
    for (i, ev) in events.iter().enumerate() {
        cells.entry((ev.channel_hz, ev.sf)).or_default().push(i);
    }
    for mut idx in cells.into_values() {
        idx.sort_by(|&a, &b| events[a].start_s.total_cmp(&events[b].start_s));
        let mut latest_end = f64::NEG_INFINITY;
        for (k, &i) in idx.iter().enumerate() {
            let ev = &events[i];
            let hit_before = ev.start_s < latest_end;
            let hit_after = idx
                .get(k + 1)
                .is_some_and(|&next| events[next].start_s < ev.end_s());
            latest_end = latest_end.max(ev.end_s());
            events[i].fate = Some(if hit_before || hit_after {
                Fate::Collided
            } else {
                Fate::Delivered
            });
        }
    }
}

/// Everything that happened in one simulated window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowOutcome {
    pub uplinks: Vec<TransmissionEvent>,
    pub acks: Vec<TransmissionEvent>,
}

impl WindowOutcome {
    pub fn gateway_tx_time_s(&self) -> f64 {
        self.acks
            .iter()
            .filter(|a| a.fate == Some(Fate::Delivered))
            .map(|a| a.airtime_s)
            .sum()
    }
}

/// Applies gateway acknowledgements and half-duplex loss to uplinks whose
/// collision fate is already set.
///
/// Uplinks are visited in order of their end time. Any ACK able to overlap
/// an uplink starts before that uplink ends, so it was triggered by an uplink
/// that ended earlier and is already on the gateway's schedule.
fn acknowledge(
    uplinks: &mut [TransmissionEvent],
    ack_airtimes: &BTreeMap<u8, f64>,
    rx1_delay_s: f64,
) -> Vec<TransmissionEvent> {
    let mut order: Vec<usize> = (0..uplinks.len()).collect();
    order.sort_by(|&a, &b| uplinks[a].end_s().total_cmp(&uplinks[b].end_s()));

    let mut acks: Vec<TransmissionEvent> = Vec::new();
    // Transmitted ACKs only; pairwise disjoint and sorted by start.
    let mut on_air: Vec<(f64, f64)> = Vec::new();
    let mut busy_until = f64::NEG_INFINITY;

    for i in order {
        let up = &mut uplinks[i];
        if up.fate != Some(Fate::Delivered) {
            continue;
        }
        let end = up.end_s();
        let n_before = on_air.partition_point(|&(start, _)| start < end);
        if n_before > 0 && on_air[n_before - 1].1 > up.start_s {
            up.fate = Some(Fate::LostGatewayBusy);
            continue;
        }
        if !up.wants_ack {
            continue;
        }
        let start_s = end + rx1_delay_s;
        let airtime_s = ack_airtimes[&up.sf];
        let fate = if start_s < busy_until {
            Fate::AckDropped
        } else {
            busy_until = start_s + airtime_s;
            on_air.push((start_s, busy_until));
            Fate::Delivered
        };
        acks.push(TransmissionEvent {
            start_s,
            airtime_s,
            channel_hz: up.channel_hz,
            sf: up.sf,
            direction: Direction::DownlinkAck,
            wants_ack: false,
            fate: Some(fate),
        });
    }
    acks
}

struct Prepared {
    uplink_airtimes: BTreeMap<u8, f64>,
    ack_airtimes: BTreeMap<u8, f64>,
}

impl Prepared {
    fn new(cfg: &SimConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        Ok(Self {
            uplink_airtimes: airtime_table(&cfg.sfs, cfg.uplink_bytes())?,
            ack_airtimes: airtime_table(&cfg.sfs, ACK_FRAME_BYTES)?,
        })
    }

    fn window<R: Rng + ?Sized>(&self, cfg: &SimConfig, rng: &mut R) -> WindowOutcome {
        let mut uplinks = draw_uplinks(cfg, &self.uplink_airtimes, rng);
        detect_collisions(&mut uplinks);
        let acks = acknowledge(&mut uplinks, &self.ack_airtimes, cfg.rx1_delay_s);
        WindowOutcome { uplinks, acks }
    }
}

/// Random generator for one trial. Trials use distinct ChaCha streams of the
/// same seed, so results do not depend on scheduling.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Runs a single window with the trial's generator.
pub fn simulate_window(cfg: &SimConfig, trial: usize) -> Result<WindowOutcome, SimError> {
    let prepared = Prepared::new(cfg)?;
    Ok(prepared.window(cfg, &mut trial_rng(cfg.seed, trial)))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SfStats {
    pub uplinks: u64,
    pub collided: u64,
    pub lost_gateway_busy: u64,
}

impl SfStats {
    pub fn collision_rate(&self) -> f64 {
        ratio(self.collided, self.uplinks)
    }

    pub fn loss_rate(&self) -> f64 {
        ratio(self.collided + self.lost_gateway_busy, self.uplinks)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Aggregate over all trials of one configuration. Rates pool the counts of
/// every trial; the airtime fraction is total ACK airtime over total
/// simulated time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub packets_per_window: usize,
    pub confirmed_fraction: f64,
    pub trials: usize,
    pub window_s: f64,
    pub seed: u64,
    pub per_sf: BTreeMap<u8, SfStats>,
    pub total_uplinks: u64,
    pub delivered: u64,
    pub collided: u64,
    pub lost_gateway_busy: u64,
    pub acks_sent: u64,
    pub acks_dropped: u64,
    pub gateway_tx_time_s: f64,
    pub gateway_airtime_fraction: f64,
    pub duty_violation: bool,
    /// Windows whose own ACK airtime exceeded the duty cycle.
    pub windows_in_violation: u64,
}

impl SimReport {
    pub fn collision_rate(&self, sf: u8) -> f64 {
        self.per_sf.get(&sf).map_or(0.0, SfStats::collision_rate)
    }

    pub fn loss_rate(&self) -> f64 {
        ratio(self.collided + self.lost_gateway_busy, self.total_uplinks)
    }

    fn accumulate(cfg: &SimConfig, windows: &[WindowOutcome]) -> Self {
        let mut per_sf: BTreeMap<u8, SfStats> =
            cfg.sfs.iter().map(|&sf| (sf, SfStats::default())).collect();
        let mut report = SimReport {
            packets_per_window: cfg.packets_per_window,
            confirmed_fraction: cfg.confirmed_fraction,
            trials: windows.len(),
            window_s: cfg.window_s,
            seed: cfg.seed,
            per_sf: BTreeMap::new(),
            total_uplinks: 0,
            delivered: 0,
            collided: 0,
            lost_gateway_busy: 0,
            acks_sent: 0,
            acks_dropped: 0,
            gateway_tx_time_s: 0.0,
            gateway_airtime_fraction: 0.0,
            duty_violation: false,
            windows_in_violation: 0,
        };
        for w in windows {
            for up in &w.uplinks {
                let stats = per_sf.entry(up.sf).or_default();
                stats.uplinks += 1;
                report.total_uplinks += 1;
                match up.fate {
                    Some(Fate::Delivered) => report.delivered += 1,
                    Some(Fate::Collided) => {
                        stats.collided += 1;
                        report.collided += 1;
                    }
                    Some(Fate::LostGatewayBusy) => {
                        stats.lost_gateway_busy += 1;
                        report.lost_gateway_busy += 1;
                    }
                    Some(Fate::AckDropped) | None => {
                        unreachable!("uplink without a reception fate")
                    }
                }
            }
            for ack in &w.acks {
                match ack.fate {
                    Some(Fate::AckDropped) => report.acks_dropped += 1,
                    _ => report.acks_sent += 1,
                }
            }
            let tx = w.gateway_tx_time_s();
            if tx / cfg.window_s > cfg.duty_cycle {
                report.windows_in_violation += 1;
            }
            report.gateway_tx_time_s += tx;
        }
        report.per_sf = per_sf;
        report.gateway_airtime_fraction =
            report.gateway_tx_time_s / (cfg.window_s * windows.len() as f64);
        report.duty_violation = report.gateway_airtime_fraction > cfg.duty_cycle;
        report
    }
}

fn run(cfg: &SimConfig) -> Result<SimReport, SimError> {
    let prepared = Prepared::new(cfg)?;
    let windows: Vec<WindowOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| prepared.window(cfg, &mut trial_rng(cfg.seed, trial)))
        .collect();
    Ok(SimReport::accumulate(cfg, &windows))
}

/// Uplink-only collision rates averaged over `cfg.trials` windows.
pub fn simulate_uplink_collisions(cfg: &SimConfig) -> Result<SimReport, SimError> {
    if cfg.confirmed_fraction != 0.0 {
        return Err(SimError::ConfirmationsRequested(cfg.confirmed_fraction));
    }
    run(cfg)
}

/// Full pipeline including gateway ACKs, half-duplex loss and duty-cycle
/// accounting.
pub fn simulate_with_confirmations(cfg: &SimConfig) -> Result<SimReport, SimError> {
    run(cfg)
}

/// Grid of (packets per window, confirmed fraction) points run on top of a
/// base configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub packets_per_window: Vec<usize>,
    pub confirmed_fractions: Vec<f64>,
}

/// Seed of grid point `index`; point 0 uses the base seed unchanged.
pub fn grid_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// One report per grid point, ordered with the confirmed fraction varying
/// fastest.
pub fn sweep(base: &SimConfig, grid: &SweepGrid) -> Result<Vec<SimReport>, SimError> {
    if grid.packets_per_window.is_empty() || grid.confirmed_fractions.is_empty() {
        return Err(SimError::EmptyGrid);
    }
    let points: Vec<SimConfig> = grid
        .packets_per_window
        .iter()
        .flat_map(|&n| grid.confirmed_fractions.iter().map(move |&p| (n, p)))
        .enumerate()
        .map(|(i, (n, p))| SimConfig {
            packets_per_window: n,
            confirmed_fraction: p,
            seed: grid_seed(base.seed, i),
            ..base.clone()
        })
        .collect();
    points.iter().map(simulate_with_confirmations).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uplink(start_s: f64, airtime_s: f64, channel_hz: u32, sf: u8) -> TransmissionEvent {
        TransmissionEvent {
            start_s,
            airtime_s,
            channel_hz,
            sf,
            direction: Direction::Uplink,
            wants_ack: false,
            fate: None,
        }
    }

    fn fates(events: &[TransmissionEvent]) -> Vec<Fate> {
        events.iter().map(|e| e.fate.unwrap()).collect()
    }

    #[test]
    fn overlapping_same_cell_collides() {
        let mut ev = vec![
            uplink(0.0, 0.046336, 868_100_000, 7),
            uplink(0.020, 0.046336, 868_100_000, 7),
        ];
        detect_collisions(&mut ev);
        assert_eq!(fates(&ev), vec![Fate::Collided, Fate::Collided]);
    }

    #[test]
    fn separated_frames_are_delivered() {
        let mut ev = vec![
            uplink(0.0, 0.046336, 868_100_000, 7),
            uplink(0.050, 0.046336, 868_100_000, 7),
        ];
        detect_collisions(&mut ev);
        assert_eq!(fates(&ev), vec![Fate::Delivered, Fate::Delivered]);
    }

    #[test]
    fn back_to_back_frames_do_not_overlap() {
        let mut ev = vec![
            uplink(0.0, 0.5, 868_100_000, 7),
            uplink(0.5, 0.5, 868_100_000, 7),
        ];
        detect_collisions(&mut ev);
        assert_eq!(fates(&ev), vec![Fate::Delivered, Fate::Delivered]);
    }

    #[test]
    fn other_channel_or_sf_is_orthogonal() {
        let mut ev = vec![
            uplink(0.0, 0.046336, 868_100_000, 7),
            uplink(0.020, 0.046336, 868_300_000, 7),
            uplink(0.010, 0.082432, 868_100_000, 8),
        ];
        detect_collisions(&mut ev);
        assert!(fates(&ev).iter().all(|f| *f == Fate::Delivered));
    }

    #[test]
    fn long_frame_shadows_later_ones() {
        // the first frame spans both later ones, which do not touch each other
        let mut ev = vec![
            uplink(0.0, 10.0, 868_100_000, 7),
            uplink(2.0, 1.0, 868_100_000, 7),
            uplink(5.0, 1.0, 868_100_000, 7),
            uplink(11.0, 1.0, 868_100_000, 7),
        ];
        detect_collisions(&mut ev);
        assert_eq!(
            fates(&ev),
            vec![
                Fate::Collided,
                Fate::Collided,
                Fate::Collided,
                Fate::Delivered
            ]
        );
    }

    #[test]
    fn empty_traffic() {
        let cfg = SimConfig {
            packets_per_window: 0,
            ..SimConfig::default()
        };
        let traffic = generate_traffic(&cfg, &mut trial_rng(1, 0)).unwrap();
        assert!(traffic.is_empty());
    }

    #[test]
    fn traffic_is_reproducible() {
        let cfg = SimConfig {
            packets_per_window: 1000,
            ..SimConfig::default()
        };
        let a = generate_traffic(&cfg, &mut trial_rng(42, 0)).unwrap();
        let b = generate_traffic(&cfg, &mut trial_rng(42, 0)).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|e| (0.0..60.0).contains(&e.start_s)));
    }

    #[test]
    fn ack_is_sent_after_receive_delay() {
        let mut ups = vec![uplink(0.0, 0.046336, 868_100_000, 7)];
        ups[0].wants_ack = true;
        detect_collisions(&mut ups);
        let acks = acknowledge(&mut ups, &airtime_table(&[7], 13).unwrap(), 1.0);
        assert_eq!(acks.len(), 1);
        assert!((acks[0].start_s - 1.046336).abs() < 1e-12);
        assert!((acks[0].airtime_s - 0.046336).abs() < 1e-12);
        assert_eq!(acks[0].channel_hz, 868_100_000);
        assert_eq!(acks[0].fate, Some(Fate::Delivered));
    }

    #[test]
    fn collided_uplinks_get_no_ack() {
        let mut ups = vec![
            uplink(0.0, 0.046336, 868_100_000, 7),
            uplink(0.01, 0.046336, 868_100_000, 7),
        ];
        ups.iter_mut().for_each(|u| u.wants_ack = true);
        detect_collisions(&mut ups);
        let acks = acknowledge(&mut ups, &airtime_table(&[7], 13).unwrap(), 1.0);
        assert!(acks.is_empty());
    }

    #[test]
    fn uplink_during_ack_is_lost_on_any_channel() {
        let table = airtime_table(&[7, 12], 13).unwrap();
        let mut ups = vec![
            uplink(0.0, 0.046336, 868_100_000, 7),
            // on air while the ACK (1.046 .. 1.093) is transmitted
            uplink(1.05, 1.155, 868_500_000, 12),
        ];
        ups[0].wants_ack = true;
        detect_collisions(&mut ups);
        let acks = acknowledge(&mut ups, &table, 1.0);
        assert_eq!(acks.len(), 1);
        assert_eq!(ups[1].fate, Some(Fate::LostGatewayBusy));
    }

    #[test]
    fn ack_during_transmission_is_dropped() {
        let table = airtime_table(&[12], 13).unwrap();
        let mut ups = vec![
            uplink(0.0, 1.155072, 868_100_000, 12),
            uplink(3.4, 1.155072, 868_300_000, 12),
        ];
        ups.iter_mut().for_each(|u| u.wants_ack = true);
        detect_collisions(&mut ups);
        // first ACK occupies 2.155 .. 3.310, the second starts at 5.555
        let acks = acknowledge(&mut ups, &table, 1.0);
        assert_eq!(acks.len(), 2);
        assert!(acks.iter().all(|a| a.fate == Some(Fate::Delivered)));

        let mut ups = vec![
            uplink(0.0, 1.155072, 868_100_000, 12),
            uplink(0.5, 1.155072, 868_300_000, 12),
        ];
        ups.iter_mut().for_each(|u| u.wants_ack = true);
        detect_collisions(&mut ups);
        // second ACK would start at 2.655, inside the first (2.155 .. 3.310)
        let acks = acknowledge(&mut ups, &table, 1.0);
        assert_eq!(acks[1].fate, Some(Fate::AckDropped));
        assert_eq!(ups[1].fate, Some(Fate::Delivered));
    }

    #[test]
    fn single_packet_never_collides() {
        let cfg = SimConfig {
            packets_per_window: 1,
            trials: 50,
            ..SimConfig::default()
        };
        let report = simulate_uplink_collisions(&cfg).unwrap();
        assert_eq!(report.collided, 0);
        assert_eq!(report.total_uplinks, 50);
        assert!(report.per_sf.values().all(|s| s.collision_rate() == 0.0));
    }

    #[test]
    fn uplink_only_rejects_confirmations() {
        let cfg = SimConfig {
            confirmed_fraction: 0.01,
            ..SimConfig::default()
        };
        assert!(matches!(
            simulate_uplink_collisions(&cfg),
            Err(SimError::ConfirmationsRequested(_))
        ));
    }

    #[test]
    fn invalid_configs() {
        let bad = |f: fn(&mut SimConfig)| {
            let mut c = SimConfig::default();
            f(&mut c);
            c.validate().unwrap_err()
        };
        assert_eq!(bad(|c| c.window_s = 0.0), SimError::Window(0.0));
        assert_eq!(
            bad(|c| c.confirmed_fraction = 1.5),
            SimError::ConfirmedFraction(1.5)
        );
        assert_eq!(bad(|c| c.channels.clear()), SimError::NoChannels);
        assert_eq!(bad(|c| c.sfs.clear()), SimError::NoSpreadingFactors);
        assert_eq!(bad(|c| c.trials = 0), SimError::NoTrials);
        assert!(matches!(bad(|c| c.sfs = vec![13]), SimError::Radio(_)));
    }

    #[test]
    fn empty_grid_is_rejected() {
        let grid = SweepGrid {
            packets_per_window: vec![],
            confirmed_fractions: vec![0.0],
        };
        assert_eq!(
            sweep(&SimConfig::default(), &grid),
            Err(SimError::EmptyGrid)
        );
    }

    #[test]
    fn grid_seed_zero_is_base() {
        assert_eq!(grid_seed(77, 0), 77);
        assert_ne!(grid_seed(77, 1), 77);
    }
}
