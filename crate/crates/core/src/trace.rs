//! Gateway reception traces: ingestion, multi-gateway deduplication,
//! histograms, payload classification and distance-error analysis.
//!
//! Traces are line-delimited JSON, one reception per line:
//!
//! ```text
//! {"gateway_id":"gw-1","time_utc":"2016-05-01T12:00:00.123Z","freq_hz":868100000,
//!  "sf":7,"bw_hz":125000,"rssi_dbm":-97.0,"snr_db":7.5,"payload_b64":"QNobASYA...",
//!  "gw_lat":52.0,"gw_lon":4.36}
//! ```
//!
//! `gw_lat`/`gw_lon` are optional. Lines that fail to parse are counted and
//! skipped.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{decode_generic, parse_phy_payload, PhyFrame};
use crate::pathloss::{distance_error, GeoPoint, SignalObservation};

/// Identifies the payload classification rules so counts can be compared
/// across runs.
pub const RULESET_VERSION: &str = "payload-rules/1";

pub const DEFAULT_DEDUP_WINDOW_S: f64 = 5.0;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("cannot read trace: {0}")]
    Io(#[from] std::io::Error),
    #[error("no samples to normalise")]
    EmptyInput,
    #[error("invalid binning: {0}")]
    Binning(String),
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum RecordError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("invalid timestamp {0:?}")]
    Timestamp(String),
    #[error("spreading factor {0} outside 7..=12")]
    Sf(u8),
    #[error("frequency must be positive")]
    Frequency,
    #[error("invalid base64 payload")]
    Payload,
    #[error("gateway location needs both gw_lat and gw_lon within range")]
    Location,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceptionRecord {
    pub gateway_id: String,
    pub time_utc: DateTime<Utc>,
    pub freq_hz: u64,
    pub sf: u8,
    pub bw_hz: u32,
    pub rssi_dbm: f64,
    pub snr_db: f64,
    pub raw_payload: Vec<u8>,
    pub gateway_location: Option<GeoPoint>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceLine {
    gateway_id: String,
    time_utc: String,
    freq_hz: u64,
    sf: u8,
    bw_hz: u32,
    rssi_dbm: f64,
    snr_db: f64,
    payload_b64: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gw_lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gw_lon: Option<f64>,
}

impl ReceptionRecord {
    pub fn from_json_line(line: &str) -> Result<Self, RecordError> {
        let raw: TraceLine =
            serde_json::from_str(line).map_err(|e| RecordError::Json(e.to_string()))?;
        let time_utc = DateTime::parse_from_rfc3339(&raw.time_utc)
            .map_err(|_| RecordError::Timestamp(raw.time_utc.clone()))?
            .with_timezone(&Utc);
        if !(7..=12).contains(&raw.sf) {
            return Err(RecordError::Sf(raw.sf));
        }
        if raw.freq_hz == 0 {
            return Err(RecordError::Frequency);
        }
        let raw_payload = BASE64
            .decode(raw.payload_b64.as_bytes())
            .map_err(|_| RecordError::Payload)?;
        let gateway_location = match (raw.gw_lat, raw.gw_lon) {
            (None, None) => None,
            (Some(lat), Some(lon)) => {
                Some(GeoPoint::new(lat, lon).map_err(|_| RecordError::Location)?)
            }
            _ => return Err(RecordError::Location),
        };
        Ok(Self {
            gateway_id: raw.gateway_id,
            time_utc,
            freq_hz: raw.freq_hz,
            sf: raw.sf,
            bw_hz: raw.bw_hz,
            rssi_dbm: raw.rssi_dbm,
            snr_db: raw.snr_db,
            raw_payload,
            gateway_location,
        })
    }

    pub fn to_json_line(&self) -> String {
        let line = TraceLine {
            gateway_id: self.gateway_id.clone(),
            time_utc: self.time_utc.to_rfc3339_opts(SecondsFormat::Millis, true),
            freq_hz: self.freq_hz,
            sf: self.sf,
            bw_hz: self.bw_hz,
            rssi_dbm: self.rssi_dbm,
            snr_db: self.snr_db,
            payload_b64: BASE64.encode(&self.raw_payload),
            gw_lat: self.gateway_location.map(|p| p.lat_deg),
            gw_lon: self.gateway_location.map(|p| p.lon_deg),
        };
        serde_json::to_string(&line).expect("trace line serialises")
    }
}

#[derive(Debug, Default)]
pub struct Ingested {
    pub records: Vec<ReceptionRecord>,
    /// 1-based line numbers of skipped lines.
    pub malformed_lines: Vec<usize>,
}

impl Ingested {
    pub fn skipped(&self) -> usize {
        self.malformed_lines.len()
    }
}

/// Reads records in file order. Blank lines are ignored; lines that do not
/// parse are skipped and counted.
pub fn ingest<R: BufRead>(reader: R) -> Result<Ingested, TraceError> {
    let mut out = Ingested::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match ReceptionRecord::from_json_line(&line) {
            Ok(rec) => out.records.push(rec),
            Err(_) => out.malformed_lines.push(i + 1),
        }
    }
    Ok(out)
}

pub fn ingest_path(path: &Path) -> Result<Ingested, TraceError> {
    let file = std::fs::File::open(path)?;
    ingest(std::io::BufReader::new(file))
}

/// What makes two receptions the same transmission.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrameKey {
    Data {
        dev_addr: u32,
        fcnt: u16,
        payload: Vec<u8>,
    },
    /// Payloads that are not LoRaWAN data frames group by their raw bytes.
    Raw(Vec<u8>),
}

impl FrameKey {
    pub fn of(raw: &[u8]) -> Self {
        match parse_phy_payload(raw) {
            Ok(PhyFrame::Data(f)) => FrameKey::Data {
                dev_addr: f.dev_addr,
                fcnt: f.fcnt,
                payload: f.frm_payload,
            },
            _ => FrameKey::Raw(raw.to_vec()),
        }
    }

    pub fn dev_addr(&self) -> Option<u32> {
        match self {
            FrameKey::Data { dev_addr, .. } => Some(*dev_addr),
            FrameKey::Raw(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniqueFrame {
    pub key: FrameKey,
    /// Sorted by reception time; never empty.
    pub receptions: Vec<ReceptionRecord>,
}

impl UniqueFrame {
    pub fn dev_addr(&self) -> Option<u32> {
        self.key.dev_addr()
    }

    pub fn first_seen(&self) -> DateTime<Utc> {
        self.receptions[0].time_utc
    }
}

/// Groups receptions of the same frame. A reception joins a group when its
/// key matches and it arrived no later than `window_s` after the group's
/// first reception; otherwise it opens a new group, so a reused frame
/// counter hours later counts as a new frame.
pub fn deduplicate(records: &[ReceptionRecord], window_s: f64) -> Vec<UniqueFrame> {
    let window_ms = (window_s * 1000.0).round() as i64;
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by_key(|&i| (records[i].time_utc, i));

    let mut frames: Vec<UniqueFrame> = Vec::new();
    let mut open: HashMap<FrameKey, usize> = HashMap::new();
    for i in order {
        let rec = &records[i];
        let key = FrameKey::of(&rec.raw_payload);
        let joined = open.get(&key).copied().filter(|&g| {
            let since = rec.time_utc - frames[g].first_seen();
            since.num_milliseconds() <= window_ms
        });
        match joined {
            Some(g) => frames[g].receptions.push(rec.clone()),
            None => {
                open.insert(key.clone(), frames.len());
                frames.push(UniqueFrame {
                    key,
                    receptions: vec![rec.clone()],
                });
            }
        }
    }
    frames
}

/// Number of unique frames heard by exactly k gateways' receptions, keyed by k.
pub fn reception_count_distribution(frames: &[UniqueFrame]) -> BTreeMap<usize, u64> {
    let mut dist = BTreeMap::new();
    for f in frames {
        *dist.entry(f.receptions.len()).or_insert(0) += 1;
    }
    dist
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Metric {
    Rssi,
    Snr,
    PayloadSize,
    Sf,
    Freq,
    FramesPerDevice,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Rssi,
        Metric::Snr,
        Metric::PayloadSize,
        Metric::Sf,
        Metric::Freq,
        Metric::FramesPerDevice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Rssi => "rssi",
            Metric::Snr => "snr",
            Metric::PayloadSize => "payload_size",
            Metric::Sf => "sf",
            Metric::Freq => "freq",
            Metric::FramesPerDevice => "frames_per_device",
        }
    }

    pub fn default_binning(self) -> Binning {
        match self {
            Metric::Rssi | Metric::Snr | Metric::PayloadSize => Binning::Uniform { width: 1.0 },
            Metric::Sf | Metric::Freq => Binning::Discrete,
            Metric::FramesPerDevice => Binning::Log2,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = TraceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.replace('-', "_");
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| TraceError::UnknownMetric(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Binning {
    /// Bins `[k*width, (k+1)*width)` covering the data.
    Uniform { width: f64 },
    /// One bin per distinct value.
    Discrete,
    /// `[0, 1)` then `[2^k, 2^(k+1))`; negative values fall outside.
    Log2,
    /// Half-open bins between consecutive, strictly increasing edges.
    Edges(Vec<f64>),
}

impl fmt::Display for Binning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Binning::Uniform { width } => write!(f, "uniform:{width}"),
            Binning::Discrete => f.write_str("discrete"),
            Binning::Log2 => f.write_str("log2"),
            Binning::Edges(e) => {
                let parts: Vec<String> = e.iter().map(|x| x.to_string()).collect();
                write!(f, "edges:{}", parts.join(";"))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Normalization {
    Count,
    /// Each bin holds its share of the binned samples; shares sum to 1.
    Pdf,
}

/// Whether signal metrics count every gateway reception or only the first
/// reception of each unique frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Weighting {
    PerReception,
    PerUniqueFrame,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramOptions {
    pub binning: Binning,
    pub normalization: Normalization,
    pub weighting: Weighting,
    pub dedup_window_s: f64,
}

impl HistogramOptions {
    pub fn for_metric(metric: Metric) -> Self {
        Self {
            binning: metric.default_binning(),
            normalization: Normalization::Count,
            weighting: Weighting::PerReception,
            dedup_window_s: DEFAULT_DEDUP_WINDOW_S,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin {
    pub lower: f64,
    /// Exclusive, except for discrete bins where it equals `lower`.
    pub upper: f64,
    pub count: u64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub metric: Metric,
    pub normalization: Normalization,
    pub bins: Vec<Bin>,
    /// Samples that fell into a bin.
    pub total: u64,
    /// Samples outside explicit or logarithmic edges.
    pub outside: u64,
}

impl Histogram {
    /// Bin edges as a flat list, for metadata lines.
    pub fn edges(&self) -> Vec<f64> {
        let mut edges: Vec<f64> = self.bins.iter().map(|b| b.lower).collect();
        if let Some(last) = self.bins.last() {
            if last.upper != last.lower {
                edges.push(last.upper);
            }
        }
        edges
    }

    pub fn count_at(&self, value: f64) -> u64 {
        self.bins
            .iter()
            .find(|b| {
                if b.upper == b.lower {
                    b.lower == value
                } else {
                    b.lower <= value && value < b.upper
                }
            })
            .map_or(0, |b| b.count)
    }

    pub fn to_csv(&self, metadata: &str) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["lower", "upper", "count", "fraction"])
            .expect("write to memory");
        for b in &self.bins {
            w.write_record([
                b.lower.to_string(),
                b.upper.to_string(),
                b.count.to_string(),
                format!("{:.12}", b.fraction),
            ])
            .expect("write to memory");
        }
        let body = String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8");
        format!("# {metadata}\n{body}")
    }
}

/// Raw sample values of `metric`.
pub fn samples(records: &[ReceptionRecord], metric: Metric, opts: &HistogramOptions) -> Vec<f64> {
    let value = |r: &ReceptionRecord| match metric {
        Metric::Rssi => r.rssi_dbm,
        Metric::Snr => r.snr_db,
        Metric::PayloadSize => r.raw_payload.len() as f64,
        Metric::Sf => f64::from(r.sf),
        Metric::Freq => r.freq_hz as f64,
        Metric::FramesPerDevice => unreachable!(),
    };
    if metric == Metric::FramesPerDevice {
        let mut per_device: BTreeMap<u32, u64> = BTreeMap::new();
        for f in deduplicate(records, opts.dedup_window_s) {
            if let Some(addr) = f.dev_addr() {
                *per_device.entry(addr).or_insert(0) += 1;
            }
        }
        return per_device.into_values().map(|n| n as f64).collect();
    }
    match opts.weighting {
        Weighting::PerReception => records.iter().map(value).collect(),
        Weighting::PerUniqueFrame => deduplicate(records, opts.dedup_window_s)
            .iter()
            .map(|f| value(&f.receptions[0]))
            .collect(),
    }
}

pub fn histogram(
    records: &[ReceptionRecord],
    metric: Metric,
    opts: &HistogramOptions,
) -> Result<Histogram, TraceError> {
    let values = samples(records, metric, opts);
    bin_values(metric, &values, opts)
}

/// Bins precomputed samples.
pub fn bin_values(
    metric: Metric,
    values: &[f64],
    opts: &HistogramOptions,
) -> Result<Histogram, TraceError> {
    let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
    let mut discrete: BTreeMap<OrderedF64, u64> = BTreeMap::new();
    let mut outside = 0u64;

    let bins_from_index = |counts: &BTreeMap<i64, u64>, bounds: &dyn Fn(i64) -> (f64, f64)| {
        counts
            .iter()
            .map(|(&k, &count)| {
                let (lower, upper) = bounds(k);
                Bin {
                    lower,
                    upper,
                    count,
                    fraction: 0.0,
                }
            })
            .collect::<Vec<_>>()
    };

    let mut bins = match &opts.binning {
        Binning::Uniform { width } => {
            if !(*width > 0.0 && width.is_finite()) {
                return Err(TraceError::Binning(format!(
                    "width must be positive, got {width}"
                )));
            }
            for &v in values {
                *counts.entry((v / width).floor() as i64).or_insert(0) += 1;
            }
            // fill gaps so the table is contiguous
            if let (Some(&lo), Some(&hi)) = (counts.keys().next(), counts.keys().next_back()) {
                for k in lo..=hi {
                    counts.entry(k).or_insert(0);
                }
            }
            bins_from_index(&counts, &|k| (k as f64 * width, (k + 1) as f64 * width))
        }
        Binning::Discrete => {
            for &v in values {
                *discrete.entry(OrderedF64(v)).or_insert(0) += 1;
            }
            discrete
                .iter()
                .map(|(v, &count)| Bin {
                    lower: v.0,
                    upper: v.0,
                    count,
                    fraction: 0.0,
                })
                .collect()
        }
        Binning::Log2 => {
            for &v in values {
                if v < 0.0 || !v.is_finite() {
                    outside += 1;
                } else if v < 1.0 {
                    *counts.entry(-1).or_insert(0) += 1;
                } else {
                    *counts.entry(v.log2().floor() as i64).or_insert(0) += 1;
                }
            }
            if let (Some(&lo), Some(&hi)) = (counts.keys().next(), counts.keys().next_back()) {
                for k in lo..=hi {
                    counts.entry(k).or_insert(0);
                }
            }
            bins_from_index(&counts, &|k| {
                if k < 0 {
                    (0.0, 1.0)
                } else {
                    (2f64.powi(k as i32), 2f64.powi(k as i32 + 1))
                }
            })
        }
        Binning::Edges(edges) => {
            if edges.len() < 2
                || edges
                    .windows(2)
                    .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
            {
                return Err(TraceError::Binning(
                    "edges need at least two strictly increasing values".into(),
                ));
            }
            let mut bins: Vec<Bin> = edges
                .windows(2)
                .map(|w| Bin {
                    lower: w[0],
                    upper: w[1],
                    count: 0,
                    fraction: 0.0,
                })
                .collect();
            for &v in values {
                let pos = edges.partition_point(|&e| e <= v);
                if pos == 0 || pos == edges.len() {
                    outside += 1;
                } else {
                    bins[pos - 1].count += 1;
                }
            }
            bins
        }
    };

    let total: u64 = bins.iter().map(|b| b.count).sum();
    if opts.normalization == Normalization::Pdf && total == 0 {
        return Err(TraceError::EmptyInput);
    }
    for b in &mut bins {
        b.fraction = if total == 0 {
            0.0
        } else {
            b.count as f64 / total as f64
        };
    }
    Ok(Histogram {
        metric,
        normalization: opts.normalization,
        bins,
        total,
        outside,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrderedF64(f64);

impl Eq for OrderedF64 {}

impl PartialOrd for OrderedF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderedF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum PayloadClass {
    LoRaMote,
    CommaSeparatedDecimals,
    Temperature,
    Humidity,
    GpsLocation,
    BatteryLevel,
    Brightness,
    Distance,
    KnownString(String),
    OtherReadable,
    Binary,
}

impl fmt::Display for PayloadClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PayloadClass::KnownString(s) => write!(f, "string:{s}"),
            other => write!(f, "{other:?}"),
        }
    }
}

/// LoRaMote demo application frame: LED, pressure, temperature, altitude,
/// battery, 24-bit latitude and longitude, GPS altitude.
const LORAMOTE_LEN: usize = 16;

const KNOWN_STRINGS: [&str; 4] = ["hello", "test", "foo", "coffee"];

fn printable_ratio(bytes: &[u8]) -> f64 {
    match std::str::from_utf8(bytes) {
        Ok(text) => {
            let chars: Vec<char> = text.chars().collect();
            let ok = chars
                .iter()
                .filter(|c| !c.is_control() || c.is_whitespace())
                .count();
            ok as f64 / chars.len() as f64
        }
        Err(_) => {
            let ok = bytes
                .iter()
                .filter(|b| b.is_ascii_graphic() || b.is_ascii_whitespace())
                .count();
            ok as f64 / bytes.len() as f64
        }
    }
}

/// Parses a `lat,lon` (or `;`/space separated) decimal pair within valid
/// ranges. Both numbers must carry a decimal point.
pub fn parse_gps_pair(text: &str) -> Option<GeoPoint> {
    let parts: Vec<&str> = text
        .trim()
        .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect();
    let [lat, lon] = parts.as_slice() else {
        return None;
    };
    if !lat.contains('.') || !lon.contains('.') {
        return None;
    }
    GeoPoint::new(lat.parse().ok()?, lon.parse().ok()?).ok()
}

fn known_string(lower: &str) -> Option<&'static str> {
    KNOWN_STRINGS.iter().copied().find(|k| {
        lower
            .strip_prefix(k)
            .is_some_and(|rest| rest.chars().next().is_none_or(|c| !c.is_alphabetic()))
    })
}

fn is_number_list(text: &str) -> bool {
    let tokens: Vec<&str> = text.split(',').map(str::trim).collect();
    tokens.len() >= 2
        && tokens
            .iter()
            .all(|t| !t.is_empty() && t.parse::<f64>().is_ok())
}

/// Classifies a decrypted application payload. Rules are tried in order and
/// the first match wins; see [`RULESET_VERSION`].
pub fn classify_payload(bytes: &[u8]) -> PayloadClass {
    if bytes.is_empty() {
        return PayloadClass::Binary;
    }
    let ratio = printable_ratio(bytes);
    if bytes.len() == LORAMOTE_LEN && bytes[0] <= 1 && ratio < 0.9 {
        return PayloadClass::LoRaMote;
    }
    if ratio < 0.9 {
        return PayloadClass::Binary;
    }
    let text = String::from_utf8_lossy(bytes);
    if parse_gps_pair(&text).is_some() {
        return PayloadClass::GpsLocation;
    }
    let lower = text.trim().to_lowercase();
    if lower.contains("temp") || lower.contains("°c") {
        return PayloadClass::Temperature;
    }
    if lower.contains("hum") {
        return PayloadClass::Humidity;
    }
    if lower.contains("bat") {
        return PayloadClass::BatteryLevel;
    }
    if lower.contains("lux") || lower.contains("light") {
        return PayloadClass::Brightness;
    }
    if lower.contains("dist") {
        return PayloadClass::Distance;
    }
    if let Some(k) = known_string(&lower) {
        return PayloadClass::KnownString(k.to_string());
    }
    if is_number_list(&lower) {
        return PayloadClass::CommaSeparatedDecimals;
    }
    PayloadClass::OtherReadable
}

/// Range and resolution of the distance-error histogram; bins are 1 m wide
/// and centred on whole meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceErrorOptions {
    pub min_m: i64,
    pub max_m: i64,
}

impl Default for DistanceErrorOptions {
    fn default() -> Self {
        Self {
            min_m: -100,
            max_m: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceErrorReport {
    /// Signed error per usable reception, estimated minus measured.
    pub errors_m: Vec<f64>,
    /// (bin centre in meters, count) for every bin in range.
    pub bins: Vec<(i64, u64)>,
    pub below_range: u64,
    pub above_range: u64,
    /// Frames whose payload is not a decodable GPS position.
    pub frames_without_position: u64,
    pub receptions_without_gateway_location: u64,
}

impl DistanceErrorReport {
    pub fn count_at(&self, meters: i64) -> u64 {
        self.bins
            .iter()
            .find(|(m, _)| *m == meters)
            .map_or(0, |(_, c)| *c)
    }

    pub fn to_csv(&self, metadata: &str) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["error_m", "count"])
            .expect("write to memory");
        for (m, c) in &self.bins {
            w.write_record([m.to_string(), c.to_string()])
                .expect("write to memory");
        }
        let body = String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8");
        format!("# {metadata}\n{body}")
    }
}

/// Node position from the frame's generic-key plaintext.
pub fn node_position(frame: &UniqueFrame) -> Option<GeoPoint> {
    let decoded = decode_generic(&frame.receptions[0].raw_payload).ok()?;
    parse_gps_pair(std::str::from_utf8(&decoded.plaintext).ok()?)
}

pub fn distance_error_report(
    frames: &[UniqueFrame],
    opts: &DistanceErrorOptions,
) -> DistanceErrorReport {
    let mut report = DistanceErrorReport {
        errors_m: Vec::new(),
        bins: (opts.min_m..=opts.max_m).map(|m| (m, 0)).collect(),
        below_range: 0,
        above_range: 0,
        frames_without_position: 0,
        receptions_without_gateway_location: 0,
    };
    for frame in frames {
        let Some(node) = node_position(frame) else {
            report.frames_without_position += 1;
            continue;
        };
        for rec in &frame.receptions {
            let Some(gw) = rec.gateway_location else {
                report.receptions_without_gateway_location += 1;
                continue;
            };
            let obs = SignalObservation {
                freq_mhz: rec.freq_hz as f64 / 1e6,
                level_db: rec.rssi_dbm,
            };
            let Ok(err) = distance_error(&node, &gw, &obs) else {
                continue;
            };
            report.errors_m.push(err);
            let centre = err.round() as i64;
            if centre < opts.min_m {
                report.below_range += 1;
            } else if centre > opts.max_m {
                report.above_range += 1;
            } else {
                report.bins[(centre - opts.min_m) as usize].1 += 1;
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub receptions: u64,
    pub unique_frames: u64,
    pub devices: u64,
    pub gateways: u64,
    /// Unique frames keyed by how many receptions they had.
    pub reception_counts: BTreeMap<usize, u64>,
    pub dedup_window_s: f64,
}

impl DatasetSummary {
    /// Share of unique frames received `k` times.
    pub fn reception_share(&self, k: usize) -> f64 {
        if self.unique_frames == 0 {
            return 0.0;
        }
        self.reception_counts.get(&k).copied().unwrap_or(0) as f64 / self.unique_frames as f64
    }

    pub fn to_csv(&self, metadata: &str) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["statistic", "value"])
            .expect("write to memory");
        let rows = [
            ("receptions", self.receptions),
            ("unique_frames", self.unique_frames),
            ("devices", self.devices),
            ("gateways", self.gateways),
        ];
        for (name, v) in rows {
            w.write_record([name.to_string(), v.to_string()])
                .expect("write to memory");
        }
        for (k, v) in &self.reception_counts {
            w.write_record([format!("frames_received_{k}x"), v.to_string()])
                .expect("write to memory");
        }
        let body = String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8");
        format!("# {metadata}\n{body}")
    }
}

pub fn summary(records: &[ReceptionRecord], dedup_window_s: f64) -> DatasetSummary {
    let frames = deduplicate(records, dedup_window_s);
    let devices: BTreeSet<u32> = frames.iter().filter_map(UniqueFrame::dev_addr).collect();
    let gateways: BTreeSet<&str> = records.iter().map(|r| r.gateway_id.as_str()).collect();
    DatasetSummary {
        receptions: records.len() as u64,
        unique_frames: frames.len() as u64,
        devices: devices.len() as u64,
        gateways: gateways.len() as u64,
        reception_counts: reception_count_distribution(&frames),
        dedup_window_s,
    }
}
