//! `lorawan-lab` command line: argument parsing, subcommand execution and
//! CSV/manifest output.
//!
//! Exit codes: 0 success, 1 runtime or I/O failure, 2 usage error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::codec::{decode_with, CodecError, SessionKeys, GENERIC_KEY};
use crate::pathloss::{estimate_distance, SignalObservation};
use crate::radio::{data_per_day, frame_airtime, frames_per_day, RadioConfig, RegionPlan};
use crate::sim::{sweep, SimConfig, SimReport, SweepGrid};
use crate::trace::{
    classify_payload, deduplicate, distance_error_report, histogram, ingest_path, summary, Binning,
    DistanceErrorOptions, HistogramOptions, Metric, Normalization, PayloadClass, Weighting,
    RULESET_VERSION,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "lorawan-lab",
    version,
    about = "LoRaWAN airtime, capacity, collision and trace toolkit"
)]
pub struct Cli {
    /// Write output here instead of stdout (a directory for `analyze`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Random seed for `simulate`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Time on air of one frame, or a CSV sweep over SF and payload.
    Airtime(AirtimeArgs),
    /// Frames and bytes per day per channel under the duty cycle.
    Limits(LimitsArgs),
    /// Monte-Carlo collision and confirmation simulation.
    Simulate(SimulateArgs),
    /// Distance from received signal level via free-space path loss.
    Distance(DistanceArgs),
    /// Statistics and histograms of a gateway reception trace.
    Analyze(AnalyzeArgs),
    /// Parse, verify and decrypt a LoRaWAN uplink.
    Decode(DecodeArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct AirtimeArgs {
    /// Spreading factor, list or range (e.g. `7`, `7..12`).
    #[arg(long, default_value = "7")]
    pub sf: String,
    #[arg(long, default_value_t = 125_000)]
    pub bw: u32,
    /// Coding rate index, 1 = 4/5.
    #[arg(long, default_value_t = 1)]
    pub cr: u8,
    #[arg(long, default_value_t = 8)]
    pub preamble: u16,
    /// PHY payload bytes, list or range.
    #[arg(long, default_value = "13")]
    pub payload: String,
    /// Payload range for a sweep; overrides `--payload`.
    #[arg(long)]
    pub sweep_payload: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct LimitsArgs {
    #[arg(long, default_value = "7..12")]
    pub sf: String,
    #[arg(long, default_value = "0..230")]
    pub payload: String,
    /// Duty cycle as a fraction.
    #[arg(long, default_value_t = 0.01)]
    pub duty: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Packets per window, list or range (e.g. `100..1000:100`).
    #[arg(long, default_value = "100")]
    pub n: String,
    #[arg(long, default_value_t = 60.0)]
    pub window: f64,
    /// Percentage of confirmed uplinks, list (e.g. `0,0.5,1`).
    #[arg(long, default_value = "0")]
    pub confirmed: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Application payload bytes per uplink.
    #[arg(long, default_value_t = 1)]
    pub payload: usize,
    /// Header bytes added to each uplink's PHY payload.
    #[arg(long, default_value_t = 0)]
    pub overhead: usize,
    #[arg(long, default_value_t = 1.0)]
    pub rx1_delay: f64,
    #[arg(long, default_value = "7..12")]
    pub sf: String,
    /// Gateway duty cycle as a fraction.
    #[arg(long, default_value_t = 0.01)]
    pub duty: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct DistanceArgs {
    /// Carrier frequency in MHz.
    #[arg(long, required_unless_present = "batch")]
    pub freq: Option<f64>,
    /// Received level in dB(m).
    #[arg(long, allow_hyphen_values = true, required_unless_present = "batch")]
    pub rssi: Option<f64>,
    /// CSV with `freq_mhz,rssi_dbm` columns.
    #[arg(long, conflicts_with_all = ["freq", "rssi"])]
    pub batch: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    /// Line-delimited JSON trace.
    #[arg(long)]
    pub input: PathBuf,
    /// Tables to produce: summary, rssi, snr, payload_size, sf, freq,
    /// frames_per_device, payload_class, distance_error. Default: all.
    #[arg(long = "metric", value_delimiter = ',')]
    pub metrics: Vec<String>,
    #[arg(long, default_value_t = crate::trace::DEFAULT_DEDUP_WINDOW_S)]
    pub dedup_window: f64,
    /// Normalise histograms to probabilities.
    #[arg(long)]
    pub pdf: bool,
    /// Signal metrics use one reception per unique frame.
    #[arg(long)]
    pub per_frame: bool,
    /// Bin width for rssi, snr and payload_size.
    #[arg(long)]
    pub bin_width: Option<f64>,
    /// Distance error range in meters, `min..max`.
    #[arg(long, default_value = "-100..100", allow_hyphen_values = true)]
    pub error_range: String,
}

#[derive(Debug, Args, Serialize)]
pub struct DecodeArgs {
    /// PHY payload as hex or base64.
    pub frame: String,
    /// 16-byte session key in hex, used as both NwkSKey and AppSKey.
    #[arg(long)]
    pub key: Option<String>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// One named output of a subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub content: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Output {
    pub tables: Vec<Table>,
    pub warnings: Vec<String>,
}

impl Output {
    fn single(name: &str, content: String) -> Self {
        Self {
            tables: vec![Table {
                name: name.into(),
                content,
            }],
            warnings: Vec::new(),
        }
    }
}

/// Written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub subcommand: &'static str,
    pub parameters: &'a Cli,
    pub seed: u64,
    pub tool_version: &'static str,
    pub outputs: Vec<String>,
}

/// Parses `7`, `7..12` (inclusive), `0..230:10` (with step) or `1,2,3`.
pub fn parse_int_list(list: &str) -> Result<Vec<i64>, String> {
    let mut out = Vec::new();
    for part in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (range, step) = match part.split_once(':') {
            Some((r, s)) => (
                r,
                s.parse::<i64>()
                    .map_err(|_| format!("bad step in {part:?}"))?,
            ),
            None => (part, 1),
        };
        if step <= 0 {
            return Err(format!("step must be positive in {part:?}"));
        }
        match range.split_once("..") {
            Some((lo, hi)) => {
                let lo: i64 = lo
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad range {part:?}"))?;
                let hi: i64 = hi
                    .trim()
                    .trim_start_matches('=')
                    .parse()
                    .map_err(|_| format!("bad range {part:?}"))?;
                if hi < lo {
                    return Err(format!("empty range {part:?}"));
                }
                out.extend((lo..=hi).step_by(step as usize));
            }
            None => out.push(range.parse().map_err(|_| format!("bad integer {part:?}"))?),
        }
    }
    if out.is_empty() {
        return Err(format!("empty list {list:?}"));
    }
    Ok(out)
}

fn parse_float_list(list: &str) -> Result<Vec<f64>, String> {
    let out: Vec<f64> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("bad number {s:?}")))
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err(format!("empty list {list:?}"));
    }
    Ok(out)
}

fn sf_list(list: &str) -> Result<Vec<u8>, CliError> {
    parse_int_list(list)
        .map_err(usage)?
        .into_iter()
        .map(|v| {
            u8::try_from(v)
                .ok()
                .filter(|sf| (7..=12).contains(sf))
                .ok_or_else(|| usage(format!("spreading factor {v} outside 7..=12")))
        })
        .collect()
}

fn usize_list(list: &str, what: &str) -> Result<Vec<usize>, CliError> {
    parse_int_list(list)
        .map_err(usage)?
        .into_iter()
        .map(|v| {
            usize::try_from(v).map_err(|_| usage(format!("{what} must be non-negative, got {v}")))
        })
        .collect()
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("write to memory");
    for row in rows {
        w.write_record(row).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8")
}

fn ms(seconds: f64) -> String {
    format!("{:.3}", seconds * 1000.0)
}

pub fn cmd_airtime(args: &AirtimeArgs, format: Format) -> Result<Output, CliError> {
    let sfs = sf_list(&args.sf)?;
    let payloads = usize_list(
        args.sweep_payload.as_deref().unwrap_or(&args.payload),
        "payload",
    )?;
    let mut configs = Vec::new();
    for &sf in &sfs {
        let cfg = RadioConfig::new(sf, args.bw, args.cr)
            .map_err(usage)?
            .with_preamble(args.preamble);
        configs.push(cfg);
    }
    if configs.len() == 1
        && payloads.len() == 1
        && format == Format::Text
        && args.sweep_payload.is_none()
    {
        let t = frame_airtime(&configs[0], payloads[0]);
        return Ok(Output::single("airtime", format!("{} ms\n", ms(t))));
    }
    let mut rows = Vec::new();
    for cfg in &configs {
        for &pl in &payloads {
            rows.push(vec![
                cfg.sf().to_string(),
                cfg.bw_hz().to_string(),
                cfg.cr().to_string(),
                cfg.n_preamble().to_string(),
                pl.to_string(),
                ms(frame_airtime(cfg, pl)),
            ]);
        }
    }
    Ok(Output::single(
        "airtime",
        csv_string(
            &[
                "sf",
                "bw_hz",
                "cr",
                "preamble",
                "payload_bytes",
                "airtime_ms",
            ],
            &rows,
        ),
    ))
}

pub fn cmd_limits(args: &LimitsArgs) -> Result<Output, CliError> {
    let sfs = sf_list(&args.sf)?;
    let payloads = usize_list(&args.payload, "payload")?;
    let plan = RegionPlan::eu868()
        .with_duty_cycle(args.duty)
        .map_err(usage)?;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for &sf in &sfs {
        let cfg = RadioConfig::eu868(sf).map_err(usage)?;
        let max = plan.max_payload(sf).map_err(usage)?;
        let mut omitted = 0;
        for &pl in &payloads {
            if pl > max {
                omitted += 1;
                continue;
            }
            let frames = frames_per_day(&cfg, pl, &plan).map_err(runtime)?;
            let bytes = data_per_day(&cfg, pl, &plan).map_err(runtime)?;
            rows.push(vec![
                sf.to_string(),
                pl.to_string(),
                ms(frame_airtime(&cfg, pl)),
                frames.to_string(),
                bytes.to_string(),
            ]);
        }
        if omitted > 0 {
            warnings.push(format!(
                "SF{sf}: {omitted} payload size(s) above the {max}-byte limit omitted"
            ));
        }
    }
    Ok(Output {
        tables: vec![Table {
            name: "limits".into(),
            content: csv_string(
                &[
                    "sf",
                    "payload_bytes",
                    "airtime_ms",
                    "frames_per_day",
                    "bytes_per_day",
                ],
                &rows,
            ),
        }],
        warnings,
    })
}

pub const SIM_CSV_HEADER: [&str; 22] = [
    "n",
    "confirmed_pct",
    "trials",
    "seed",
    "uplinks",
    "delivered",
    "collided",
    "lost_gateway_busy",
    "loss_rate",
    "collision_rate_sf7",
    "collision_rate_sf8",
    "collision_rate_sf9",
    "collision_rate_sf10",
    "collision_rate_sf11",
    "collision_rate_sf12",
    "acks_sent",
    "acks_dropped",
    "gateway_tx_time_s",
    "gateway_airtime_pct",
    "duty_violation",
    "windows_in_violation",
    "window_s",
];

fn sim_row(r: &SimReport) -> Vec<String> {
    let mut row = vec![
        r.packets_per_window.to_string(),
        format!("{}", r.confirmed_fraction * 100.0),
        r.trials.to_string(),
        r.seed.to_string(),
        r.total_uplinks.to_string(),
        r.delivered.to_string(),
        r.collided.to_string(),
        r.lost_gateway_busy.to_string(),
        format!("{:.6}", r.loss_rate()),
    ];
    for sf in 7..=12u8 {
        row.push(match r.per_sf.get(&sf) {
            Some(s) => format!("{:.6}", s.collision_rate()),
            None => String::new(),
        });
    }
    row.extend([
        r.acks_sent.to_string(),
        r.acks_dropped.to_string(),
        format!("{:.6}", r.gateway_tx_time_s),
        format!("{:.6}", r.gateway_airtime_fraction * 100.0),
        r.duty_violation.to_string(),
        r.windows_in_violation.to_string(),
        r.window_s.to_string(),
    ]);
    row
}

pub fn cmd_simulate(args: &SimulateArgs, seed: u64) -> Result<Output, CliError> {
    let grid = SweepGrid {
        packets_per_window: usize_list(&args.n, "n")?,
        confirmed_fractions: parse_float_list(&args.confirmed)
            .map_err(usage)?
            .into_iter()
            .map(|pct| pct / 100.0)
            .collect(),
    };
    let base = SimConfig {
        window_s: args.window,
        payload_bytes: args.payload,
        overhead_bytes: args.overhead,
        rx1_delay_s: args.rx1_delay,
        sfs: sf_list(&args.sf)?,
        duty_cycle: args.duty,
        seed,
        trials: args.trials,
        ..SimConfig::default()
    };
    if let Some(&n) = grid.packets_per_window.first() {
        SimConfig {
            packets_per_window: n,
            ..base.clone()
        }
        .validate()
        .map_err(usage)?;
    }
    let reports = sweep(&base, &grid).map_err(usage)?;
    let rows: Vec<Vec<String>> = reports.iter().map(sim_row).collect();
    Ok(Output::single(
        "simulate",
        csv_string(&SIM_CSV_HEADER, &rows),
    ))
}

#[derive(Debug, serde::Deserialize)]
struct BatchRow {
    freq_mhz: f64,
    rssi_dbm: f64,
}

pub fn cmd_distance(args: &DistanceArgs, format: Format) -> Result<Output, CliError> {
    if let Some(path) = &args.batch {
        let mut reader = csv::Reader::from_path(path).map_err(runtime)?;
        let mut rows = Vec::new();
        for (i, row) in reader.deserialize::<BatchRow>().enumerate() {
            let row = row.map_err(|e| runtime(format!("row {}: {e}", i + 1)))?;
            let obs = SignalObservation::new(row.freq_mhz, row.rssi_dbm)
                .map_err(|e| runtime(format!("row {}: {e}", i + 1)))?;
            let d = estimate_distance(&obs).map_err(runtime)?;
            rows.push(vec![
                row.freq_mhz.to_string(),
                row.rssi_dbm.to_string(),
                format!("{d:.3}"),
            ]);
        }
        return Ok(Output::single(
            "distance",
            csv_string(&["freq_mhz", "rssi_dbm", "distance_m"], &rows),
        ));
    }
    let (Some(freq), Some(rssi)) = (args.freq, args.rssi) else {
        return Err(usage("--freq and --rssi are required without --batch"));
    };
    let obs = SignalObservation::new(freq, rssi).map_err(usage)?;
    let d = estimate_distance(&obs).map_err(usage)?;
    let content = match format {
        Format::Text => format!("{d:.3} m\n"),
        Format::Csv => csv_string(
            &["freq_mhz", "rssi_dbm", "distance_m"],
            &[vec![freq.to_string(), rssi.to_string(), format!("{d:.3}")]],
        ),
    };
    Ok(Output::single("distance", content))
}

const ANALYZE_TABLES: [&str; 9] = [
    "summary",
    "rssi",
    "snr",
    "payload_size",
    "sf",
    "freq",
    "frames_per_device",
    "payload_class",
    "distance_error",
];

fn parse_error_range(list: &str) -> Result<DistanceErrorOptions, CliError> {
    let (lo, hi) = list
        .split_once("..")
        .ok_or_else(|| usage(format!("bad range {list:?}, expected min..max")))?;
    let min_m: i64 = lo
        .trim()
        .parse()
        .map_err(|_| usage(format!("bad range {list:?}")))?;
    let max_m: i64 = hi
        .trim()
        .parse()
        .map_err(|_| usage(format!("bad range {list:?}")))?;
    if max_m < min_m {
        return Err(usage(format!("empty range {list:?}")));
    }
    Ok(DistanceErrorOptions { min_m, max_m })
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<Output, CliError> {
    let mut wanted: Vec<String> = if args.metrics.is_empty() {
        ANALYZE_TABLES.iter().map(|s| s.to_string()).collect()
    } else {
        args.metrics
            .iter()
            .map(|m| m.trim().replace('-', "_"))
            .collect()
    };
    wanted.dedup();
    for w in &wanted {
        if !ANALYZE_TABLES.contains(&w.as_str()) {
            return Err(usage(format!("unknown metric {w:?}")));
        }
    }
    if !(args.dedup_window >= 0.0 && args.dedup_window.is_finite()) {
        return Err(usage("dedup window must be non-negative"));
    }
    let error_opts = parse_error_range(&args.error_range)?;

    let ingested = ingest_path(&args.input).map_err(runtime)?;
    let records = &ingested.records;
    let mut warnings = Vec::new();
    if ingested.skipped() > 0 {
        warnings.push(format!("{} malformed line(s) skipped", ingested.skipped()));
    }
    let base_meta = format!(
        "input={} records={} skipped={} dedup_window_s={} rules={} tool={}",
        args.input.display(),
        records.len(),
        ingested.skipped(),
        args.dedup_window,
        RULESET_VERSION,
        TOOL_VERSION
    );

    let mut tables = Vec::new();
    for name in &wanted {
        let content = match name.as_str() {
            "summary" => summary(records, args.dedup_window).to_csv(&base_meta),
            "payload_class" => {
                let mut counts: BTreeMap<String, u64> = BTreeMap::new();
                for frame in deduplicate(records, args.dedup_window) {
                    let class = crate::codec::decode_generic(&frame.receptions[0].raw_payload)
                        .ok()
                        .filter(|d| d.frame.fport.is_some_and(|p| p != 0))
                        .map(|d| classify_payload(&d.plaintext))
                        .unwrap_or(PayloadClass::Binary);
                    *counts.entry(class.to_string()).or_insert(0) += 1;
                }
                let rows: Vec<Vec<String>> = counts
                    .into_iter()
                    .map(|(k, v)| vec![k, v.to_string()])
                    .collect();
                format!("# {base_meta}\n{}", csv_string(&["class", "frames"], &rows))
            }
            "distance_error" => {
                let frames = deduplicate(records, args.dedup_window);
                let report = distance_error_report(&frames, &error_opts);
                let meta = format!(
                    "{base_meta} range_m={}..{} below={} above={} no_position={} no_gateway_location={}",
                    error_opts.min_m,
                    error_opts.max_m,
                    report.below_range,
                    report.above_range,
                    report.frames_without_position,
                    report.receptions_without_gateway_location
                );
                report.to_csv(&meta)
            }
            metric => {
                let metric: Metric = metric.parse().map_err(usage)?;
                let mut opts = HistogramOptions::for_metric(metric);
                opts.dedup_window_s = args.dedup_window;
                if args.pdf {
                    opts.normalization = Normalization::Pdf;
                }
                if args.per_frame {
                    opts.weighting = Weighting::PerUniqueFrame;
                }
                if let (Some(width), Binning::Uniform { .. }) = (args.bin_width, &opts.binning) {
                    opts.binning = Binning::Uniform { width };
                }
                let h = match histogram(records, metric, &opts) {
                    Ok(h) => h,
                    Err(crate::trace::TraceError::EmptyInput) => {
                        warnings.push(format!("{metric}: no samples, pdf skipped"));
                        continue;
                    }
                    Err(e) => return Err(usage(e)),
                };
                let edges: Vec<String> = h.edges().iter().map(|e| e.to_string()).collect();
                let meta = format!(
                    "{base_meta} metric={metric} binning={} normalization={:?} weighting={:?} outside={} bin_edges={}",
                    opts.binning,
                    opts.normalization,
                    opts.weighting,
                    h.outside,
                    edges.join(";")
                );
                h.to_csv(&meta)
            }
        };
        tables.push(Table {
            name: name.clone(),
            content,
        });
    }
    Ok(Output { tables, warnings })
}

fn parse_hex(s: &str) -> Option<Vec<u8>> {
    let s = s.trim();
    if !s.len().is_multiple_of(2) || !s.chars().all(|c| c.is_ascii_hexdigit()) {
        return None;
    }
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).ok())
        .collect()
}

fn parse_frame_bytes(s: &str) -> Result<Vec<u8>, CliError> {
    use base64::Engine;
    if let Some(bytes) = parse_hex(s) {
        return Ok(bytes);
    }
    base64::engine::general_purpose::STANDARD
        .decode(s.trim())
        .map_err(|_| usage("frame is neither hex nor base64"))
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn cmd_decode(args: &DecodeArgs, format: Format) -> Result<Output, CliError> {
    let raw = parse_frame_bytes(&args.frame)?;
    let key = match &args.key {
        Some(k) => {
            let bytes = parse_hex(k)
                .filter(|b| b.len() == 16)
                .ok_or_else(|| usage("key must be 32 hex characters"))?;
            let mut key = [0u8; 16];
            key.copy_from_slice(&bytes);
            key
        }
        None => GENERIC_KEY,
    };
    let decoded = decode_with(&raw, &SessionKeys::shared(key)).map_err(|e| match e {
        CodecError::Truncated(_) | CodecError::Malformed { .. } => {
            usage(format!("parse error: {e}"))
        }
        other => runtime(other),
    })?;
    let f = &decoded.frame;
    let text = String::from_utf8(decoded.plaintext.clone()).ok();
    let fields: Vec<(&str, String)> = vec![
        ("mtype", format!("{:?}", f.mhdr.mtype())),
        ("lorawan_r1", f.mhdr.is_lorawan_r1().to_string()),
        ("dev_addr", format!("{:08X}", f.dev_addr)),
        ("fctrl", format!("{:02X}", f.fctrl.0)),
        ("adr", f.fctrl.adr().to_string()),
        ("ack", f.fctrl.ack().to_string()),
        ("fcnt", f.fcnt.to_string()),
        ("fopts", hex_string(&f.fopts)),
        ("fport", f.fport.map(|p| p.to_string()).unwrap_or_default()),
        ("mic", hex_string(&f.mic)),
        ("mic_ok", decoded.mic_ok.to_string()),
        ("plaintext_hex", hex_string(&decoded.plaintext)),
        ("plaintext", text.clone().unwrap_or_default()),
        ("class", classify_payload(&decoded.plaintext).to_string()),
    ];
    let content = match format {
        Format::Text => fields.iter().fold(String::new(), |mut s, (k, v)| {
            let _ = writeln!(s, "{k}: {v}");
            s
        }),
        Format::Csv => {
            let header: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
            csv_string(&header, &[fields.iter().map(|(_, v)| v.clone()).collect()])
        }
    };
    Ok(Output::single("decode", content))
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Airtime(_) => "airtime",
            Command::Limits(_) => "limits",
            Command::Simulate(_) => "simulate",
            Command::Distance(_) => "distance",
            Command::Analyze(_) => "analyze",
            Command::Decode(_) => "decode",
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Airtime(a) => cmd_airtime(a, cli.format),
        Command::Limits(a) => cmd_limits(a),
        Command::Simulate(a) => cmd_simulate(a, cli.seed),
        Command::Distance(a) => cmd_distance(a, cli.format),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Decode(a) => cmd_decode(a, cli.format),
    }
}

fn manifest_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    path.with_file_name(name)
}

/// Writes outputs and their manifest under `out`. `analyze` treats `out` as
/// a directory holding one CSV per table.
fn write_outputs(cli: &Cli, out: &Path, output: &Output) -> Result<(), CliError> {
    let mut written = Vec::new();
    let manifest_at = if matches!(cli.command, Command::Analyze(_)) {
        std::fs::create_dir_all(out).map_err(runtime)?;
        for t in &output.tables {
            let path = out.join(format!("{}.csv", t.name));
            std::fs::write(&path, &t.content).map_err(runtime)?;
            written.push(path.display().to_string());
        }
        out.join("manifest.json")
    } else {
        if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(runtime)?;
        }
        let content: String = output.tables.iter().map(|t| t.content.as_str()).collect();
        std::fs::write(out, content).map_err(runtime)?;
        written.push(out.display().to_string());
        manifest_path(out)
    };
    let manifest = RunManifest {
        subcommand: cli.command.name(),
        parameters: cli,
        seed: cli.seed,
        tool_version: TOOL_VERSION,
        outputs: written,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(runtime)?;
    std::fs::write(manifest_at, json + "\n").map_err(runtime)
}

/// Runs a parsed command line, printing or writing its output.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let output = execute(cli)?;
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    match &cli.out {
        Some(out) => write_outputs(cli, out, &output),
        None => {
            let multi = output.tables.len() > 1;
            for t in &output.tables {
                if multi {
                    println!("## {}", t.name);
                }
                print!("{}", t.content);
                if multi {
                    println!();
                }
            }
            Ok(())
        }
    }
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
