//! Per-run artifacts: `timeseries.csv`, `sojourn.csv` and `summary.json`.
//!
//! Files are written to a temporary name and renamed into place.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::sim::config::SimConfig;
use crate::sim::engine::{EventCounts, MetricsRow, SimOutcome, Sojourn, SojournLog, TimeSeries};

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const SOJOURN_FILE: &str = "sojourn.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSummary {
    pub config: SimConfig,
    pub events: EventCounts,
    pub initial_peers: u64,
    pub final_peers: u64,
    pub max_peers: u64,
    pub mean_sojourn: Option<f64>,
    pub mean_sampling_peers: f64,
}

impl RunSummary {
    pub fn new(config: &SimConfig, outcome: &SimOutcome) -> Self {
        RunSummary {
            config: config.clone(),
            events: outcome.events,
            initial_peers: outcome.initial_state.peers(),
            final_peers: outcome.final_state.peers(),
            max_peers: outcome.max_peers,
            mean_sojourn: outcome.sojourns.mean(),
            mean_sampling_peers: outcome.mean_sampling_peers,
        }
    }
}

pub fn timeseries_header(k: usize) -> Vec<String> {
    let mut header = vec!["t".to_string(), "S".into(), "S0".into()];
    header.extend((1..=k).map(|i| format!("S{i}")));
    header.push("min_Si".into());
    header.push("L1".into());
    header
}

pub fn timeseries_csv(series: &TimeSeries) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(timeseries_header(series.k))?;
    for row in &series.rows {
        let mut record = vec![row.t.to_string(), row.peers.to_string(), row.empty.to_string()];
        record.extend(row.holders.iter().map(u64::to_string));
        record.push(row.min_holders.to_string());
        record.push(row.l1.to_string());
        w.write_record(&record)?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

pub fn sojourn_csv(log: &SojournLog) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["arrival_t", "departure_t", "sojourn"])?;
    for s in &log.entries {
        w.write_record([s.arrival.to_string(), s.departure.to_string(), s.duration().to_string()])?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

/// Parses a `timeseries.csv` back into rows; the header fixes `k`.
pub fn parse_timeseries(bytes: &[u8]) -> io::Result<TimeSeries> {
    let mut r = csv::Reader::from_reader(bytes);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let k = header
        .len()
        .checked_sub(5)
        .filter(|&k| header == timeseries_header(k))
        .ok_or_else(|| invalid(format!("unexpected header {header:?}")))?;
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let int = |i: usize| -> io::Result<u64> { record[i].parse().map_err(|e| invalid(format!("column {i}: {e}"))) };
        rows.push(MetricsRow {
            t: record[0].parse().map_err(|e| invalid(format!("t: {e}")))?,
            peers: int(1)?,
            empty: int(2)?,
            holders: (3..3 + k).map(int).collect::<io::Result<_>>()?,
            min_holders: int(3 + k)?,
            l1: int(4 + k)?,
        });
    }
    Ok(TimeSeries { k, rows })
}

pub fn parse_sojourns(bytes: &[u8]) -> io::Result<SojournLog> {
    let mut r = csv::Reader::from_reader(bytes);
    if r.headers()? != vec!["arrival_t", "departure_t", "sojourn"] {
        return Err(invalid("unexpected sojourn header".into()));
    }
    let mut entries = Vec::new();
    for record in r.records() {
        let record = record?;
        let f = |i: usize| -> io::Result<f64> { record[i].parse().map_err(|e| invalid(format!("column {i}: {e}"))) };
        entries.push(Sojourn {
            arrival: f(0)?,
            departure: f(1)?,
        });
    }
    Ok(SojournLog { entries })
}

/// Writes `bytes` to `path` via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| invalid(format!("{} has no file name", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// Writes the three run artifacts into `dir`, creating it if needed.
pub fn write_run(dir: &Path, config: &SimConfig, outcome: &SimOutcome) -> io::Result<RunSummary> {
    fs::create_dir_all(dir)?;
    let summary = RunSummary::new(config, outcome);
    write_atomic(&dir.join(TIMESERIES_FILE), &timeseries_csv(&outcome.series)?)?;
    write_atomic(&dir.join(SOJOURN_FILE), &sojourn_csv(&outcome.sojourns)?)?;
    let json = serde_json::to_vec_pretty(&summary).map_err(io::Error::from)?;
    write_atomic(&dir.join(SUMMARY_FILE), &json)?;
    Ok(summary)
}
