//! Traffic and roster CSV files.
//!
//! The grid format follows the per-cell telecom activity exports:
//! `cell_id,timestamp_ms,sms_in,sms_out,call_in,call_out,internet`. The raw
//! exports split each (cell, timestamp) over several rows (one per country
//! code); those rows are summed. Extra columns are ignored and an empty
//! activity field counts as zero.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use vhtwin_core::series::TrafficSeries;
use vhtwin_core::topology::{validate_roster, BaseStation, Point};

use crate::error::{Error, Result};

pub const GRID_HEADER: [&str; 7] = [
    "cell_id",
    "timestamp_ms",
    "sms_in",
    "sms_out",
    "call_in",
    "call_out",
    "internet",
];

/// Activity columns that can be selected as the traffic series.
pub const VALUE_COLUMNS: [&str; 5] = ["sms_in", "sms_out", "call_in", "call_out", "internet"];

pub fn load_grid_csv(path: &Path, column: &str) -> Result<BTreeMap<u64, TrafficSeries>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_grid_csv(file, &path.display().to_string(), column)
}

/// Parses a grid export into one series per cell, keyed by cell id.
///
/// Samples are ordered by timestamp. The sample interval is the most
/// common gap between consecutive timestamps of a cell (smallest on ties);
/// any other gap is recorded as a break in the series.
pub fn read_grid_csv<R: Read>(reader: R, source: &str, column: &str) -> Result<BTreeMap<u64, TrafficSeries>> {
    if !VALUE_COLUMNS.contains(&column) {
        return Err(Error::config(
            "data.column",
            format!("unknown column `{column}`, expected one of {VALUE_COLUMNS:?}"),
        ));
    }
    let parse_err = |line: u64, msg: String| Error::Parse {
        path: source.to_string(),
        line,
        msg,
    };
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| parse_err(1, format!("missing column `{name}`")))
    };
    let (cell_col, ts_col, value_col) = (find("cell_id")?, find("timestamp_ms")?, find(column)?);

    let mut cells: BTreeMap<u64, BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| {
            record
                .get(i)
                .map(str::trim)
                .ok_or_else(|| parse_err(line, format!("missing field `{name}`")))
        };
        let cell: u64 = field(cell_col, "cell_id")?
            .parse()
            .map_err(|_| parse_err(line, "cell_id is not a non-negative integer".into()))?;
        let ts: u64 = field(ts_col, "timestamp_ms")?
            .parse()
            .map_err(|_| parse_err(line, "timestamp_ms is not a non-negative integer".into()))?;
        let raw = field(value_col, column)?;
        let value: f64 = if raw.is_empty() {
            0.0
        } else {
            raw.parse()
                .map_err(|_| parse_err(line, format!("{column} is not a number")))?
        };
        if !(value.is_finite() && value >= 0.0) {
            return Err(parse_err(line, format!("{column} must be finite and non-negative")));
        }
        cells.entry(cell).or_default().entry(ts).or_default().push(value);
    }
    if cells.is_empty() {
        return Err(Error::Data(format!("{source}: no data rows")));
    }

    let interval_ms = modal_gap(cells.values().map(|c| c.keys().copied().collect()))
        .ok_or_else(|| Error::Data(format!("{source}: cannot infer the sample interval from a single timestamp")))?;
    let mut out = BTreeMap::new();
    for (cell, samples) in cells {
        let mut values = Vec::with_capacity(samples.len());
        let mut breaks = Vec::new();
        let mut prev: Option<u64> = None;
        for (i, (ts, mut parts)) in samples.into_iter().enumerate() {
            // order-independent sum
            parts.sort_by(f64::total_cmp);
            values.push(parts.iter().sum());
            if prev.is_some_and(|p| ts - p != interval_ms) {
                breaks.push(i);
            }
            prev = Some(ts);
        }
        let mut series = TrafficSeries::new(cell as usize, interval_ms as f64 / 1000.0, values);
        series.breaks = breaks;
        out.insert(cell, series);
    }
    Ok(out)
}

fn modal_gap(cells: impl Iterator<Item = Vec<u64>>) -> Option<u64> {
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for ts in cells {
        for w in ts.windows(2) {
            *counts.entry(w[1] - w[0]).or_default() += 1;
        }
    }
    // BTreeMap iterates gaps ascending, so max_by_key keeps the last maximum;
    // reverse to prefer the smallest gap on ties.
    counts
        .into_iter()
        .rev()
        .max_by_key(|&(_, n)| n)
        .map(|(gap, _)| gap)
}

/// Writes series in the grid format, putting the values in `column` and
/// zeros elsewhere. Timestamps start at 0 and advance by the interval.
pub fn write_grid_csv<W: Write>(writer: W, series: &BTreeMap<usize, TrafficSeries>, column: &str) -> Result<()> {
    let col = VALUE_COLUMNS
        .iter()
        .position(|c| *c == column)
        .ok_or_else(|| Error::config("data.column", format!("unknown column `{column}`")))?;
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| Error::Data(e.to_string());
    w.write_record(GRID_HEADER).map_err(csv_err)?;
    for (id, s) in series {
        let step_ms = (s.interval_s * 1000.0).round() as u64;
        for (i, v) in s.values.iter().enumerate() {
            let mut row = vec![id.to_string(), (i as u64 * step_ms).to_string()];
            row.extend((0..VALUE_COLUMNS.len()).map(|c| if c == col { v.to_string() } else { "0".into() }));
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::Data(e.to_string()))
}

#[derive(Debug, Serialize, Deserialize)]
struct RosterRow {
    id: usize,
    x_m: f64,
    y_m: f64,
    coverage_m: f64,
    backhaul_mbps: f64,
}

pub fn load_roster(path: &Path) -> Result<Vec<BaseStation>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_roster(file, &path.display().to_string())
}

/// Reads a station roster (`id,x_m,y_m,coverage_m,backhaul_mbps`), sorted
/// by id. Ids must be exactly `0..n`.
pub fn read_roster<R: Read>(reader: R, source: &str) -> Result<Vec<BaseStation>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut stations = Vec::new();
    for row in rdr.deserialize::<RosterRow>() {
        let row = row.map_err(|e| Error::Parse {
            path: source.to_string(),
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        stations.push(BaseStation {
            id: row.id,
            position: Point::new(row.x_m, row.y_m),
            coverage_radius: row.coverage_m,
            backhaul_capacity: row.backhaul_mbps,
            series_ref: row.id as u64,
        });
    }
    stations.sort_by_key(|s| s.id);
    validate_roster(&stations).map_err(|e| Error::Data(format!("{source}: {e}")))?;
    Ok(stations)
}

pub fn write_roster<W: Write>(writer: W, stations: &[BaseStation]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for s in stations {
        w.serialize(RosterRow {
            id: s.id,
            x_m: s.position.x,
            y_m: s.position.y,
            coverage_m: s.coverage_radius,
            backhaul_mbps: s.backhaul_capacity,
        })
        .map_err(|e| Error::Data(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Data(e.to_string()))
}
