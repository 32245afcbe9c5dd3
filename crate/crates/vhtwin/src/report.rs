//! Run reports.
//!
//! Reports are written as pretty JSON (every field at full precision) or as
//! a long-format CSV `phase,metric,value,value_norm`, where `value_norm` is
//! filled only for mapping time and update rounds (value / 10000).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use vhtwin_core::pipeline::Evaluation;
use vhtwin_core::twinning::{Phase, PhaseOutcome, Scheme};

/// Divisor of the plot-ready columns.
pub const NORM_DIVISOR: f64 = 10_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format `{s}`, expected json or csv")),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Row label, e.g. `vh.v` or `baseline.h`.
    pub label: String,
    /// `v` (initial mapping) or `h` (updating).
    pub phase: String,
    /// `hierarchical` or `single_level`.
    pub scheme: String,
    pub mse: f64,
    pub mae: f64,
    pub nrmse: f64,
    /// Measured compute time plus modelled transfer time; vertical only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_mapping_s: Option<f64>,
    /// Messages exchanged with the global twin; horizontal only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub update_rounds: Option<u64>,
    pub wall_clock_s: f64,
    pub modeled_transfer_s: f64,
    pub uploads: u64,
    pub broadcasts: u64,
    pub global_updates: u64,
    pub intra_cluster_transfers: u64,
    pub global_version: u64,
    pub num_clusters: usize,
    pub seed: u64,
    pub config_echo: BTreeMap<String, String>,
}

impl EvalReport {
    pub fn new(
        label: impl Into<String>,
        outcome: &PhaseOutcome,
        eval: &Evaluation,
        seed: u64,
        config_echo: BTreeMap<String, String>,
    ) -> Self {
        let t = &outcome.trace;
        let (initial_mapping_s, update_rounds) = match t.phase {
            Phase::Vertical => (Some(t.mapping_time_s()), None),
            Phase::Horizontal => (None, Some(t.ledger.messages())),
        };
        Self {
            label: label.into(),
            phase: match t.phase {
                Phase::Vertical => "v",
                Phase::Horizontal => "h",
            }
            .into(),
            scheme: match t.scheme {
                Scheme::Hierarchical => "hierarchical",
                Scheme::SingleLevel => "single_level",
            }
            .into(),
            mse: eval.mse,
            mae: eval.mae,
            nrmse: eval.nrmse,
            initial_mapping_s,
            update_rounds,
            wall_clock_s: t.ledger.wall_clock_s,
            modeled_transfer_s: t.modeled_transfer_s,
            uploads: t.ledger.uploads,
            broadcasts: t.ledger.broadcasts,
            global_updates: t.ledger.global_updates,
            intra_cluster_transfers: t.ledger.intra_cluster_transfers,
            global_version: outcome.global.version,
            num_clusters: t.num_clusters,
            seed,
            config_echo,
        }
    }

    /// Drops the measured part of every timing field.
    pub fn zero_wall_clock(&mut self) {
        self.wall_clock_s = 0.0;
        if self.initial_mapping_s.is_some() {
            self.initial_mapping_s = Some(self.modeled_transfer_s);
        }
    }

    fn metric_rows(&self) -> Vec<(&'static str, String, Option<f64>)> {
        let mut rows = vec![
            ("mse", self.mse.to_string(), None),
            ("mae", self.mae.to_string(), None),
            ("nrmse", self.nrmse.to_string(), None),
        ];
        if let Some(t) = self.initial_mapping_s {
            rows.push(("mapping_time", t.to_string(), Some(t / NORM_DIVISOR)));
        }
        if let Some(r) = self.update_rounds {
            rows.push(("update_rounds", r.to_string(), Some(r as f64 / NORM_DIVISOR)));
        }
        rows.extend([
            ("uploads", self.uploads.to_string(), None),
            ("broadcasts", self.broadcasts.to_string(), None),
            ("global_updates", self.global_updates.to_string(), None),
            ("intra_cluster_transfers", self.intra_cluster_transfers.to_string(), None),
            ("num_clusters", self.num_clusters.to_string(), None),
        ]);
        rows
    }
}

/// Everything one command reports: per-phase rows plus scalar summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSet {
    pub command: String,
    pub reports: Vec<EvalReport>,
    pub summary: BTreeMap<String, f64>,
}

impl ReportSet {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            reports: Vec::new(),
            summary: BTreeMap::new(),
        }
    }

    pub fn zero_wall_clock(&mut self) {
        self.reports.iter_mut().for_each(EvalReport::zero_wall_clock);
    }

    pub fn find(&self, label: &str) -> Option<&EvalReport> {
        self.reports.iter().find(|r| r.label == label)
    }
}

pub fn emit_report(report: &EvalReport, format: Format) -> Vec<u8> {
    let set = ReportSet {
        command: String::new(),
        reports: vec![report.clone()],
        summary: BTreeMap::new(),
    };
    match format {
        Format::Json => serde_json::to_vec_pretty(report).expect("report serialises"),
        Format::Csv => emit(&set, Format::Csv),
    }
}

pub fn emit(set: &ReportSet, format: Format) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(set).expect("report serialises");
            out.push(b'\n');
            out
        }
        Format::Csv => {
            let mut out = String::from("phase,metric,value,value_norm\n");
            for r in &set.reports {
                for (metric, value, norm) in r.metric_rows() {
                    let norm = norm.map(|n| n.to_string()).unwrap_or_default();
                    let _ = writeln!(out, "{},{metric},{value},{norm}", r.label);
                }
            }
            for (k, v) in &set.summary {
                let _ = writeln!(out, "summary,{k},{v},");
            }
            out.into_bytes()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(phase: &str) -> EvalReport {
        EvalReport {
            label: format!("vh.{phase}"),
            phase: phase.into(),
            scheme: "hierarchical".into(),
            mse: 0.1 + 0.2,
            mae: 0.25,
            nrmse: 1.0 / 3.0,
            initial_mapping_s: (phase == "v").then_some(12.5),
            update_rounds: (phase == "h").then_some(21690),
            wall_clock_s: 2.5,
            modeled_transfer_s: 10.0,
            uploads: 3,
            broadcasts: 4,
            global_updates: 1,
            intra_cluster_transfers: 0,
            global_version: 1,
            num_clusters: 5,
            seed: 9,
            config_echo: [("seed".to_string(), "9".to_string())].into(),
        }
    }

    #[test]
    fn json_round_trips() {
        for phase in ["v", "h"] {
            let r = report(phase);
            let back: EvalReport = serde_json::from_slice(&emit_report(&r, Format::Json)).unwrap();
            assert_eq!(back, r);
        }
    }

    #[test]
    fn phase_fields() {
        let v = String::from_utf8(emit_report(&report("v"), Format::Json)).unwrap();
        assert!(v.contains("initial_mapping_s") && !v.contains("update_rounds"));
        let h = String::from_utf8(emit_report(&report("h"), Format::Json)).unwrap();
        assert!(!h.contains("initial_mapping_s") && h.contains("update_rounds"));
    }

    #[test]
    fn csv_normalises_rounds_and_time() {
        let csv = String::from_utf8(emit_report(&report("h"), Format::Csv)).unwrap();
        assert!(csv.starts_with("phase,metric,value,value_norm\n"));
        assert!(csv.contains("vh.h,update_rounds,21690,2.169\n"));
        assert!(csv.contains("vh.h,mse,0.30000000000000004,\n"));
        let csv = String::from_utf8(emit_report(&report("v"), Format::Csv)).unwrap();
        assert!(csv.contains("vh.v,mapping_time,12.5,0.00125\n"));
    }

    #[test]
    fn zeroing_keeps_modelled_time() {
        let mut r = report("v");
        r.zero_wall_clock();
        assert_eq!((r.wall_clock_s, r.initial_mapping_s), (0.0, Some(10.0)));
    }
}
