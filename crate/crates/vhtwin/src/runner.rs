//! End-to-end commands: build the scenario, run the phases, score the
//! twins and assemble reports.

use std::collections::BTreeMap;
use std::path::Path;

use vhtwin_core::dcs::dcs;
use vhtwin_core::exec::{Clock, Executor};
use vhtwin_core::forecast::{init_model, TwinModel};
use vhtwin_core::pipeline::{evaluate, prepare, Prepared};
use vhtwin_core::series::{generate_synthetic, TrafficSeries};
use vhtwin_core::topology::{generate_regular_topology, generate_stations, Network};
use vhtwin_core::twinning::{
    run_h_single_level, run_h_twinning, run_single_level, run_v_twinning, GlobalTwin, PhaseOutcome,
};

use crate::config::{DataSource, ExperimentConfig};
use crate::dataio;
use crate::error::{Error, Result};
use crate::exec::{Pool, WallClock};
use crate::report::{EvalReport, ReportSet};
use crate::twinfile;

/// Stations, topology and prepared traffic of one experiment.
pub struct Scenario {
    pub network: Network,
    pub series: Vec<TrafficSeries>,
    pub prepared: Prepared,
}

/// Generates or loads everything a run needs.
pub fn build_scenario(cfg: &ExperimentConfig) -> Result<Scenario> {
    cfg.validate()?;
    let series = load_series(cfg)?;
    let stations = match &cfg.roster {
        Some(path) => {
            let s = dataio::load_roster(Path::new(path))?;
            if s.len() != cfg.n_bs {
                return Err(Error::Data(format!(
                    "{path}: roster has {} stations, network.n_bs is {}",
                    s.len(),
                    cfg.n_bs
                )));
            }
            s
        }
        None => generate_stations(cfg.n_bs, cfg.groups, cfg.seed),
    };
    let topology = generate_regular_topology(cfg.n_bs, cfg.degree, cfg.seed)?;
    let network = Network::new(stations, topology)?;
    let prepared = prepare(&series, &cfg.prep_spec())?;
    Ok(Scenario {
        network,
        series,
        prepared,
    })
}

/// Synthetic series, or the first `n_bs` cells of the CSV (by cell id)
/// cut to their common length.
fn load_series(cfg: &ExperimentConfig) -> Result<Vec<TrafficSeries>> {
    match cfg.source {
        DataSource::Synthetic => Ok(generate_synthetic(&cfg.synth_spec())?.into_values().collect()),
        DataSource::Csv => {
            let path = cfg.path.as_deref().unwrap_or_default();
            let cells = dataio::load_grid_csv(Path::new(path), &cfg.column)?;
            if cells.len() < cfg.n_bs {
                return Err(Error::Data(format!(
                    "{path}: {} cells available, network.n_bs is {}",
                    cells.len(),
                    cfg.n_bs
                )));
            }
            let mut series: Vec<TrafficSeries> = cells.into_values().take(cfg.n_bs).collect();
            let len = series.iter().map(TrafficSeries::len).min().unwrap_or(0);
            for (i, s) in series.iter_mut().enumerate() {
                s.values.truncate(len);
                s.breaks.retain(|&b| b < len);
                s.bs_id = i;
            }
            Ok(series)
        }
    }
}

/// A file produced by a command besides its report.
pub struct Artifact {
    pub name: &'static str,
    pub bytes: Vec<u8>,
}

pub struct Output {
    pub report: Option<ReportSet>,
    pub artifacts: Vec<Artifact>,
}

pub struct Runner<E, C> {
    pub exec: E,
    pub clock: C,
}

impl Runner<Pool, WallClock> {
    /// Wall clock, and a thread pool sized by `VHTWIN_THREADS`.
    pub fn from_env() -> Result<Self> {
        Ok(Self {
            exec: Pool::from_env()?,
            clock: WallClock::new(),
        })
    }
}

impl<E: Executor, C: Clock> Runner<E, C> {
    pub fn new(exec: E, clock: C) -> Self {
        Self { exec, clock }
    }

    fn init_twin(cfg: &ExperimentConfig) -> Result<TwinModel> {
        Ok(init_model(cfg.arch(), cfg.window.input_dim(), cfg.seed)?)
    }

    fn report(&self, label: &str, out: &PhaseOutcome, scen: &Scenario, cfg: &ExperimentConfig) -> Result<EvalReport> {
        let eval = evaluate(&out.global.model, &scen.prepared.test)?;
        Ok(EvalReport::new(label, out, &eval, cfg.seed, cfg.echo()))
    }

    fn vertical(&self, cfg: &ExperimentConfig, scen: &Scenario) -> Result<PhaseOutcome> {
        let init = Self::init_twin(cfg)?;
        let inputs = scen.prepared.station_inputs(&scen.network);
        Ok(run_v_twinning(&inputs, &init, &cfg.vconfig(), &self.exec, &self.clock)?)
    }

    fn horizontal(
        &self,
        cfg: &ExperimentConfig,
        scen: &Scenario,
        start: &GlobalTwin,
        v: Option<&PhaseOutcome>,
    ) -> Result<PhaseOutcome> {
        let inputs = scen.prepared.stream_inputs(&scen.network);
        let assignment = v.map(|v| &v.assignment);
        Ok(run_h_twinning(&inputs, start, assignment, &cfg.hconfig(), &self.exec, &self.clock)?)
    }

    /// Both hierarchical phases; rows `{prefix}.v` and `{prefix}.h`.
    fn vh(&self, cfg: &ExperimentConfig, scen: &Scenario, prefix: &str, set: &mut ReportSet) -> Result<()> {
        let v = self.vertical(cfg, scen)?;
        let h = self.horizontal(cfg, scen, &v.global, Some(&v))?;
        set.reports.push(self.report(&format!("{prefix}.v"), &v, scen, cfg)?);
        set.reports.push(self.report(&format!("{prefix}.h"), &h, scen, cfg)?);
        Ok(())
    }

    /// Both single-level phases; rows `baseline.v` and `baseline.h`.
    fn baseline(&self, cfg: &ExperimentConfig, scen: &Scenario, set: &mut ReportSet) -> Result<()> {
        let init = Self::init_twin(cfg)?;
        let v = run_single_level(
            &scen.prepared.station_inputs(&scen.network),
            &init,
            &cfg.vconfig(),
            &self.exec,
            &self.clock,
        )?;
        let h = run_h_single_level(
            &scen.prepared.stream_inputs(&scen.network),
            &v.global,
            &cfg.hconfig(),
            &self.exec,
            &self.clock,
        )?;
        set.reports.push(self.report("baseline.v", &v, scen, cfg)?);
        set.reports.push(self.report("baseline.h", &h, scen, cfg)?);
        Ok(())
    }

    /// Clusters the historical traffic; emits `bs_id,cluster_id`.
    pub fn cmd_cluster(&self, cfg: &ExperimentConfig) -> Result<Output> {
        let scen = build_scenario(cfg)?;
        let series: Vec<&[f64]> = scen.prepared.history_raw.iter().map(Vec::as_slice).collect();
        let out = dcs(&scen.network, &series, &cfg.dcs_config(cfg.clusters))?;
        let mut csv = String::from("bs_id,cluster_id\n");
        for (bs, c) in out.assignment.labels().iter().enumerate() {
            csv.push_str(&format!("{bs},{c}\n"));
        }
        let mut set = ReportSet::new("cluster");
        set.summary.insert("num_clusters".into(), out.assignment.num_clusters() as f64);
        if let Some(q) = out.modularity {
            set.summary.insert("modularity".into(), q);
        }
        Ok(Output {
            report: Some(set),
            artifacts: vec![Artifact {
                name: "assignment.csv",
                bytes: csv.into_bytes(),
            }],
        })
    }

    /// Hierarchical initial mapping; also returns the global twin file.
    pub fn cmd_vtwin(&self, cfg: &ExperimentConfig) -> Result<Output> {
        let scen = build_scenario(cfg)?;
        let v = self.vertical(cfg, &scen)?;
        let mut set = ReportSet::new("vtwin");
        set.reports.push(self.report("vh.v", &v, &scen, cfg)?);
        Ok(Output {
            report: Some(set),
            artifacts: vec![Artifact {
                name: "twin.txt",
                bytes: twinfile::to_text(&v.global.model).into_bytes(),
            }],
        })
    }

    /// Threshold-gated updating starting from a saved twin. With
    /// `sweep.psi` set, one row per threshold.
    pub fn cmd_htwin(&self, cfg: &ExperimentConfig, twin: &TwinModel) -> Result<Output> {
        cfg.validate()?;
        let expected = Self::init_twin(cfg)?;
        if !twin.compatible_with(&expected) {
            return Err(Error::config(
                "model",
                format!(
                    "twin file has {:?} over {} inputs, config expects {:?} over {}",
                    twin.arch, twin.input_dim, expected.arch, expected.input_dim
                ),
            ));
        }
        let scen = build_scenario(cfg)?;
        let start = GlobalTwin::new(twin.clone());
        let mut set = ReportSet::new("htwin");
        if cfg.sweep_psi.is_empty() {
            let h = self.horizontal(cfg, &scen, &start, None)?;
            set.reports.push(self.report("vh.h", &h, &scen, cfg)?);
        } else {
            for &psi in &cfg.sweep_psi {
                let mut c = cfg.clone();
                c.psi = psi;
                let h = self.horizontal(&c, &scen, &start, None)?;
                set.reports.push(self.report(&format!("psi{psi}.h"), &h, &scen, &c)?);
            }
        }
        Ok(Output {
            report: Some(set),
            artifacts: Vec::new(),
        })
    }

    /// Single-level FedAvg in both phases.
    pub fn cmd_baseline(&self, cfg: &ExperimentConfig) -> Result<Output> {
        let scen = build_scenario(cfg)?;
        let mut set = ReportSet::new("baseline");
        self.baseline(cfg, &scen, &mut set)?;
        Ok(Output {
            report: Some(set),
            artifacts: Vec::new(),
        })
    }

    /// Hierarchical pipeline and baseline on the same data, plus the
    /// cluster-count and participation sweeps when configured.
    pub fn cmd_e2e(&self, cfg: &ExperimentConfig) -> Result<Output> {
        let scen = build_scenario(cfg)?;
        let mut set = ReportSet::new("e2e");
        self.vh(cfg, &scen, "vh", &mut set)?;
        self.baseline(cfg, &scen, &mut set)?;
        let rounds = |label: &str| set.find(label).and_then(|r| r.update_rounds).unwrap_or(0) as f64;
        let (vh_msgs, base_msgs) = (rounds("vh.h"), rounds("baseline.h"));
        let mut summary = BTreeMap::new();
        summary.insert("h_messages_vh".to_string(), vh_msgs);
        summary.insert("h_messages_baseline".to_string(), base_msgs);
        if base_msgs > 0.0 {
            summary.insert("h_message_reduction".to_string(), 1.0 - vh_msgs / base_msgs);
        }
        for phase in ["v", "h"] {
            let a = set.find(&format!("vh.{phase}")).map(|r| r.mse);
            let b = set.find(&format!("baseline.{phase}")).map(|r| r.mse);
            if let (Some(a), Some(b)) = (a, b) {
                if b > 0.0 {
                    summary.insert(format!("{phase}_mse_relative_difference"), (a - b).abs() / b);
                }
            }
        }
        set.summary = summary;
        for &c in &cfg.sweep_clusters {
            let mut sub = cfg.clone();
            sub.clusters = c;
            self.vh(&sub, &scen, &format!("c{c}"), &mut set)?;
        }
        for &f in &cfg.sweep_participation {
            let mut sub = cfg.clone();
            sub.participation = f;
            self.vh(&sub, &scen, &format!("p{f}"), &mut set)?;
        }
        Ok(Output {
            report: Some(set),
            artifacts: Vec::new(),
        })
    }

    /// Synthetic traffic in the grid CSV format plus the station roster.
    pub fn cmd_synth(&self, cfg: &ExperimentConfig) -> Result<Output> {
        cfg.validate()?;
        let series = generate_synthetic(&cfg.synth_spec())?;
        let mut grid = Vec::new();
        dataio::write_grid_csv(&mut grid, &series, &cfg.column)?;
        let mut roster = Vec::new();
        dataio::write_roster(&mut roster, &generate_stations(cfg.n_bs, cfg.groups, cfg.seed))?;
        Ok(Output {
            report: None,
            artifacts: vec![
                Artifact {
                    name: "synth.csv",
                    bytes: grid,
                },
                Artifact {
                    name: "roster.csv",
                    bytes: roster,
                },
            ],
        })
    }
}
