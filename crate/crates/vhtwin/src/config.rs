//! Experiment configuration.
//!
//! A config file is a list of `section.key = value` lines; `#` starts a
//! comment. Every key has a default, unknown or repeated keys are rejected,
//! and [`ExperimentConfig::validate`] checks everything before any run
//! starts. [`ExperimentConfig::echo`] lists every resolved key and parses
//! back to an equal config.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use vhtwin_core::dcs::{ClusterMode, DcsConfig, Strategy};
use vhtwin_core::forecast::{Arch, WindowSpec};
use vhtwin_core::pipeline::PrepSpec;
use vhtwin_core::series::SynthSpec;
use vhtwin_core::topology::{AttributeWeights, PhiConfig};
use vhtwin_core::twinning::{HConfig, UpdateMode, VConfig};

use crate::dataio::VALUE_COLUMNS;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataSource {
    Synthetic,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,

    pub n_bs: usize,
    pub degree: usize,
    /// Spatial groups of generated stations; also the traffic groups of
    /// synthetic data.
    pub groups: usize,
    pub roster: Option<String>,
    pub weights: AttributeWeights,
    pub g_floor: f64,
    pub normalize_terms: bool,
    pub bins: usize,

    pub adaptive: bool,
    pub clusters: usize,
    pub strategy: Strategy,

    pub window: WindowSpec,

    pub mlp: bool,
    pub hidden: usize,

    pub learning_rate: f64,
    pub batch_size: usize,
    pub local_epochs: usize,

    pub v_epochs: usize,
    pub v_dcs_period: usize,

    pub h_epochs: usize,
    pub h_dcs_period: usize,
    pub batch_threshold: usize,
    pub period_min: usize,
    pub period_max: usize,
    pub sync_period: usize,

    pub psi: f64,
    pub incremental: bool,
    pub eta: Option<f64>,
    pub participation: f64,
    pub transfer_time_s: f64,

    pub source: DataSource,
    pub path: Option<String>,
    pub column: String,
    pub length: usize,
    pub period: usize,
    pub noise_std: f64,
    pub hetero: f64,
    pub interval_s: f64,
    pub train_fraction: f64,
    pub stream_fraction: f64,

    pub sweep_clusters: Vec<usize>,
    pub sweep_participation: Vec<f64>,
    pub sweep_psi: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_bs: 50,
            degree: 20,
            groups: 5,
            roster: None,
            weights: AttributeWeights::equal(),
            g_floor: 1.0,
            normalize_terms: true,
            bins: 16,
            adaptive: false,
            clusters: 5,
            strategy: Strategy::MinWeight,
            window: WindowSpec::default(),
            mlp: false,
            hidden: 8,
            learning_rate: 0.01,
            batch_size: 64,
            local_epochs: 1,
            v_epochs: 100,
            v_dcs_period: 10,
            h_epochs: 20,
            h_dcs_period: 5,
            batch_threshold: 4,
            period_min: 2,
            period_max: 6,
            sync_period: 4,
            psi: 0.01,
            incremental: false,
            eta: None,
            participation: 1.0,
            transfer_time_s: 0.01,
            source: DataSource::Synthetic,
            path: None,
            column: "internet".into(),
            length: 720,
            period: 24,
            noise_std: 0.05,
            hetero: 0.5,
            interval_s: 3600.0,
            train_fraction: 0.6,
            stream_fraction: 0.5,
            sweep_clusters: Vec::new(),
            sweep_participation: Vec::new(),
            sweep_psi: Vec::new(),
        }
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{v}`")))
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::config(key, format!("expected true or false, got `{v}`"))),
    }
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

fn join<T: Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn opt_path(v: &str) -> Option<String> {
    (!v.is_empty()).then(|| v.to_string())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses config text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}", i + 1), "expected `key = value`")
            })?;
            let key = key.trim();
            if let Some(prev) = seen.insert(key.to_string(), i + 1) {
                return Err(Error::config(key, format!("repeated (first set on line {prev})")));
            }
            cfg.set(key, value.trim())?;
        }
        Ok(cfg)
    }

    /// Applies one `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::config(pair, "expected `key=value`"))?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "seed" => self.seed = num(key, v)?,
            "network.n_bs" => self.n_bs = num(key, v)?,
            "network.degree" => self.degree = num(key, v)?,
            "network.groups" => self.groups = num(key, v)?,
            "network.roster" => self.roster = opt_path(v),
            "network.w_g" => self.weights.g = num(key, v)?,
            "network.w_k" => self.weights.k = num(key, v)?,
            "network.w_beta" => self.weights.beta = num(key, v)?,
            "network.w_tau" => self.weights.tau = num(key, v)?,
            "network.g_floor" => self.g_floor = num(key, v)?,
            "network.normalize_terms" => self.normalize_terms = flag(key, v)?,
            "network.bins" => self.bins = num(key, v)?,
            "dcs.mode" => {
                self.adaptive = match v {
                    "fixed" => false,
                    "adaptive" => true,
                    _ => return Err(Error::config(key, "expected fixed or adaptive")),
                }
            }
            "dcs.clusters" => self.clusters = num(key, v)?,
            "dcs.strategy" => {
                self.strategy = match v {
                    "min_weight" => Strategy::MinWeight,
                    "max_betweenness" => Strategy::MaxBetweenness,
                    _ => return Err(Error::config(key, "expected min_weight or max_betweenness")),
                }
            }
            "window.immediate" => self.window.immediate = num(key, v)?,
            "window.cyclical" => self.window.cyclical = num(key, v)?,
            "window.period" => self.window.period = num(key, v)?,
            "model.arch" => {
                self.mlp = match v {
                    "linear" => false,
                    "mlp" => true,
                    _ => return Err(Error::config(key, "expected linear or mlp")),
                }
            }
            "model.hidden" => self.hidden = num(key, v)?,
            "train.learning_rate" => self.learning_rate = num(key, v)?,
            "train.batch_size" => self.batch_size = num(key, v)?,
            "train.local_epochs" => self.local_epochs = num(key, v)?,
            "vtwin.epochs" => self.v_epochs = num(key, v)?,
            "vtwin.dcs_period" => self.v_dcs_period = num(key, v)?,
            "htwin.epochs" => self.h_epochs = num(key, v)?,
            "htwin.dcs_period" => self.h_dcs_period = num(key, v)?,
            "htwin.batch_threshold" => self.batch_threshold = num(key, v)?,
            "htwin.period_min" => self.period_min = num(key, v)?,
            "htwin.period_max" => self.period_max = num(key, v)?,
            "htwin.sync_period" => self.sync_period = num(key, v)?,
            "twinning.psi" => self.psi = num(key, v)?,
            "twinning.update_mode" => {
                self.incremental = match v {
                    "average" => false,
                    "incremental" => true,
                    _ => return Err(Error::config(key, "expected average or incremental")),
                }
            }
            "twinning.eta" => {
                self.eta = match v {
                    "auto" => None,
                    _ => Some(num(key, v)?),
                }
            }
            "twinning.participation" => self.participation = num(key, v)?,
            "twinning.transfer_time_s" => self.transfer_time_s = num(key, v)?,
            "data.source" => {
                self.source = match v {
                    "synthetic" => DataSource::Synthetic,
                    "csv" => DataSource::Csv,
                    _ => return Err(Error::config(key, "expected synthetic or csv")),
                }
            }
            "data.path" => self.path = opt_path(v),
            "data.column" => self.column = v.to_string(),
            "data.length" => self.length = num(key, v)?,
            "data.period" => self.period = num(key, v)?,
            "data.noise_std" => self.noise_std = num(key, v)?,
            "data.hetero" => self.hetero = num(key, v)?,
            "data.interval_s" => self.interval_s = num(key, v)?,
            "data.train_fraction" => self.train_fraction = num(key, v)?,
            "data.stream_fraction" => self.stream_fraction = num(key, v)?,
            "sweep.clusters" => self.sweep_clusters = list(key, v)?,
            "sweep.participation" => self.sweep_participation = list(key, v)?,
            "sweep.psi" => self.sweep_psi = list(key, v)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Every key with its resolved value, in a fixed order.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let opt = |o: &Option<String>| o.clone().unwrap_or_default();
        let pairs: Vec<(&str, String)> = vec![
            ("seed", self.seed.to_string()),
            ("network.n_bs", self.n_bs.to_string()),
            ("network.degree", self.degree.to_string()),
            ("network.groups", self.groups.to_string()),
            ("network.roster", opt(&self.roster)),
            ("network.w_g", self.weights.g.to_string()),
            ("network.w_k", self.weights.k.to_string()),
            ("network.w_beta", self.weights.beta.to_string()),
            ("network.w_tau", self.weights.tau.to_string()),
            ("network.g_floor", self.g_floor.to_string()),
            ("network.normalize_terms", self.normalize_terms.to_string()),
            ("network.bins", self.bins.to_string()),
            ("dcs.mode", if self.adaptive { "adaptive" } else { "fixed" }.into()),
            ("dcs.clusters", self.clusters.to_string()),
            (
                "dcs.strategy",
                match self.strategy {
                    Strategy::MinWeight => "min_weight",
                    Strategy::MaxBetweenness => "max_betweenness",
                }
                .into(),
            ),
            ("window.immediate", self.window.immediate.to_string()),
            ("window.cyclical", self.window.cyclical.to_string()),
            ("window.period", self.window.period.to_string()),
            ("model.arch", if self.mlp { "mlp" } else { "linear" }.into()),
            ("model.hidden", self.hidden.to_string()),
            ("train.learning_rate", self.learning_rate.to_string()),
            ("train.batch_size", self.batch_size.to_string()),
            ("train.local_epochs", self.local_epochs.to_string()),
            ("vtwin.epochs", self.v_epochs.to_string()),
            ("vtwin.dcs_period", self.v_dcs_period.to_string()),
            ("htwin.epochs", self.h_epochs.to_string()),
            ("htwin.dcs_period", self.h_dcs_period.to_string()),
            ("htwin.batch_threshold", self.batch_threshold.to_string()),
            ("htwin.period_min", self.period_min.to_string()),
            ("htwin.period_max", self.period_max.to_string()),
            ("htwin.sync_period", self.sync_period.to_string()),
            ("twinning.psi", self.psi.to_string()),
            (
                "twinning.update_mode",
                if self.incremental { "incremental" } else { "average" }.into(),
            ),
            (
                "twinning.eta",
                self.eta.map_or_else(|| "auto".into(), |e| e.to_string()),
            ),
            ("twinning.participation", self.participation.to_string()),
            ("twinning.transfer_time_s", self.transfer_time_s.to_string()),
            (
                "data.source",
                match self.source {
                    DataSource::Synthetic => "synthetic",
                    DataSource::Csv => "csv",
                }
                .into(),
            ),
            ("data.path", opt(&self.path)),
            ("data.column", self.column.clone()),
            ("data.length", self.length.to_string()),
            ("data.period", self.period.to_string()),
            ("data.noise_std", self.noise_std.to_string()),
            ("data.hetero", self.hetero.to_string()),
            ("data.interval_s", self.interval_s.to_string()),
            ("data.train_fraction", self.train_fraction.to_string()),
            ("data.stream_fraction", self.stream_fraction.to_string()),
            ("sweep.clusters", join(&self.sweep_clusters)),
            ("sweep.participation", join(&self.sweep_participation)),
            ("sweep.psi", join(&self.sweep_psi)),
        ];
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// Rebuilds a config from an echo (or any key/value map).
    pub fn from_echo(echo: &BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = Self::default();
        for (k, v) in echo {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    /// Config file text that parses back to this config.
    pub fn to_text(&self) -> String {
        self.echo()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// Checks every field; run before any computation.
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, key: &str, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::config(key, msg))
            }
        };
        let in_unit_open = |v: f64| v > 0.0 && v < 1.0;
        check(self.n_bs >= 1, "network.n_bs", "must be at least 1")?;
        check(self.degree < self.n_bs, "network.degree", "must be below the station count")?;
        check(
            (self.n_bs * self.degree).is_multiple_of(2),
            "network.degree",
            "n_bs * degree must be even for a regular graph",
        )?;
        check(
            self.n_bs <= 2 || self.degree >= 2,
            "network.degree",
            "a connected regular graph on more than two nodes needs degree >= 2",
        )?;
        check(self.groups >= 1, "network.groups", "must be at least 1")?;
        self.weights
            .validate()
            .map_err(|e| Error::config("network.w_*", e.to_string()))?;
        check(self.g_floor > 0.0 && self.g_floor.is_finite(), "network.g_floor", "must be positive")?;
        check(self.bins >= 1, "network.bins", "must be at least 1")?;
        check(self.clusters >= 1, "dcs.clusters", "must be at least 1")?;
        check(self.clusters <= self.n_bs, "dcs.clusters", "cannot exceed network.n_bs")?;
        self.window
            .validate()
            .map_err(|e| Error::config("window", e.to_string()))?;
        check(!self.mlp || self.hidden >= 1, "model.hidden", "must be at least 1")?;
        check(
            self.learning_rate > 0.0 && self.learning_rate.is_finite(),
            "train.learning_rate",
            "must be positive",
        )?;
        check(self.batch_size >= 1, "train.batch_size", "must be at least 1")?;
        check(self.local_epochs >= 1, "train.local_epochs", "must be at least 1")?;
        check(self.v_epochs >= 1, "vtwin.epochs", "must be at least 1")?;
        check(self.v_dcs_period >= 1, "vtwin.dcs_period", "must be at least 1")?;
        check(self.h_epochs >= 1, "htwin.epochs", "must be at least 1")?;
        check(self.h_dcs_period >= 1, "htwin.dcs_period", "must be at least 1")?;
        check(self.batch_threshold >= 1, "htwin.batch_threshold", "must be at least 1")?;
        check(
            self.period_min >= 1 && self.period_min <= self.period_max,
            "htwin.period_min",
            "must satisfy 1 <= period_min <= period_max",
        )?;
        check(self.sync_period >= 1, "htwin.sync_period", "must be at least 1")?;
        let psi_ok = |p: f64| p >= 0.0 && !p.is_nan();
        check(psi_ok(self.psi), "twinning.psi", "must be non-negative")?;
        check(
            self.eta.is_none_or(|e| e > 0.0 && e <= 1.0),
            "twinning.eta",
            "must lie in (0, 1] or be `auto`",
        )?;
        let frac_ok = |f: f64| f > 0.0 && f <= 1.0;
        check(frac_ok(self.participation), "twinning.participation", "must lie in (0, 1]")?;
        check(
            self.transfer_time_s >= 0.0 && self.transfer_time_s.is_finite(),
            "twinning.transfer_time_s",
            "must be finite and non-negative",
        )?;
        match self.source {
            DataSource::Csv => check(self.path.is_some(), "data.path", "required when data.source = csv")?,
            DataSource::Synthetic => {
                check(self.period >= 1, "data.period", "must be at least 1")?;
                check(self.length > self.period, "data.length", "must exceed data.period")?;
                check(
                    self.noise_std >= 0.0 && self.noise_std.is_finite(),
                    "data.noise_std",
                    "must be finite and non-negative",
                )?;
                check((0.0..=1.0).contains(&self.hetero), "data.hetero", "must lie in [0, 1]")?;
                check(
                    self.interval_s > 0.0 && self.interval_s.is_finite(),
                    "data.interval_s",
                    "must be positive",
                )?;
                let cut = (self.train_fraction * self.length as f64).floor() as usize;
                check(
                    cut > self.window.max_lag(),
                    "data.length",
                    "history too short for the window lags",
                )?;
            }
        }
        check(
            VALUE_COLUMNS.contains(&self.column.as_str()),
            "data.column",
            "unknown activity column",
        )?;
        check(in_unit_open(self.train_fraction), "data.train_fraction", "must lie in (0, 1)")?;
        check(in_unit_open(self.stream_fraction), "data.stream_fraction", "must lie in (0, 1)")?;
        for &c in &self.sweep_clusters {
            check(c >= 1 && c <= self.n_bs, "sweep.clusters", "each entry must lie in [1, n_bs]")?;
        }
        for &f in &self.sweep_participation {
            check(frac_ok(f), "sweep.participation", "each entry must lie in (0, 1]")?;
        }
        for &p in &self.sweep_psi {
            check(psi_ok(p), "sweep.psi", "each entry must be non-negative")?;
        }
        Ok(())
    }

    pub fn arch(&self) -> Arch {
        if self.mlp {
            Arch::Mlp { hidden: self.hidden }
        } else {
            Arch::Linear
        }
    }

    pub fn dcs_config(&self, clusters: usize) -> DcsConfig {
        DcsConfig {
            phi: PhiConfig {
                weights: self.weights,
                g_floor: self.g_floor,
                normalize_distance: self.normalize_terms,
            },
            mode: if self.adaptive {
                ClusterMode::Adaptive
            } else {
                ClusterMode::Fixed(clusters)
            },
            strategy: self.strategy,
            bins: self.bins,
            seed: self.seed,
        }
    }

    pub fn vconfig(&self) -> VConfig {
        VConfig {
            rounds: self.v_epochs,
            dcs_period: self.v_dcs_period,
            local_epochs: self.local_epochs,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            participation: self.participation,
            transfer_time_s: self.transfer_time_s,
            seed: self.seed,
            dcs: self.dcs_config(self.clusters),
        }
    }

    pub fn hconfig(&self) -> HConfig {
        HConfig {
            epochs: self.h_epochs,
            dcs_period: self.h_dcs_period,
            psi: self.psi,
            mode: if self.incremental {
                UpdateMode::Incremental { eta: self.eta }
            } else {
                UpdateMode::Average
            },
            local_epochs: self.local_epochs,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            batch_threshold: self.batch_threshold,
            period_min: self.period_min,
            period_max: self.period_max,
            schedules: None,
            sync_period: self.sync_period,
            participation: self.participation,
            transfer_time_s: self.transfer_time_s,
            seed: self.seed,
            dcs: self.dcs_config(self.clusters),
        }
    }

    pub fn prep_spec(&self) -> PrepSpec {
        PrepSpec {
            window: self.window,
            train_fraction: self.train_fraction,
            stream_fraction: self.stream_fraction,
        }
    }

    pub fn synth_spec(&self) -> SynthSpec {
        SynthSpec {
            n_bs: self.n_bs,
            length: self.length,
            period: self.period,
            noise_std: self.noise_std,
            hetero: self.hetero,
            groups: self.groups,
            interval_s: self.interval_s,
            seed: self.seed,
        }
    }
}
