//! Turns raw per-station series into the inputs of both twinning phases and
//! scores a twin on the held-out tail.
//!
//! Each series is cut into three contiguous parts: history (vertical phase),
//! stream (horizontal phase) and test. All parts are scaled with the
//! station's historical range. Windows near a cut borrow their lags from the
//! preceding part, so no target is lost at the boundaries.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::forecast::{build_windows_for_targets, Sample, TwinModel, WindowSpec, WindowedDataset};
use crate::metrics;
use crate::series::{normalize, MinMax, TrafficSeries};
use crate::topology::Network;
use crate::twinning::{StationInputs, StreamInputs};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrepSpec {
    pub window: WindowSpec,
    /// Share of each series used as history.
    pub train_fraction: f64,
    /// Share of the remainder streamed during the horizontal phase; the rest
    /// is held out for testing.
    pub stream_fraction: f64,
}

impl Default for PrepSpec {
    fn default() -> Self {
        Self {
            window: WindowSpec::default(),
            train_fraction: 0.6,
            stream_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub history_raw: Vec<Vec<f64>>,
    pub stream_raw: Vec<Vec<f64>>,
    pub train: Vec<WindowedDataset>,
    /// Stream samples with their arrival tick.
    pub arrivals: Vec<Vec<(usize, Sample)>>,
    pub test: Vec<WindowedDataset>,
    pub scales: Vec<MinMax>,
    /// Stream length in ticks.
    pub horizon: usize,
}

impl Prepared {
    pub fn station_inputs<'a>(&'a self, network: &'a Network) -> StationInputs<'a> {
        StationInputs {
            network,
            history: &self.history_raw,
            datasets: &self.train,
        }
    }

    pub fn stream_inputs<'a>(&'a self, network: &'a Network) -> StreamInputs<'a> {
        StreamInputs {
            network,
            history: &self.history_raw,
            stream: &self.stream_raw,
            arrivals: &self.arrivals,
            horizon: self.horizon,
        }
    }
}

/// Splits, scales and windows every series. Series must share one length;
/// entry `i` becomes station `i`.
pub fn prepare(series: &[TrafficSeries], spec: &PrepSpec) -> Result<Prepared> {
    spec.window.validate()?;
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::invalid("train_fraction must lie in (0, 1)"));
    }
    if !(spec.stream_fraction > 0.0 && spec.stream_fraction < 1.0) {
        return Err(Error::invalid("stream_fraction must lie in (0, 1)"));
    }
    let len = series.first().ok_or(Error::EmptyInput)?.len();
    let cut1 = libm::floor(spec.train_fraction * len as f64) as usize;
    let cut2 = cut1 + libm::floor(spec.stream_fraction * (len - cut1) as f64) as usize;
    let min_history = spec.window.max_lag() + 1;
    if cut1 < min_history || cut2 == cut1 || cut2 == len {
        return Err(Error::SeriesTooShort {
            len,
            needed: min_history + 2,
        });
    }

    let mut out = Prepared {
        history_raw: Vec::with_capacity(series.len()),
        stream_raw: Vec::with_capacity(series.len()),
        train: Vec::with_capacity(series.len()),
        arrivals: Vec::with_capacity(series.len()),
        test: Vec::with_capacity(series.len()),
        scales: Vec::with_capacity(series.len()),
        horizon: cut2 - cut1,
    };
    for s in series {
        s.validate()?;
        if s.len() != len {
            return Err(Error::LengthMismatch {
                left: len,
                right: s.len(),
            });
        }
        let history = &s.values[..cut1];
        // A flat history still gets a usable unit-width range.
        let scale = match MinMax::of(history) {
            Err(Error::ConstantSeries) => MinMax {
                min: history[0],
                max: history[0] + 1.0,
            },
            other => other?,
        };
        let (norm, _) = normalize(s, Some(scale))?;
        let w = &spec.window;
        let train = build_windows_for_targets(&norm.values, &s.breaks, w, 0..cut1)?;
        if train.is_empty() {
            return Err(Error::SeriesTooShort {
                len: cut1,
                needed: min_history,
            });
        }
        let stream = build_windows_for_targets(&norm.values, &s.breaks, w, cut1..cut2)?;
        let first_target = cut1.max(w.max_lag());
        let arrivals = stream_ticks(&s.breaks, w, first_target..cut2, cut1)
            .zip(stream.samples)
            .collect();
        let test = build_windows_for_targets(&norm.values, &s.breaks, w, cut2..len)?;
        out.history_raw.push(history.to_vec());
        out.stream_raw.push(s.values[cut1..cut2].to_vec());
        out.train.push(train);
        out.arrivals.push(arrivals);
        out.test.push(test);
        out.scales.push(scale);
    }
    if out.test.iter().all(WindowedDataset::is_empty) {
        return Err(Error::SeriesTooShort {
            len,
            needed: min_history + 2,
        });
    }
    Ok(out)
}

/// Arrival ticks of the targets that survive the break filter, in order.
fn stream_ticks<'a>(
    breaks: &'a [usize],
    spec: &'a WindowSpec,
    targets: core::ops::Range<usize>,
    origin: usize,
) -> impl Iterator<Item = usize> + 'a {
    targets
        .filter(move |&l| {
            let start = l - spec.max_lag();
            !breaks.iter().any(|&b| b > start && b <= l)
        })
        .map(move |l| l - origin)
}

/// Held-out error of a twin, in scaled units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub mse: f64,
    pub mae: f64,
    pub nrmse: f64,
}

/// Predictions and truths of `model` over all datasets, concatenated in
/// station order.
pub fn predictions(model: &TwinModel, datasets: &[WindowedDataset]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut pred = Vec::new();
    let mut truth = Vec::new();
    for d in datasets {
        for s in &d.samples {
            pred.push(model.predict(&s.input)?);
            truth.push(s.target);
        }
    }
    Ok((pred, truth))
}

pub fn evaluate(model: &TwinModel, datasets: &[WindowedDataset]) -> Result<Evaluation> {
    let (pred, truth) = predictions(model, datasets)?;
    Ok(Evaluation {
        mse: metrics::mse(&pred, &truth)?,
        mae: metrics::mae(&pred, &truth)?,
        nrmse: metrics::nrmse(&pred, &truth)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{generate_synthetic, SynthSpec};

    fn series(n: usize, len: usize) -> Vec<TrafficSeries> {
        let spec = SynthSpec {
            n_bs: n,
            length: len,
            ..SynthSpec::default()
        };
        generate_synthetic(&spec).unwrap().into_values().collect()
    }

    #[test]
    fn partition_sizes() {
        let p = prepare(&series(3, 200), &PrepSpec::default()).unwrap();
        // cut1 = 120, cut2 = 160
        assert_eq!(p.horizon, 40);
        assert_eq!(p.history_raw[0].len(), 120);
        assert_eq!(p.train[0].len(), 120 - 48);
        assert_eq!(p.arrivals[0].len(), 40);
        assert_eq!(p.test[0].len(), 40);
        let ticks: Vec<usize> = p.arrivals[0].iter().map(|(t, _)| *t).collect();
        assert_eq!(ticks, (0..40).collect::<Vec<_>>());
    }

    #[test]
    fn history_is_scaled_to_unit_range() {
        let p = prepare(&series(2, 200), &PrepSpec::default()).unwrap();
        let targets: Vec<f64> = p.train[1].targets().collect();
        let hi = targets.iter().copied().fold(f64::MIN, f64::max);
        assert!(hi <= 1.0 && targets.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn stream_targets_match_raw_values() {
        let s = series(1, 200);
        let p = prepare(&s, &PrepSpec::default()).unwrap();
        let (tick, sample) = &p.arrivals[0][5];
        let raw = s[0].values[120 + tick];
        assert!((p.scales[0].unscale(sample.target) - raw).abs() < 1e-9);
    }

    #[test]
    fn breaks_drop_stream_targets() {
        let mut s = series(1, 200);
        s[0].breaks = alloc::vec![130];
        let p = prepare(&s, &PrepSpec::default()).unwrap();
        // targets 130..=177 have the break inside their lag window
        let ticks: Vec<usize> = p.arrivals[0].iter().map(|(t, _)| *t).collect();
        assert_eq!(ticks, (0..10).collect::<Vec<_>>());
        assert_eq!(p.test[0].len(), 200 - 178);
    }

    #[test]
    fn too_short_is_an_error() {
        assert!(prepare(&series(1, 60), &PrepSpec::default()).is_err());
        assert_eq!(prepare(&[], &PrepSpec::default()), Err(Error::EmptyInput));
    }

    #[test]
    fn perfect_model_scores_zero() {
        let spec = PrepSpec {
            window: WindowSpec::new(1, 0, 1).unwrap(),
            ..PrepSpec::default()
        };
        let p = prepare(&series(2, 100), &spec).unwrap();
        let mut test = p.test.clone();
        for d in &mut test {
            for s in &mut d.samples {
                s.target = s.input[0];
            }
        }
        let m = TwinModel::new(crate::forecast::Arch::Linear, 1, alloc::vec![1.0, 0.0]).unwrap();
        let e = evaluate(&m, &test).unwrap();
        assert_eq!((e.mse, e.mae, e.nrmse), (0.0, 0.0, 0.0));
    }
}
