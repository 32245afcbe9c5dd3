//! Traffic series: synthetic generation, min-max scaling and the
//! historical/stream split.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficSeries {
    pub bs_id: usize,
    /// Seconds between consecutive samples.
    pub interval_s: f64,
    pub values: Vec<f64>,
    /// Indices `i` where sample `i` does not directly follow sample `i - 1`
    /// (missing intervals in the source data). Sorted ascending.
    pub breaks: Vec<usize>,
}

impl TrafficSeries {
    pub fn new(bs_id: usize, interval_s: f64, values: Vec<f64>) -> Self {
        Self {
            bs_id,
            interval_s,
            values,
            breaks: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if !(self.interval_s > 0.0) {
            return Err(Error::invalid("sample interval must be positive"));
        }
        if self.values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("traffic values must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub n_bs: usize,
    pub length: usize,
    /// Samples per daily cycle.
    pub period: usize,
    /// Gaussian noise standard deviation, as a fraction of each station's
    /// mean level.
    pub noise_std: f64,
    /// Spread of per-station level, amplitude and phase, in `[0, 1]`.
    pub hetero: f64,
    /// Number of traffic groups; stations `[g*n/G, (g+1)*n/G)` form group `g`
    /// and groups differ in mean level when `hetero > 0`.
    pub groups: usize,
    pub interval_s: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_bs: 50,
            length: 720,
            period: 24,
            noise_std: 0.05,
            hetero: 0.5,
            groups: 1,
            interval_s: 3600.0,
            seed: 0,
        }
    }
}

/// Base traffic level of a station, arbitrary units.
const BASE_LEVEL: f64 = 100.0;

/// Periodic per-station traffic: a daily sinusoid plus a weaker half-day
/// harmonic, scaled by a station level, with multiplicative Gaussian noise,
/// clipped at zero. The periodic part is evaluated at `t mod period`, so a
/// noiseless series repeats exactly.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<BTreeMap<usize, TrafficSeries>> {
    if spec.period == 0 || spec.length <= spec.period {
        return Err(Error::invalid("synthetic length must exceed the period"));
    }
    if !(spec.noise_std >= 0.0 && spec.noise_std.is_finite()) {
        return Err(Error::invalid("noise_std must be finite and non-negative"));
    }
    if !(0.0..=1.0).contains(&spec.hetero) {
        return Err(Error::invalid("hetero must lie in [0, 1]"));
    }
    if !(spec.interval_s > 0.0) {
        return Err(Error::invalid("sample interval must be positive"));
    }
    let groups = spec.groups.max(1);
    let mut out = BTreeMap::new();
    for id in 0..spec.n_bs {
        let mut r = rng::rng_for(spec.seed, rng::SYNTHETIC, id as u64);
        let group = id * groups / spec.n_bs;
        let u_level: f64 = r.random_range(-1.0..=1.0);
        let u_amp: f64 = r.random_range(-1.0..=1.0);
        let u_phase: f64 = r.random_range(-1.0..=1.0);
        let h = spec.hetero;
        let level = BASE_LEVEL * (1.0 + 2.0 * h * group as f64) * (1.0 + 0.5 * h * u_level);
        let amp = 0.5 * (1.0 + 0.5 * h * u_amp);
        let phase = h * PI * u_phase;
        let values = (0..spec.length)
            .map(|t| {
                let x = 2.0 * PI * (t % spec.period) as f64 / spec.period as f64;
                let shape = 1.0 + amp * (libm::sin(x + phase) + 0.3 * libm::sin(2.0 * x + phase));
                let z: f64 = StandardNormal.sample(&mut r);
                (level * shape + level * spec.noise_std * z).max(0.0)
            })
            .collect();
        out.insert(id, TrafficSeries::new(id, spec.interval_s, values));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
}

impl MinMax {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(max > min) {
            return Err(Error::ConstantSeries);
        }
        Ok(Self { min, max })
    }

    pub fn scale(&self, v: f64) -> f64 {
        (v - self.min) / (self.max - self.min)
    }

    pub fn unscale(&self, v: f64) -> f64 {
        self.min + v * (self.max - self.min)
    }
}

/// Lower and upper clamp applied when scaling with externally supplied
/// parameters, to tolerate drift beyond the historical range.
pub const DRIFT_CLAMP: (f64, f64) = (-0.5, 1.5);

/// Scales to `[0, 1]` with the series' own range, or with `params` when
/// given (then clamped to [`DRIFT_CLAMP`]).
pub fn normalize(series: &TrafficSeries, params: Option<MinMax>) -> Result<(TrafficSeries, MinMax)> {
    let (mm, clamp) = match params {
        Some(p) => {
            if !(p.max > p.min) {
                return Err(Error::ConstantSeries);
            }
            (p, true)
        }
        None => (MinMax::of(&series.values)?, false),
    };
    let values = series
        .values
        .iter()
        .map(|&v| {
            let s = mm.scale(v);
            if clamp {
                s.clamp(DRIFT_CLAMP.0, DRIFT_CLAMP.1)
            } else {
                s
            }
        })
        .collect();
    Ok((
        TrafficSeries {
            values,
            ..series.clone()
        },
        mm,
    ))
}

pub fn denormalize(values: &[f64], params: MinMax) -> Vec<f64> {
    values.iter().map(|&v| params.unscale(v)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
}

/// Splits into a contiguous prefix of `floor(train_fraction * L)` samples
/// and the remaining suffix. Both parts must hold at least `min_len` samples.
pub fn split(
    series: &TrafficSeries,
    spec: SplitSpec,
    min_len: usize,
) -> Result<(TrafficSeries, TrafficSeries)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::invalid("train_fraction must lie in (0, 1)"));
    }
    let len = series.len();
    let cut = libm::floor(spec.train_fraction * len as f64) as usize;
    let needed = min_len.max(1);
    if cut < needed || len - cut < needed {
        return Err(Error::SeriesTooShort {
            len,
            needed: 2 * needed,
        });
    }
    let head = TrafficSeries {
        values: series.values[..cut].to_vec(),
        breaks: series.breaks.iter().copied().filter(|&b| b < cut).collect(),
        ..series.clone()
    };
    let tail = TrafficSeries {
        values: series.values[cut..].to_vec(),
        breaks: series
            .breaks
            .iter()
            .filter(|&&b| b > cut)
            .map(|&b| b - cut)
            .collect(),
        ..series.clone()
    };
    Ok((head, tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pearson_lag(x: &[f64], lag: usize) -> f64 {
        let a = &x[..x.len() - lag];
        let b = &x[lag..];
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov: f64 = a.iter().zip(b).map(|(p, q)| (p - ma) * (q - mb)).sum();
        let va: f64 = a.iter().map(|p| (p - ma) * (p - ma)).sum();
        let vb: f64 = b.iter().map(|q| (q - mb) * (q - mb)).sum();
        cov / libm::sqrt(va * vb)
    }

    #[test]
    fn homogeneous_noiseless_series_are_identical() {
        let spec = SynthSpec {
            n_bs: 4,
            noise_std: 0.0,
            hetero: 0.0,
            ..SynthSpec::default()
        };
        let m = generate_synthetic(&spec).unwrap();
        for s in m.values() {
            assert_eq!(s.values, m[&0].values);
        }
    }

    #[test]
    fn noiseless_series_is_periodic() {
        let spec = SynthSpec {
            n_bs: 3,
            noise_std: 0.0,
            hetero: 1.0,
            length: 200,
            period: 24,
            ..SynthSpec::default()
        };
        for s in generate_synthetic(&spec).unwrap().values() {
            for t in 0..(200 - 24) {
                assert_eq!(s.values[t], s.values[t + 24]);
            }
            assert!((pearson_lag(&s.values, 24) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn synthetic_is_deterministic_and_non_negative() {
        let spec = SynthSpec {
            noise_std: 2.0,
            seed: 3,
            ..SynthSpec::default()
        };
        let a = generate_synthetic(&spec).unwrap();
        assert_eq!(a, generate_synthetic(&spec).unwrap());
        assert!(a.values().all(|s| s.values.iter().all(|&v| v >= 0.0)));
        assert!(generate_synthetic(&SynthSpec { length: 24, ..spec }).is_err());
    }

    #[test]
    fn normalize_cases() {
        let s = TrafficSeries::new(0, 1.0, vec![0.0, 5.0, 10.0]);
        let (n, mm) = normalize(&s, None).unwrap();
        assert_eq!(n.values, vec![0.0, 0.5, 1.0]);
        assert_eq!(mm, MinMax { min: 0.0, max: 10.0 });

        let drift = TrafficSeries::new(0, 1.0, vec![20.0]);
        let (n, _) = normalize(&drift, Some(mm)).unwrap();
        assert_eq!(n.values, vec![1.5]);

        let flat = TrafficSeries::new(0, 1.0, vec![3.0, 3.0]);
        assert_eq!(normalize(&flat, None), Err(Error::ConstantSeries));
    }

    #[test]
    fn normalize_round_trip() {
        let s = TrafficSeries::new(0, 1.0, vec![3.5, 7.25, 1.0, 12.0, 9.9]);
        let (n, mm) = normalize(&s, None).unwrap();
        for (a, b) in denormalize(&n.values, mm).iter().zip(&s.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn split_cases() {
        let s = TrafficSeries::new(0, 1.0, (0..10).map(f64::from).collect());
        let (h, t) = split(&s, SplitSpec { train_fraction: 0.8 }, 1).unwrap();
        assert_eq!((h.len(), t.len()), (8, 2));
        let mut joined = h.values.clone();
        joined.extend(&t.values);
        assert_eq!(joined, s.values);

        let s3 = TrafficSeries::new(0, 1.0, vec![1.0, 2.0, 3.0]);
        let (h, t) = split(&s3, SplitSpec { train_fraction: 0.5 }, 1).unwrap();
        assert_eq!((h.len(), t.len()), (1, 2));

        assert!(split(&s, SplitSpec { train_fraction: 0.8 }, 3).is_err());
    }

    #[test]
    fn split_moves_breaks() {
        let mut s = TrafficSeries::new(0, 1.0, (0..10).map(f64::from).collect());
        s.breaks = vec![2, 7];
        let (h, t) = split(&s, SplitSpec { train_fraction: 0.5 }, 1).unwrap();
        assert_eq!(h.breaks, vec![2]);
        assert_eq!(t.breaks, vec![2]);
    }
}
