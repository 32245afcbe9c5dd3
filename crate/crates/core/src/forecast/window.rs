use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};

/// Lag layout of one sample: `immediate` consecutive lags followed by
/// `cyclical` lags at multiples of `period`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub immediate: usize,
    pub cyclical: usize,
    pub period: usize,
}

impl WindowSpec {
    pub fn new(immediate: usize, cyclical: usize, period: usize) -> Result<Self> {
        let spec = Self {
            immediate,
            cyclical,
            period,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.immediate + self.cyclical == 0 {
            return Err(Error::invalid("window needs at least one lag"));
        }
        if self.period == 0 {
            return Err(Error::invalid("period must be at least 1"));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.immediate + self.cyclical
    }

    /// Longest lag, i.e. the first valid target index.
    pub fn max_lag(&self) -> usize {
        self.immediate.max(self.period * self.cyclical)
    }

    fn lags(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.immediate).chain((1..=self.cyclical).map(|j| j * self.period))
    }
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            immediate: 6,
            cyclical: 2,
            period: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub input: Vec<f64>,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WindowedDataset {
    pub samples: Vec<Sample>,
}

impl WindowedDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn targets(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.target)
    }
}

/// Builds one sample per valid target index `l`: input
/// `[d[l-1], .., d[l-a], d[l-rho], .., d[l-rho*b]]`, target `d[l]`.
pub fn build_windows(series: &[f64], spec: &WindowSpec) -> Result<WindowedDataset> {
    let data = build_windows_for_targets(series, &[], spec, 0..series.len())?;
    if data.is_empty() {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            needed: spec.max_lag() + 1,
        });
    }
    Ok(data)
}

/// Builds samples only for target indices inside `targets`, skipping any
/// target whose lag set crosses a discontinuity. `breaks` lists indices `i`
/// where sample `i` does not directly follow sample `i - 1` in time.
///
/// An empty result is not an error here.
pub fn build_windows_for_targets(
    series: &[f64],
    breaks: &[usize],
    spec: &WindowSpec,
    targets: Range<usize>,
) -> Result<WindowedDataset> {
    spec.validate()?;
    let first = targets.start.max(spec.max_lag());
    let last = targets.end.min(series.len());
    let samples = (first..last)
        .filter(|&l| {
            let window_start = l - spec.max_lag();
            !breaks.iter().any(|&b| b > window_start && b <= l)
        })
        .map(|l| Sample {
            input: spec.lags().map(|lag| series[l - lag]).collect(),
            target: series[l],
        })
        .collect();
    Ok(WindowedDataset { samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn immediate_lags_only() {
        let d = build_windows(&[1.0, 2.0, 3.0, 4.0, 5.0], &WindowSpec::new(2, 0, 1).unwrap()).unwrap();
        let pairs: Vec<_> = d.samples.iter().map(|s| (s.input.clone(), s.target)).collect();
        assert_eq!(
            pairs,
            vec![
                (vec![2.0, 1.0], 3.0),
                (vec![3.0, 2.0], 4.0),
                (vec![4.0, 3.0], 5.0)
            ]
        );
    }

    #[test]
    fn cyclical_lag_indexing() {
        let series: Vec<f64> = (1..=10).map(f64::from).collect();
        let d = build_windows(&series, &WindowSpec::new(1, 1, 3).unwrap()).unwrap();
        assert_eq!(d.samples[0].input, vec![3.0, 1.0]);
        assert_eq!(d.samples[0].target, 4.0);
        assert_eq!(d.len(), 10 - 3);
    }

    #[test]
    fn no_lags_is_rejected() {
        assert!(WindowSpec::new(0, 0, 1).is_err());
        let bad = WindowSpec {
            immediate: 0,
            cyclical: 0,
            period: 1,
        };
        assert!(build_windows(&[1.0, 2.0], &bad).is_err());
    }

    #[test]
    fn too_short_series() {
        let err = build_windows(&[1.0, 2.0], &WindowSpec::new(2, 0, 1).unwrap());
        assert_eq!(err, Err(Error::SeriesTooShort { len: 2, needed: 3 }));
    }

    #[test]
    fn breaks_skip_crossing_targets() {
        let series: Vec<f64> = (0..8).map(f64::from).collect();
        let spec = WindowSpec::new(2, 0, 1).unwrap();
        // discontinuity before index 4: targets 4 and 5 look across it
        let d = build_windows_for_targets(&series, &[4], &spec, 0..8).unwrap();
        let targets: Vec<f64> = d.targets().collect();
        assert_eq!(targets, vec![2.0, 3.0, 6.0, 7.0]);
    }

    #[test]
    fn target_range_restricts_output() {
        let series: Vec<f64> = (0..10).map(f64::from).collect();
        let spec = WindowSpec::new(3, 0, 1).unwrap();
        let d = build_windows_for_targets(&series, &[], &spec, 7..10).unwrap();
        assert_eq!(d.samples[0].input, vec![6.0, 5.0, 4.0]);
        assert_eq!(d.len(), 3);
    }
}
