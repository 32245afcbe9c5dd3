use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng;

/// Picks `ceil(fraction * ids.len())` stations for one round, sorted by id.
///
/// The draw depends only on `(seed, round)`, so reruns pick the same set.
pub fn select_participants(ids: &[usize], fraction: f64, round: u64, seed: u64) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid("participation fraction must lie in (0, 1]"));
    }
    let m = ids.len();
    let k = (libm::ceil(fraction * m as f64) as usize).clamp(m.min(1), m);
    let mut out: Vec<usize> = if k == m {
        ids.to_vec()
    } else {
        let mut r = rng::rng_for(seed, rng::PARTICIPATION, round);
        rand::seq::index::sample(&mut r, m, k)
            .into_iter()
            .map(|i| ids[i])
            .collect()
    };
    out.sort_unstable();
    Ok(out)
}
