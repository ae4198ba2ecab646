use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DatagenError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparsifierSpec {
    /// Fraction of time points kept, in `(0, 1]`.
    pub keep_fraction: f64,
}

/// Number of points kept out of `m`: `max(2, round(keep_fraction · m))`.
pub fn kept_count(m: usize, keep_fraction: f64) -> Result<usize, DatagenError> {
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(DatagenError::InvalidSpec(format!("keep_fraction must be in (0, 1], got {keep_fraction}")));
    }
    if m < 2 || (keep_fraction * m as f64).ceil() < 2.0 {
        return Err(DatagenError::TooSparse { len: m, keep_fraction });
    }
    Ok(((keep_fraction * m as f64).round() as usize).clamp(2, m))
}

/// Sorted indices of the points kept out of `m`.
///
/// The first and last points are always kept; the remaining `k − 2` are drawn
/// uniformly without replacement from the interior.
pub fn sparsify_indices<R: Rng + ?Sized>(m: usize, keep_fraction: f64, rng: &mut R) -> Result<Vec<usize>, DatagenError> {
    let k = kept_count(m, keep_fraction)?;
    if k == m {
        return Ok((0..m).collect());
    }
    let mut idx: Vec<usize> = rand::seq::index::sample(rng, m - 2, k - 2).into_iter().map(|i| i + 1).collect();
    idx.push(0);
    idx.push(m - 1);
    idx.sort_unstable();
    Ok(idx)
}

/// Randomly drop time points from a series, returning the kept times and values.
pub fn sparsify<R: Rng + ?Sized>(
    times: &[f64],
    values: &[f64],
    keep_fraction: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>), DatagenError> {
    if times.len() != values.len() {
        return Err(DatagenError::InvalidSpec(format!(
            "times ({}) and values ({}) differ in length",
            times.len(),
            values.len()
        )));
    }
    let idx = sparsify_indices(times.len(), keep_fraction, rng)?;
    Ok((idx.iter().map(|&i| times[i]).collect(), idx.iter().map(|&i| values[i]).collect()))
}
