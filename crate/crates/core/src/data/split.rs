use rand::seq::SliceRandom;

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

/// Shuffled row positions split into (train, holdout) positions.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction {fraction} outside (0, 1]"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream(seed, Stream::Split));
    // guard against 0.66 * 100 landing just below an integer
    let n_train = ((fraction * n as f64) + 1e-9).floor() as usize;
    let holdout = order.split_off(n_train.min(n));
    Ok((order, holdout))
}

/// Seeded shuffle, then the first `floor(fraction * n)` rows go to training.
pub fn split_train_test(d: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, holdout) = split_indices(d.len(), fraction, seed)?;
    Ok((d.subset(&train), d.subset(&holdout)))
}
