//! Random masking of a fully observed panel.

use rand::seq::index::sample as sample_indices;
use rand::Rng;

use crate::data::PanelDataset;
use crate::error::{Error, Result};

/// Predictions kept per sample: `max(2, round((1 - s) * n_experts))`,
/// rounding half away from zero.
pub fn retained_count(sparsity: f64, n_experts: usize) -> usize {
    let raw = ((1.0 - sparsity) * n_experts as f64).round() as usize;
    raw.max(2).min(n_experts)
}

/// Keeps a uniformly chosen subset of each sample's predictions of size
/// [`retained_count`] (or all of them, if the sample has fewer).
pub fn apply_sparsity<R: Rng + ?Sized>(
    dataset: &PanelDataset,
    sparsity: f64,
    rng: &mut R,
) -> Result<PanelDataset> {
    if !(sparsity > 0.0 && sparsity < 1.0) {
        return Err(Error::invalid(format!("sparsity {sparsity} must lie in (0, 1)")));
    }
    let n = dataset.experts().len();
    if n < 2 {
        return Err(Error::invalid("sparsity needs at least two experts"));
    }
    let keep = retained_count(sparsity, n);
    let mut samples = dataset.samples().to_vec();
    for s in &mut samples {
        let m = s.predictions.len();
        if m <= keep {
            continue;
        }
        let mut chosen = sample_indices(rng, m, keep).into_vec();
        chosen.sort_unstable();
        let mut chosen = chosen.into_iter().peekable();
        let mut i = 0;
        s.predictions.retain(|_, _| {
            let hit = chosen.peek() == Some(&i);
            if hit {
                chosen.next();
            }
            i += 1;
            hit
        });
    }
    dataset.with_samples(dataset.experts().to_vec(), samples)
}
