use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::num::Real;

/// IOU bin of a target: `[0, .25)`, `[.25, .5)`, `[.5, .75)`, `[.75, 1]`.
pub fn iou_bin<T: Real>(v: T) -> usize {
    let v = v.as_f64();
    if v < 0.25 {
        0
    } else if v < 0.5 {
        1
    } else if v < 0.75 {
        2
    } else {
        3
    }
}

/// Indices of an equal number of examples from every non-empty IOU bin,
/// drawn without replacement. Each bin's picks are returned in ascending
/// order, bins in ascending order.
pub fn balanced_sample<T: Real>(targets: &[T], seed: u64) -> Vec<usize> {
    let mut bins: [Vec<usize>; 4] = Default::default();
    for (i, &t) in targets.iter().enumerate() {
        bins[iou_bin(t)].push(i);
    }
    let filled: Vec<&Vec<usize>> = bins.iter().filter(|b| !b.is_empty()).collect();
    let Some(per_bin) = filled.iter().map(|b| b.len()).min() else {
        return Vec::new();
    };
    if filled.len() == 1 {
        log::warn!("all {} training targets fall in one IOU bin", targets.len());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(per_bin * filled.len());
    for bin in filled {
        let mut pick: Vec<usize> = sample(&mut rng, bin.len(), per_bin).iter().map(|k| bin[k]).collect();
        pick.sort_unstable();
        out.extend(pick);
    }
    out
}
