use crate::error::{contract, Result};
use crate::num::Real;

use super::cost::CostVolume;

/// Globally optimal labeling of one scanline.
///
/// Minimizes `sum cost(c, d_c) + smoothness * sum |d_c - d_{c+1}|`, where a
/// pixel may instead be labeled occluded (`None`) at a flat
/// `occlusion_penalty`; transitions into or out of an occluded pixel are free.
/// Ties go to the lowest disparity, with occlusion ranked last.
pub fn scanline_dp<T: Real>(
    cost_row: &CostVolume<T>,
    occlusion_penalty: T,
    smoothness_penalty: T,
) -> Result<Vec<Option<usize>>> {
    let candidates: Vec<Vec<(usize, T)>> = (0..cost_row.width())
        .map(|c| cost_row.column(c).iter().copied().enumerate().collect())
        .collect();
    scanline_dp_banded(&candidates, occlusion_penalty, smoothness_penalty)
}

/// Same objective as [`scanline_dp`] over per-column candidate lists of
/// `(disparity, cost)`, each sorted by ascending disparity.
pub fn scanline_dp_banded<T: Real>(
    candidates: &[Vec<(usize, T)>],
    occlusion_penalty: T,
    smoothness_penalty: T,
) -> Result<Vec<Option<usize>>> {
    if candidates.is_empty() {
        return contract("scanline must not be empty");
    }
    if !(occlusion_penalty >= T::zero() && smoothness_penalty >= T::zero()) {
        return contract("penalties must be non-negative");
    }
    // Per column: accumulated cost per state (candidates then occluded) and
    // the chosen predecessor state.
    let mut acc: Vec<T> = candidates[0].iter().map(|&(_, c)| c).collect();
    acc.push(occlusion_penalty);
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(candidates.len());
    back.push(vec![0; acc.len()]);

    for col in 1..candidates.len() {
        let prev = &candidates[col - 1];
        let cur = &candidates[col];
        let prev_occ = prev.len();
        let mut next = Vec::with_capacity(cur.len() + 1);
        let mut from = Vec::with_capacity(cur.len() + 1);
        for &(d, c) in cur {
            let mut best = acc[0] + smoothness_penalty * jump::<T>(prev[0].0, d);
            let mut arg = 0;
            for (k, &(pd, _)) in prev.iter().enumerate().skip(1) {
                let v = acc[k] + smoothness_penalty * jump::<T>(pd, d);
                if v < best {
                    best = v;
                    arg = k;
                }
            }
            if acc[prev_occ] < best {
                best = acc[prev_occ];
                arg = prev_occ;
            }
            next.push(best + c);
            from.push(arg);
        }
        // Entering occlusion: cheapest predecessor of any kind.
        let mut arg = 0;
        for k in 1..acc.len() {
            if acc[k] < acc[arg] {
                arg = k;
            }
        }
        next.push(acc[arg] + occlusion_penalty);
        from.push(arg);
        acc = next;
        back.push(from);
    }

    let mut state = 0;
    for k in 1..acc.len() {
        if acc[k] < acc[state] {
            state = k;
        }
    }
    let mut out = vec![None; candidates.len()];
    for col in (0..candidates.len()).rev() {
        out[col] = candidates[col].get(state).map(|&(d, _)| d);
        state = back[col][state];
    }
    Ok(out)
}

#[inline]
fn jump<T: Real>(a: usize, b: usize) -> T {
    T::from_usize_lossy(a.abs_diff(b))
}

/// Replaces occluded pixels with the nearest valid disparity to the left, or
/// to the right at the start of the row. A fully occluded row stays invalid.
pub fn fill_occlusions(row: &[Option<usize>]) -> Vec<Option<usize>> {
    let first = row.iter().find_map(|d| *d);
    let mut last = first;
    row.iter()
        .map(|d| {
            if d.is_some() {
                last = *d;
            }
            last
        })
        .collect()
}
