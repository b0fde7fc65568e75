use rayon::prelude::*;

use crate::error::{contract, Result};
use crate::num::Real;
use crate::raster::Grid;

use super::cost::{window_cost, CostParams};
use super::dp::{fill_occlusions, scanline_dp_banded};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StereoParams<T> {
    pub d_max: usize,
    pub levels: usize,
    pub cost: CostParams<T>,
    pub occlusion_penalty: T,
    pub smoothness_penalty: T,
    /// Half-width of the disparity search around the upsampled coarse estimate.
    pub search_band: usize,
}

impl<T: Real> StereoParams<T> {
    pub fn new(d_max: usize, levels: usize) -> Self {
        Self {
            d_max,
            levels,
            cost: CostParams::default(),
            occlusion_penalty: T::lit(400.0),
            smoothness_penalty: T::lit(15.0),
            search_band: 2,
        }
    }
}

/// Integer disparities; `None` marks an invalid pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityMap {
    pub disparity: Grid<Option<u32>>,
    pub d_max: usize,
}

/// Halves resolution by 2x2 averaging; odd trailing rows/columns are padded
/// by replication.
fn downsample<T: Real>(img: &Grid<T>) -> Grid<T> {
    let (w, h) = (img.width().div_ceil(2), img.height().div_ceil(2));
    let quarter = T::lit(0.25);
    Grid::from_fn(w, h, |r, c| {
        let (r2, c2) = (2 * r as isize, 2 * c as isize);
        (img.get_clamped(r2, c2)
            + img.get_clamped(r2, c2 + 1)
            + img.get_clamped(r2 + 1, c2)
            + img.get_clamped(r2 + 1, c2 + 1))
            * quarter
    })
}

fn level_d_max(d_max: usize, level: usize) -> usize {
    d_max.div_ceil(1 << level)
}

/// Solves the finest level directly when `levels == 1`; otherwise solves the
/// coarsest level over its full range and, at each finer level, searches
/// `±search_band` around twice the coarse disparity, or over the full range
/// where the coarse pixel is invalid. Rows are solved in
/// parallel; results do not depend on scheduling.
pub fn coarse_to_fine<T: Real>(left: &Grid<T>, right: &Grid<T>, params: &StereoParams<T>) -> Result<DisparityMap> {
    if left.dims() != right.dims() {
        return contract("stereo images must have equal dims");
    }
    if params.levels == 0 {
        return contract("levels must be >= 1");
    }
    if params.d_max >= left.width() {
        return contract(format!("d_max {} must be below width {}", params.d_max, left.width()));
    }
    let mut pyramid = vec![(left.clone(), right.clone())];
    for _ in 1..params.levels {
        let (l, r) = pyramid.last().unwrap();
        pyramid.push((downsample(l), downsample(r)));
    }
    let coarsest = params.levels - 1;
    let (cw, _) = pyramid[coarsest].0.dims();
    let coarse_dmax = level_d_max(params.d_max, coarsest);
    if cw < 2 * coarse_dmax {
        return contract(format!(
            "coarsest level width {} is below twice its disparity range {}",
            cw, coarse_dmax
        ));
    }

    let mut estimate: Option<Grid<Option<u32>>> = None;
    for level in (0..params.levels).rev() {
        let (l, r) = &pyramid[level];
        let dmax = level_d_max(params.d_max, level);
        let (w, h) = l.dims();
        let rows: Vec<Result<Vec<Option<usize>>>> = (0..h)
            .into_par_iter()
            .map(|row| {
                let candidates: Vec<Vec<(usize, T)>> = (0..w)
                    .map(|col| {
                        let (lo, hi) = match &estimate {
                            None => (0, dmax),
                            Some(coarse) => {
                                let cr = (row / 2).min(coarse.height() - 1);
                                let cc = (col / 2).min(coarse.width() - 1);
                                // An invalid coarse pixel carries no prior.
                                match coarse.get(cr, cc) {
                                    Some(d) => {
                                        let center = (2 * *d as usize).min(dmax);
                                        (
                                            center.saturating_sub(params.search_band),
                                            (center + params.search_band).min(dmax),
                                        )
                                    }
                                    None => (0, dmax),
                                }
                            }
                        };
                        (lo..=hi)
                            .map(|d| (d, window_cost(l, r, row, col, d, &params.cost)))
                            .collect()
                    })
                    .collect();
                let raw = scanline_dp_banded(&candidates, params.occlusion_penalty, params.smoothness_penalty)?;
                Ok(fill_occlusions(&raw))
            })
            .collect();
        let mut grid = Grid::filled(w, h, None);
        for (row, result) in rows.into_iter().enumerate() {
            for (col, d) in result?.into_iter().enumerate() {
                grid.set(row, col, d.map(|d| d as u32));
            }
        }
        estimate = Some(grid);
    }
    Ok(DisparityMap {
        disparity: estimate.expect("at least one level"),
        d_max: params.d_max,
    })
}

/// `Z = focal * baseline / d`; zero or invalid disparity gives NaN.
pub fn disparity_to_depth<T: Real>(d: &DisparityMap, focal_px: T, baseline_m: T) -> Result<Grid<T>> {
    if !(focal_px > T::zero() && baseline_m > T::zero()) {
        return contract("focal length and baseline must be positive");
    }
    let fb = focal_px * baseline_m;
    Ok(d.disparity.map(|v| match v {
        Some(v) if *v > 0 => fb / T::from_u32(*v).unwrap(),
        _ => T::nan(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stereo::{scanline_costs, scanline_dp};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn textured(w: usize, h: usize, seed: u64) -> Grid<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Grid::from_fn(w, h, |_, _| rng.random_range(0.0..255.0f64).round())
    }

    fn shifted_pair(shift: usize, seed: u64) -> (Grid<f64>, Grid<f64>) {
        let left = textured(64, 64, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
        let right = Grid::from_fn(64, 64, |r, c| {
            if c + shift < 64 {
                *left.get(r, c + shift)
            } else {
                rng.random_range(0.0..255.0f64).round()
            }
        });
        (left, right)
    }

    fn interior_hits(d: &DisparityMap, shift: u32, margin: usize) -> f64 {
        let (w, h) = d.disparity.dims();
        let mut hit = 0;
        let mut total = 0;
        for r in 2..h - 2 {
            for c in margin..w - 2 {
                total += 1;
                if *d.disparity.get(r, c) == Some(shift) {
                    hit += 1;
                }
            }
        }
        hit as f64 / total as f64
    }

    #[test]
    fn single_level_equals_per_row_dp() {
        let (l, r) = shifted_pair(3, 7);
        let p = StereoParams::new(8, 1);
        let map = coarse_to_fine(&l, &r, &p).unwrap();
        for row in 0..64 {
            let cv = scanline_costs(&l, &r, row, 8, &p.cost).unwrap();
            let raw = scanline_dp(&cv, p.occlusion_penalty, p.smoothness_penalty).unwrap();
            let filled: Vec<Option<u32>> = fill_occlusions(&raw).into_iter().map(|d| d.map(|d| d as u32)).collect();
            assert_eq!(map.disparity.row(row), &filled[..]);
        }
    }

    #[test]
    fn two_levels_recover_global_shift() {
        let (l, r) = shifted_pair(4, 11);
        let map = coarse_to_fine(&l, &r, &StereoParams::new(16, 2)).unwrap();
        let frac = interior_hits(&map, 4, 18);
        assert!(frac >= 0.95, "only {:.3} of interior pixels at disparity 4", frac);
    }

    #[test]
    fn textureless_pair_is_all_zero() {
        let flat = Grid::filled(33, 17, 90.0f64);
        let map = coarse_to_fine(&flat, &flat, &StereoParams::new(6, 2)).unwrap();
        assert!(map.disparity.data().iter().all(|d| *d == Some(0)));
    }

    #[test]
    fn odd_dims_are_padded() {
        let (l, r) = shifted_pair(2, 3);
        let crop = |g: &Grid<f64>| Grid::from_fn(61, 37, |r, c| *g.get(r, c));
        let map = coarse_to_fine(&crop(&l), &crop(&r), &StereoParams::new(8, 3)).unwrap();
        assert_eq!(map.disparity.dims(), (61, 37));
    }

    #[test]
    fn rejects_too_coarse_pyramid() {
        let (l, r) = shifted_pair(2, 3);
        assert!(coarse_to_fine(&l, &r, &StereoParams::new(40, 2)).is_err());
    }

    #[test]
    fn depth_from_disparity() {
        let disparity = Grid::from_vec(4, 1, vec![Some(50), Some(0), None, Some(100)]).unwrap();
        let d = DisparityMap { disparity, d_max: 100 };
        let z = disparity_to_depth(&d, 1000.0f64, 0.1).unwrap();
        assert_eq!(*z.get(0, 0), 2.0);
        assert!(z.get(0, 1).is_nan() && z.get(0, 2).is_nan());
        assert_eq!(*z.get(0, 3), 1.0);
        let zs: Vec<f64> = (1..50)
            .map(|v| {
                let m = DisparityMap {
                    disparity: Grid::filled(1, 1, Some(v)),
                    d_max: 64,
                };
                *disparity_to_depth(&m, 700.0f64, 0.1).unwrap().get(0, 0)
            })
            .collect();
        assert!(zs.windows(2).all(|p| p[1] < p[0]));
        assert!(disparity_to_depth(&d, 0.0f64, 0.1).is_err());
    }
}
