use crate::data::RegionMask;
use crate::error::{contract, Result};
use crate::num::Real;
use crate::raster::Grid;

use super::shape::Moments;

pub const DEPTH_DIM: usize = 46;

fn valid<T: Real>(d: T) -> bool {
    d.is_finite() && d > T::zero()
}

struct Cells<T> {
    sum: Vec<T>,
    count: Vec<usize>,
}

impl<T: Real> Cells<T> {
    fn new(n: usize) -> Self {
        Self {
            sum: vec![T::zero(); n],
            count: vec![0; n],
        }
    }

    fn add(&mut self, i: usize, d: T) {
        self.sum[i] += d;
        self.count[i] += 1;
    }

    fn means(&self) -> Vec<T> {
        self.sum
            .iter()
            .zip(&self.count)
            .map(|(&s, &n)| if n == 0 { T::zero() } else { s / T::from_usize_lossy(n) })
            .collect()
    }
}

/// Depth statistics of a region: `[min, mean, max, std]`, 3x3 bounding-box
/// cell means, 4x3 cell means in the major-axis frame, then both grids
/// divided by the region's maximum depth.
///
/// Returns `false` alongside 46 zeros when the region has no valid depth.
pub fn depth_features<T: Real>(region: &RegionMask, depth: &Grid<T>) -> Result<(Vec<T>, bool)> {
    if region.dims() != depth.dims() {
        return contract("region and depth map differ in size");
    }
    if region.area() == 0 {
        return contract("depth features of an empty region");
    }
    let samples: Vec<(usize, usize, T)> = region
        .pixels()
        .map(|(r, c)| (r, c, *depth.get(r, c)))
        .filter(|&(_, _, d)| valid(d))
        .collect();
    if samples.is_empty() {
        return Ok((vec![T::zero(); DEPTH_DIM], false));
    }

    let n = T::from_usize_lossy(samples.len());
    let (mut lo, mut hi, mut sum) = (T::infinity(), T::neg_infinity(), T::zero());
    for &(_, _, d) in &samples {
        lo = lo.min(d);
        hi = hi.max(d);
        sum += d;
    }
    let mean = sum / n;
    let var = samples.iter().map(|&(_, _, d)| (d - mean) * (d - mean)).sum::<T>() / n;

    let b = region.bbox();
    let mut grid = Cells::new(9);
    for &(r, c, d) in &samples {
        let gr = (r - b.top) * 3 / b.height();
        let gc = (c - b.left) * 3 / b.width();
        grid.add(gr * 3 + gc, d);
    }

    // Nearest-pixel coordinates in the frame rotated by -orientation.
    let m = Moments::of(region);
    let (sin, cos) = m.orientation().sin_cos();
    let rotated: Vec<(i64, i64)> = region
        .pixels()
        .map(|(r, c)| {
            let (dx, dy) = (c as f64 - m.cx, r as f64 - m.cy);
            (
                (cos * dx + sin * dy).round() as i64,
                (cos * dy - sin * dx).round() as i64,
            )
        })
        .collect();
    let (umin, umax) = rotated
        .iter()
        .fold((i64::MAX, i64::MIN), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (vmin, vmax) = rotated
        .iter()
        .fold((i64::MAX, i64::MIN), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let (uspan, vspan) = (umax - umin + 1, vmax - vmin + 1);
    let mut axis = Cells::new(12);
    for ((r, c), &(u, v)) in region.pixels().zip(&rotated) {
        let d = *depth.get(r, c);
        if valid(d) {
            let major = ((u - umin) * 4 / uspan) as usize;
            let minor = ((v - vmin) * 3 / vspan) as usize;
            axis.add(major * 3 + minor, d);
        }
    }

    let grid = grid.means();
    let axis = axis.means();
    let norm = |v: &[T]| -> Vec<T> {
        v.iter()
            .map(|&x| if hi > T::zero() { x / hi } else { T::zero() })
            .collect()
    };
    let mut out = Vec::with_capacity(DEPTH_DIM);
    out.extend([lo, mean, hi, var.sqrt()]);
    out.extend_from_slice(&grid);
    out.extend_from_slice(&axis);
    out.extend(norm(&grid));
    out.extend(norm(&axis));
    Ok((out, true))
}
