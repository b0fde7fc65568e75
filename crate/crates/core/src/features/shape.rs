use crate::data::RegionMask;
use crate::error::{contract, Result};
use crate::num::Real;
use crate::proposals::{ucm_bounds, ContourMap, MergeTree};

pub const SHAPE_DIM: usize = 11;

/// Second central moments of a region, with `x` = column and `y` = row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub cx: f64,
    pub cy: f64,
    pub mu20: f64,
    pub mu02: f64,
    pub mu11: f64,
}

impl Moments {
    pub fn of(region: &RegionMask) -> Self {
        let (cy, cx) = region.centroid();
        let (mut mu20, mut mu02, mut mu11) = (0.0, 0.0, 0.0);
        for (r, c) in region.pixels() {
            let (dx, dy) = (c as f64 - cx, r as f64 - cy);
            mu20 += dx * dx;
            mu02 += dy * dy;
            mu11 += dx * dy;
        }
        let n = region.area() as f64;
        Self {
            cx,
            cy,
            mu20: mu20 / n,
            mu02: mu02 / n,
            mu11: mu11 / n,
        }
    }

    /// Covariance eigenvalues, largest first.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.mu20 + self.mu02);
        let half = (0.25 * (self.mu20 - self.mu02).powi(2) + self.mu11 * self.mu11).sqrt();
        (mean + half, (mean - half).max(0.0))
    }

    /// Angle of the major axis from the `x` axis, in `(-pi/2, pi/2]`.
    pub fn orientation(&self) -> f64 {
        0.5 * (2.0 * self.mu11).atan2(self.mu20 - self.mu02)
    }

    pub fn eccentricity(&self) -> f64 {
        let (l1, l2) = self.eigenvalues();
        if l1 <= 0.0 {
            0.0
        } else {
            (1.0 - l2 / l1).max(0.0).sqrt()
        }
    }
}

/// Number of pixel edges between the region and its complement, counting
/// the image border as outside.
pub(crate) fn crack_perimeter(region: &RegionMask) -> usize {
    region
        .pixels()
        .map(|(r, c)| {
            let (r, c) = (r as isize, c as isize);
            [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
                .iter()
                .filter(|&&(rr, cc)| !region.contains_signed(rr, cc))
                .count()
        })
        .sum()
}

pub(crate) fn diagonal(region: &RegionMask) -> f64 {
    let (w, h) = region.dims();
    ((w * w + h * h) as f64).sqrt()
}

pub fn shape_features<T: Real>(region: &RegionMask, contour: &ContourMap<T>, tree: &MergeTree<T>) -> Result<Vec<T>> {
    let bounds = ucm_bounds(region, tree)?;
    shape_features_with_bounds(region, contour, bounds)
}

/// Shape block given the region's merge-tree `(appear, disappear)` thresholds.
pub fn shape_features_with_bounds<T: Real>(
    region: &RegionMask,
    contour: &ContourMap<T>,
    ucm: (T, T),
) -> Result<Vec<T>> {
    if region.area() == 0 {
        return contract("shape features of an empty region");
    }
    if region.dims() != contour.strength.dims() {
        return contract("region and contour map differ in size");
    }
    let area = region.area() as f64;
    let diag = diagonal(region);
    let m = Moments::of(region);
    let (l1, l2) = m.eigenvalues();

    let (mut sum, mut count) = (T::zero(), 0usize);
    for (r, c) in region.pixels() {
        let (ri, ci) = (r as isize, c as isize);
        let boundary = [(ri - 1, ci), (ri + 1, ci), (ri, ci - 1), (ri, ci + 1)]
            .iter()
            .any(|&(rr, cc)| !region.contains_signed(rr, cc));
        if boundary {
            sum += *contour.strength.get(r, c);
            count += 1;
        }
    }

    Ok(vec![
        T::lit(crack_perimeter(region) as f64 / area.sqrt()),
        T::lit(area / region.bbox().area() as f64),
        T::lit(4.0 * l1.sqrt() / diag),
        T::lit(4.0 * l2.sqrt() / diag),
        sum,
        sum / T::from_usize_lossy(count.max(1)),
        ucm.0,
        ucm.1,
        T::lit(m.eccentricity()),
        T::lit(m.orientation()),
        T::lit((4.0 * area / std::f64::consts::PI).sqrt() / diag),
    ])
}
