use crate::error::{contract, Result};
use crate::num::Real;
use crate::raster::Grid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams<T> {
    /// Odd side length of the square aggregation window.
    pub window: usize,
    /// Per-pixel absolute differences are capped at this value.
    pub truncation: T,
}

impl<T: Real> Default for CostParams<T> {
    fn default() -> Self {
        Self {
            window: 5,
            truncation: T::lit(30.0),
        }
    }
}

impl<T: Real> CostParams<T> {
    /// Cost assigned when the matched right pixel falls outside the image.
    /// Exceeds any in-range window cost.
    pub fn out_of_range(&self, rows_in_window: usize) -> T {
        T::lit(2.0) * T::from_usize_lossy(self.window * rows_in_window) * self.truncation
    }

    fn check(&self) -> Result<()> {
        if self.window == 0 || self.window.is_multiple_of(2) {
            return contract(format!("window must be odd and >= 1, got {}", self.window));
        }
        if !(self.truncation > T::zero()) {
            return contract("truncation must be positive");
        }
        Ok(())
    }
}

/// Matching costs of one scanline, indexed by `(column, disparity)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostVolume<T> {
    width: usize,
    d_max: usize,
    costs: Vec<T>,
}

impl<T: Real> CostVolume<T> {
    pub fn from_fn(width: usize, d_max: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut costs = Vec::with_capacity(width * (d_max + 1));
        for c in 0..width {
            for d in 0..=d_max {
                let v = f(c, d);
                if !(v >= T::zero()) {
                    return contract(format!("cost at ({}, {}) must be >= 0", c, d));
                }
                costs.push(v);
            }
        }
        Ok(Self { width, d_max, costs })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    #[inline]
    pub fn cost(&self, col: usize, d: usize) -> T {
        self.costs[col * (self.d_max + 1) + d]
    }

    pub fn column(&self, col: usize) -> &[T] {
        &self.costs[col * (self.d_max + 1)..(col + 1) * (self.d_max + 1)]
    }

    /// Lowest-cost disparity per column, lowest disparity on ties.
    pub fn winner_take_all(&self) -> Vec<usize> {
        (0..self.width)
            .map(|c| {
                let col = self.column(c);
                let mut best = 0;
                for d in 1..col.len() {
                    if col[d] < col[best] {
                        best = d;
                    }
                }
                best
            })
            .collect()
    }
}

/// Window cost between left pixel `(row, col)` and right pixel `(row, col - d)`.
pub(crate) fn window_cost<T: Real>(
    left: &Grid<T>,
    right: &Grid<T>,
    row: usize,
    col: usize,
    d: usize,
    params: &CostParams<T>,
) -> T {
    let half = (params.window / 2) as isize;
    let rows = if left.height() == 1 { 1 } else { params.window };
    if d > col {
        return params.out_of_range(rows);
    }
    let mut sum = T::zero();
    let (r0, c0, d) = (row as isize, col as isize, d as isize);
    for dr in -half..=half {
        if left.height() == 1 && dr != 0 {
            continue;
        }
        for dc in -half..=half {
            let l = left.get_clamped(r0 + dr, c0 + dc);
            let r = right.get_clamped(r0 + dr, c0 + dc - d);
            sum += (l - r).abs().min(params.truncation);
        }
    }
    sum
}

/// Costs of one scanline with a square window; rows beyond the border are clamped.
pub fn scanline_costs<T: Real>(
    left: &Grid<T>,
    right: &Grid<T>,
    row: usize,
    d_max: usize,
    params: &CostParams<T>,
) -> Result<CostVolume<T>> {
    params.check()?;
    if left.dims() != right.dims() {
        return contract("stereo images must have equal dims");
    }
    if d_max >= left.width() {
        return contract(format!("d_max {} must be below width {}", d_max, left.width()));
    }
    CostVolume::from_fn(left.width(), d_max, |c, d| window_cost(left, right, row, c, d, params))
}

/// Costs of a single pair of rows (a one-row window of width `params.window`).
pub fn matching_cost<T: Real>(
    left_row: &[T],
    right_row: &[T],
    d_max: usize,
    params: &CostParams<T>,
) -> Result<CostVolume<T>> {
    if left_row.len() != right_row.len() {
        return contract("rows must have equal length");
    }
    let left = Grid::from_vec(left_row.len(), 1, left_row.to_vec())?;
    let right = Grid::from_vec(right_row.len(), 1, right_row.to_vec())?;
    scanline_costs(&left, &right, 0, d_max, params)
}
