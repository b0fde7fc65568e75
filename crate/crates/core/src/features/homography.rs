use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::raster::Grid;

/// Planar projective map normalized so the bottom-right entry is 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: Matrix3<f64>,
}

impl Homography {
    pub fn identity() -> Self {
        Self { m: Matrix3::identity() }
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        Self {
            m: Matrix3::new(1.0, 0.0, dx, 0.0, 1.0, dy, 0.0, 0.0, 1.0),
        }
    }

    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        let s = m[(2, 2)];
        if !s.is_finite() || s.abs() < 1e-12 {
            return Err(Error::Estimation("homography has a vanishing scale entry".into()));
        }
        let m = m / s;
        if m.iter().any(|v| !v.is_finite()) || m.determinant().abs() <= 1e-9 {
            return Err(Error::Estimation("homography is not invertible".into()));
        }
        Ok(Self { m })
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    /// Maps `(x, y)`; fails when the point lands at infinity.
    pub fn apply(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let p = self.m * Vector3::new(x, y, 1.0);
        if p[2].abs() < 1e-12 {
            return Err(Error::Estimation(format!("({}, {}) maps to infinity", x, y)));
        }
        Ok((p[0] / p[2], p[1] / p[2]))
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self
            .m
            .try_inverse()
            .ok_or_else(|| Error::Estimation("homography is not invertible".into()))?;
        Self::from_matrix(inv)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Homography) -> Result<Self> {
        Self::from_matrix(next.m * self.m)
    }

    fn error(&self, c: &Correspondence) -> f64 {
        match self.apply(c.x1, c.y1) {
            Ok((u, v)) => ((u - c.x2).powi(2) + (v - c.y2).powi(2)).sqrt(),
            Err(_) => f64::INFINITY,
        }
    }
}

/// Point `(x1, y1)` in the source image seen at `(x2, y2)` in the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Correspondence {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl From<[f64; 4]> for Correspondence {
    fn from(v: [f64; 4]) -> Self {
        Self {
            x1: v[0],
            y1: v[1],
            x2: v[2],
            y2: v[3],
        }
    }
}

impl From<Correspondence> for [f64; 4] {
    fn from(c: Correspondence) -> Self {
        [c.x1, c.y1, c.x2, c.y2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RansacParams {
    pub threshold_px: f64,
    pub iters: usize,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self {
            threshold_px: 3.0,
            iters: 1000,
            seed: 0,
        }
    }
}

fn normalizer(pts: impl Iterator<Item = (f64, f64)> + Clone) -> Option<Matrix3<f64>> {
    let n = pts.clone().count() as f64;
    let (sx, sy) = pts.clone().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (cx, cy) = (sx / n, sy / n);
    let spread = pts
        .map(|p| ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt())
        .sum::<f64>()
        / n;
    if spread < 1e-12 {
        return None;
    }
    let s = std::f64::consts::SQRT_2 / spread;
    Some(Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0))
}

fn collinear(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> bool {
    let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    let scale = ((b.0 - a.0).hypot(b.1 - a.1) * (c.0 - a.0).hypot(c.1 - a.1)).max(1e-12);
    cross.abs() / scale < 1e-9
}

fn all_collinear(pts: &[(f64, f64)]) -> bool {
    let Some(&a) = pts.first() else { return true };
    let Some(&b) = pts.iter().find(|p| (p.0 - a.0).hypot(p.1 - a.1) > 1e-9) else {
        return true;
    };
    pts.iter().all(|&c| collinear(a, b, c))
}

fn minimal_degenerate(set: &[Correspondence]) -> bool {
    let src: Vec<(f64, f64)> = set.iter().map(|c| (c.x1, c.y1)).collect();
    let dst: Vec<(f64, f64)> = set.iter().map(|c| (c.x2, c.y2)).collect();
    [&src, &dst].iter().any(|p| {
        (0..4).any(|skip| {
            let t: Vec<_> = (0..4).filter(|&i| i != skip).map(|i| p[i]).collect();
            collinear(t[0], t[1], t[2])
        })
    })
}

/// Direct linear transform on Hartley-normalized coordinates.
fn dlt(set: &[Correspondence]) -> Result<Homography> {
    let degenerate = || Error::Estimation("degenerate point configuration".into());
    let t1 = normalizer(set.iter().map(|c| (c.x1, c.y1))).ok_or_else(degenerate)?;
    let t2 = normalizer(set.iter().map(|c| (c.x2, c.y2))).ok_or_else(degenerate)?;
    // Zero rows keep the system at least 9x9 so the null vector is exposed.
    let rows = (2 * set.len()).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (k, c) in set.iter().enumerate() {
        let p = t1 * Vector3::new(c.x1, c.y1, 1.0);
        let q = t2 * Vector3::new(c.x2, c.y2, 1.0);
        let (x, y, u, v) = (p[0], p[1], q[0], q[1]);
        let r0 = [-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u];
        let r1 = [0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v];
        for j in 0..9 {
            a[(2 * k, j)] = r0[j];
            a[(2 * k + 1, j)] = r1[j];
        }
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.ok_or_else(degenerate)?;
    let smallest = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or_else(degenerate)?;
    let h = vt.row(smallest);
    let hn = Matrix3::from_row_slice(&[h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]]);
    let t2_inv = t2.try_inverse().ok_or_else(degenerate)?;
    Homography::from_matrix(t2_inv * hn * t1)
}

fn inliers(h: &Homography, pairs: &[Correspondence], threshold: f64) -> Vec<usize> {
    (0..pairs.len()).filter(|&i| h.error(&pairs[i]) <= threshold).collect()
}

/// Robust fit: RANSAC over minimal 4-point samples, then a DLT refit on the
/// consensus set. Returns the map and the indices of its inliers.
pub fn ransac_homography(pairs: &[Correspondence], params: &RansacParams) -> Result<(Homography, Vec<usize>)> {
    if pairs.len() < 4 {
        return Err(Error::Estimation(format!(
            "{} correspondences, need at least 4",
            pairs.len()
        )));
    }
    let src: Vec<(f64, f64)> = pairs.iter().map(|c| (c.x1, c.y1)).collect();
    let dst: Vec<(f64, f64)> = pairs.iter().map(|c| (c.x2, c.y2)).collect();
    if all_collinear(&src) || all_collinear(&dst) {
        return Err(Error::Estimation("all points are collinear".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<(Homography, Vec<usize>)> = None;
    let mut budget = params.iters.max(1);
    let mut iter = 0;
    while iter < budget {
        iter += 1;
        let idx = sample(&mut rng, pairs.len(), 4);
        let set: Vec<Correspondence> = idx.iter().map(|i| pairs[i]).collect();
        if minimal_degenerate(&set) {
            continue;
        }
        let Ok(h) = dlt(&set) else { continue };
        let inl = inliers(&h, pairs, params.threshold_px);
        if best.as_ref().is_none_or(|b| inl.len() > b.1.len()) {
            let w = inl.len() as f64 / pairs.len() as f64;
            let needed = if w >= 1.0 {
                1.0
            } else {
                (0.01f64).ln() / (1.0 - w.powi(4)).ln()
            };
            if needed.is_finite() {
                budget = budget.min(needed.ceil().max(1.0) as usize);
            }
            best = Some((h, inl));
        }
    }

    let (h, inl) = best.ok_or_else(|| Error::Estimation("no non-degenerate sample found".into()))?;
    if inl.len() < 4 {
        return Err(Error::Estimation(format!("only {} inliers", inl.len())));
    }
    let consensus: Vec<Correspondence> = inl.iter().map(|&i| pairs[i]).collect();
    if let Ok(refit) = dlt(&consensus) {
        let refit_inl = inliers(&refit, pairs, params.threshold_px);
        if refit_inl.len() >= inl.len() {
            return Ok((refit, refit_inl));
        }
    }
    Ok((h, inl))
}

pub fn estimate_homography(pairs: &[Correspondence], params: &RansacParams) -> Result<Homography> {
    ransac_homography(pairs, params).map(|(h, _)| h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockMatchParams {
    pub block: usize,
    pub step: usize,
    pub radius: usize,
    /// Blocks whose intensity standard deviation falls below this are skipped.
    pub min_std: f64,
}

impl Default for BlockMatchParams {
    fn default() -> Self {
        Self {
            block: 8,
            step: 8,
            radius: 12,
            min_std: 2.0,
        }
    }
}

/// Tracks a grid of textured blocks from `src` into `dst` by exhaustive
/// mean-absolute-difference search, returning block-center correspondences.
pub fn block_correspondences<T: Real>(src: &Grid<T>, dst: &Grid<T>, params: &BlockMatchParams) -> Vec<Correspondence> {
    let (w, h) = src.dims();
    let b = params.block;
    if b == 0 || w < b || h < b || dst.dims() != src.dims() {
        return Vec::new();
    }
    let step = params.step.max(1);
    let rad = params.radius as isize;
    let mut out = Vec::new();
    for top in (0..=h - b).step_by(step) {
        for left in (0..=w - b).step_by(step) {
            let patch: Vec<f64> = (0..b * b)
                .map(|i| src.get(top + i / b, left + i % b).as_f64())
                .collect();
            let mean = patch.iter().sum::<f64>() / patch.len() as f64;
            let std = (patch.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / patch.len() as f64).sqrt();
            if std < params.min_std {
                continue;
            }
            let mut best: Option<(f64, isize, isize)> = None;
            for dy in -rad..=rad {
                for dx in -rad..=rad {
                    let (t, l) = (top as isize + dy, left as isize + dx);
                    if t < 0 || l < 0 || t as usize + b > h || l as usize + b > w {
                        continue;
                    }
                    let mut sad = 0.0;
                    for i in 0..b * b {
                        sad += (dst.get(t as usize + i / b, l as usize + i % b).as_f64() - patch[i]).abs();
                    }
                    let better = match best {
                        None => true,
                        Some((s, by, bx)) => {
                            sad < s - 1e-12 || ((sad - s).abs() <= 1e-12 && dy * dy + dx * dx < by * by + bx * bx)
                        }
                    };
                    if better {
                        best = Some((sad, dy, dx));
                    }
                }
            }
            if let Some((_, dy, dx)) = best {
                let (cx, cy) = (
                    left as f64 + (b as f64 - 1.0) / 2.0,
                    top as f64 + (b as f64 - 1.0) / 2.0,
                );
                out.push(Correspondence {
                    x1: cx,
                    y1: cy,
                    x2: cx + dx as f64,
                    y2: cy + dy as f64,
                });
            }
        }
    }
    out
}
