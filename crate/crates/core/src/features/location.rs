use crate::data::RegionMask;
use crate::num::Real;

use super::shape::{crack_perimeter, diagonal};

pub const LOCATION_DIM: usize = 16;
pub const SIZE_DIM: usize = 4;

/// Normalized bounding box and centroid, then centroid offsets to the image
/// center and the top, bottom, left and right border midpoints.
///
/// Pixel `(r, c)` occupies `[c, c + 1) x [r, r + 1)`, so its center is at
/// `((c + 0.5) / W, (r + 0.5) / H)` and a full-frame box spans `(0, 0, 1, 1)`.
pub fn location_features<T: Real>(region: &RegionMask) -> Vec<T> {
    let (w, h) = region.dims();
    let (w, h) = (w as f64, h as f64);
    let b = region.bbox();
    let (cy, cx) = region.centroid();
    let (x, y) = ((cx + 0.5) / w, (cy + 0.5) / h);
    let mut out = vec![
        b.left as f64 / w,
        b.top as f64 / h,
        (b.right + 1) as f64 / w,
        (b.bottom + 1) as f64 / h,
        x,
        y,
    ];
    for (px, py) in [(0.5, 0.5), (0.5, 0.0), (0.5, 1.0), (0.0, 0.5), (1.0, 0.5)] {
        out.push(x - px);
        out.push(y - py);
    }
    out.into_iter().map(T::lit).collect()
}

/// `[area / (W H), perimeter / diagonal, bbox area / (W H), bbox width / bbox height]`.
pub fn size_features<T: Real>(region: &RegionMask) -> Vec<T> {
    let (w, h) = region.dims();
    let frame = (w * h) as f64;
    let b = region.bbox();
    vec![
        T::lit(region.area() as f64 / frame),
        T::lit(crack_perimeter(region) as f64 / diagonal(region)),
        T::lit(b.area() as f64 / frame),
        T::lit(b.width() as f64 / b.height() as f64),
    ]
}
