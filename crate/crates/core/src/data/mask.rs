use crate::error::{contract, Result};

/// Inclusive pixel bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BBox {
    pub top: usize,
    pub left: usize,
    pub bottom: usize,
    pub right: usize,
}

impl BBox {
    pub fn width(&self) -> usize {
        self.right - self.left + 1
    }

    pub fn height(&self) -> usize {
        self.bottom - self.top + 1
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }
}

/// A non-empty set of pixels of a `width x height` frame.
///
/// Pixels are kept as sorted, de-duplicated row-major linear indices, so the
/// value is independent of the order the pixels were supplied in.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    width: usize,
    height: usize,
    pixels: Vec<u32>,
    bbox: BBox,
    centroid: (f64, f64),
}

impl RegionMask {
    /// Builds a mask from `(row, col)` pairs in any order; duplicates are dropped.
    pub fn from_pixels(width: usize, height: usize, pixels: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut linear = Vec::new();
        for (r, c) in pixels {
            if r >= height || c >= width {
                return contract(format!("pixel ({}, {}) outside {}x{} frame", r, c, width, height));
            }
            linear.push((r * width + c) as u32);
        }
        Self::from_indices(width, height, linear)
    }

    pub fn from_indices(width: usize, height: usize, mut pixels: Vec<u32>) -> Result<Self> {
        pixels.sort_unstable();
        pixels.dedup();
        if pixels.is_empty() {
            return contract("region must contain at least one pixel");
        }
        if *pixels.last().unwrap() as usize >= width * height {
            return contract("pixel index outside frame");
        }
        let mut bbox = BBox {
            top: usize::MAX,
            left: usize::MAX,
            bottom: 0,
            right: 0,
        };
        let (mut sr, mut sc) = (0.0f64, 0.0f64);
        for &p in &pixels {
            let (r, c) = (p as usize / width, p as usize % width);
            bbox.top = bbox.top.min(r);
            bbox.bottom = bbox.bottom.max(r);
            bbox.left = bbox.left.min(c);
            bbox.right = bbox.right.max(c);
            sr += r as f64;
            sc += c as f64;
        }
        let n = pixels.len() as f64;
        Ok(Self {
            width,
            height,
            pixels,
            bbox,
            centroid: (sr / n, sc / n),
        })
    }

    /// Collects every pixel for which `inside(row, col)` holds; `None` if there is none.
    pub fn from_predicate(width: usize, height: usize, mut inside: impl FnMut(usize, usize) -> bool) -> Option<Self> {
        let mut pixels = Vec::new();
        for r in 0..height {
            for c in 0..width {
                if inside(r, c) {
                    pixels.push((r * width + c) as u32);
                }
            }
        }
        Self::from_indices(width, height, pixels).ok()
    }

    /// Axis-aligned rectangle with inclusive corners.
    pub fn rect(width: usize, height: usize, top: usize, left: usize, bottom: usize, right: usize) -> Result<Self> {
        if top > bottom || left > right {
            return contract("rectangle corners out of order");
        }
        Self::from_pixels(
            width,
            height,
            (top..=bottom).flat_map(|r| (left..=right).map(move |c| (r, c))),
        )
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    /// Mean `(row, col)` of the member pixels.
    pub fn centroid(&self) -> (f64, f64) {
        self.centroid
    }

    pub fn indices(&self) -> &[u32] {
        &self.pixels
    }

    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.pixels.iter().map(move |&p| (p as usize / w, p as usize % w))
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        row < self.height && col < self.width && self.pixels.binary_search(&((row * self.width + col) as u32)).is_ok()
    }

    /// Membership test tolerant of out-of-frame coordinates.
    pub fn contains_signed(&self, row: isize, col: isize) -> bool {
        row >= 0 && col >= 0 && self.contains(row as usize, col as usize)
    }

    pub fn intersection_count(&self, other: &RegionMask) -> usize {
        let (a, b) = (&self.pixels, &other.pixels);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    /// Shifts every pixel by `(drow, dcol)`; fails if any pixel leaves the frame.
    pub fn translated(&self, drow: isize, dcol: isize) -> Result<Self> {
        let mut out = Vec::with_capacity(self.pixels.len());
        for (r, c) in self.pixels() {
            let (nr, nc) = (r as isize + drow, c as isize + dcol);
            if nr < 0 || nc < 0 || nr as usize >= self.height || nc as usize >= self.width {
                return contract("translated region leaves the frame");
            }
            out.push((nr as usize, nc as usize));
        }
        Self::from_pixels(self.width, self.height, out)
    }

    /// Dense boolean raster of the frame.
    pub fn to_bitmap(&self) -> Vec<bool> {
        let mut bits = vec![false; self.width * self.height];
        for &p in &self.pixels {
            bits[p as usize] = true;
        }
        bits
    }
}

/// Intersection over union of two masks of the same frame.
pub fn iou(a: &RegionMask, b: &RegionMask) -> Result<f64> {
    if a.dims() != b.dims() {
        return contract(format!(
            "iou of masks with different frame dims {:?} vs {:?}",
            a.dims(),
            b.dims()
        ));
    }
    let inter = a.intersection_count(b);
    let union = a.area() + b.area() - inter;
    Ok(inter as f64 / union as f64)
}
