use crate::data::luma;
use crate::num::Real;
use crate::raster::Grid;

/// Per-pixel boundary strength in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourMap<T> {
    pub strength: Grid<T>,
}

impl<T: Real> ContourMap<T> {
    /// Interprets an 8-bit raster with 255 as strength 1.
    pub fn from_gray8(gray: &Grid<u8>) -> Self {
        let scale = T::lit(255.0);
        Self {
            strength: gray.map(|v| T::lit(*v as f64) / scale),
        }
    }
}

/// Sobel gradient magnitude of the luma image, divided by its maximum.
/// A constant image yields an all-zero map.
pub fn contour_strength<T: Real>(rgb: &Grid<[u8; 3]>) -> ContourMap<T> {
    let gray: Grid<T> = luma(rgb);
    let two = T::lit(2.0);
    let mut mag = Grid::from_fn(gray.width(), gray.height(), |r, c| {
        let (r, c) = (r as isize, c as isize);
        let p = |dr: isize, dc: isize| gray.get_clamped(r + dr, c + dc);
        let gx = (p(-1, 1) + two * p(0, 1) + p(1, 1)) - (p(-1, -1) + two * p(0, -1) + p(1, -1));
        let gy = (p(1, -1) + two * p(1, 0) + p(1, 1)) - (p(-1, -1) + two * p(-1, 0) + p(-1, 1));
        (gx * gx + gy * gy).sqrt()
    });
    let max = mag.data().iter().copied().fold(T::zero(), T::max);
    // Luma of integer colors carries rounding noise well below one gray level.
    if max > T::lit(1e-6) {
        for v in mag.data_mut() {
            *v /= max;
        }
    } else {
        mag.data_mut().iter_mut().for_each(|v| *v = T::zero());
    }
    ContourMap { strength: mag }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_has_no_contours() {
        let m: ContourMap<f64> = contour_strength(&Grid::filled(7, 5, [33, 66, 99]));
        assert!(m.strength.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn vertical_step_peaks_on_edge_band() {
        let rgb = Grid::from_fn(10, 6, |_, c| if c < 5 { [0, 0, 0] } else { [255, 255, 255] });
        let m: ContourMap<f64> = contour_strength(&rgb);
        for r in 0..6 {
            assert_eq!(*m.strength.get(r, 4), 1.0);
            assert_eq!(*m.strength.get(r, 5), 1.0);
            assert_eq!(*m.strength.get(r, 0), 0.0);
            assert_eq!(*m.strength.get(r, 9), 0.0);
        }
    }

    #[test]
    fn random_image_is_normalized() {
        let mut x = 17u32;
        let rgb = Grid::from_fn(16, 16, |_, _| {
            x = x.wrapping_mul(1_103_515_245).wrapping_add(12345);
            [(x >> 16) as u8, (x >> 8) as u8, x as u8]
        });
        let m: ContourMap<f32> = contour_strength(&rgb);
        assert!(m.strength.data().iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(m.strength.data().contains(&1.0));
    }
}
