//! PNG encodings for depth rasters, masks, color and gray images.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma};

use crate::error::{contract, ingestion, Error, Result};
use crate::num::Real;
use crate::raster::Grid;

use super::mask::RegionMask;

/// Millimeter depth units.
pub const DEFAULT_DEPTH_SCALE: f64 = 0.001;

/// Converts a 16-bit raster to meters. Zero marks an invalid pixel (NaN).
pub fn decode_depth<T: Real>(raster: &DynamicImage, scale: f64) -> Result<Grid<T>> {
    if !(scale > 0.0 && scale.is_finite()) {
        return contract(format!("depth scale must be positive, got {}", scale));
    }
    let img = match raster {
        DynamicImage::ImageLuma16(img) => img,
        other => {
            return Err(Error::Format(format!(
                "depth raster must be 16-bit single channel, got {:?}",
                other.color()
            )))
        }
    };
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = img
        .as_raw()
        .iter()
        .map(|&v| if v == 0 { T::nan() } else { T::lit(v as f64 * scale) })
        .collect();
    Grid::from_vec(w, h, data)
}

/// Inverse of [`decode_depth`]: rounds to the nearest unit, saturating at
/// `u16::MAX`; invalid or non-positive depths encode as 0.
pub fn encode_depth<T: Real>(depth: &Grid<T>, scale: f64) -> Result<ImageBuffer<Luma<u16>, Vec<u16>>> {
    if !(scale > 0.0 && scale.is_finite()) {
        return contract(format!("depth scale must be positive, got {}", scale));
    }
    let raw: Vec<u16> = depth
        .data()
        .iter()
        .map(|d| {
            let v = d.as_f64();
            if !v.is_finite() || v <= 0.0 {
                0
            } else {
                (v / scale).round().clamp(1.0, u16::MAX as f64) as u16
            }
        })
        .collect();
    Ok(ImageBuffer::from_raw(depth.width() as u32, depth.height() as u32, raw).expect("buffer size"))
}

fn open(path: &Path) -> Result<DynamicImage> {
    if !path.exists() {
        return Err(ingestion(path, "file not found"));
    }
    image::open(path).map_err(|e| ingestion(path, e))
}

pub fn read_depth_png<T: Real>(path: &Path, scale: f64) -> Result<Grid<T>> {
    decode_depth(&open(path)?, scale).map_err(|e| match e {
        Error::Format(m) => ingestion(path, m),
        other => other,
    })
}

pub fn write_depth_png<T: Real>(path: &Path, depth: &Grid<T>, scale: f64) -> Result<()> {
    encode_depth(depth, scale)?.save(path)?;
    Ok(())
}

pub fn read_rgb_png(path: &Path) -> Result<Grid<[u8; 3]>> {
    let img = open(path)?.to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = img.pixels().map(|p| p.0).collect();
    Grid::from_vec(w, h, data)
}

pub fn write_rgb_png(path: &Path, rgb: &Grid<[u8; 3]>) -> Result<()> {
    let raw: Vec<u8> = rgb.data().iter().flatten().copied().collect();
    let img: ImageBuffer<image::Rgb<u8>, _> =
        ImageBuffer::from_raw(rgb.width() as u32, rgb.height() as u32, raw).expect("buffer size");
    img.save(path)?;
    Ok(())
}

/// Reads any image as 8-bit luminance.
pub fn read_gray_png(path: &Path) -> Result<Grid<u8>> {
    let img = open(path)?.to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Grid::from_vec(w, h, img.into_raw())
}

pub fn write_gray_png(path: &Path, gray: &Grid<u8>) -> Result<()> {
    let img: ImageBuffer<Luma<u8>, _> =
        ImageBuffer::from_raw(gray.width() as u32, gray.height() as u32, gray.data().to_vec()).expect("buffer size");
    img.save(path)?;
    Ok(())
}

/// Reads a binary mask; pixels at or above 128 are members. `None` when no
/// pixel is set.
pub fn read_mask_png(path: &Path) -> Result<Option<RegionMask>> {
    let gray = read_gray_png(path)?;
    Ok(RegionMask::from_predicate(gray.width(), gray.height(), |r, c| {
        *gray.get(r, c) >= 128
    }))
}

/// Writes a 1-bit grayscale PNG (set bits decode to 255).
pub fn write_mask_png(path: &Path, mask: &RegionMask) -> Result<()> {
    let (w, h) = mask.dims();
    let stride = w.div_ceil(8);
    let mut packed = vec![0u8; stride * h];
    for (r, c) in mask.pixels() {
        packed[r * stride + c / 8] |= 0x80 >> (c % 8);
    }
    let file = BufWriter::new(File::create(path)?);
    let mut enc = png::Encoder::new(file, w as u32, h as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::One);
    let mut writer = enc.write_header().map_err(|e| Error::Format(e.to_string()))?;
    writer
        .write_image_data(&packed)
        .map_err(|e| Error::Format(e.to_string()))?;
    writer.finish().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}
