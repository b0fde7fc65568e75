use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::num::Real;
use crate::raster::Grid;

use super::mask::RegionMask;

/// Registered color image plus metric depth. Non-finite depth marks an invalid pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbdFrame<T> {
    rgb: Grid<[u8; 3]>,
    depth: Grid<T>,
    pub sequence_id: String,
    pub frame_index: usize,
    pub timestamp: f64,
}

impl<T: Real> RgbdFrame<T> {
    pub fn new(
        rgb: Grid<[u8; 3]>,
        depth: Grid<T>,
        sequence_id: impl Into<String>,
        frame_index: usize,
        timestamp: f64,
    ) -> Result<Self> {
        if rgb.dims() != depth.dims() {
            return contract(format!("rgb is {:?} but depth is {:?}", rgb.dims(), depth.dims()));
        }
        if rgb.width() == 0 || rgb.height() == 0 {
            return contract("frame must be non-empty");
        }
        if let Some(bad) = depth.data().iter().find(|d| d.is_finite() && **d <= T::zero()) {
            return contract(format!("finite depth must be positive, found {}", bad));
        }
        Ok(Self {
            rgb,
            depth,
            sequence_id: sequence_id.into(),
            frame_index,
            timestamp,
        })
    }

    pub fn width(&self) -> usize {
        self.rgb.width()
    }

    pub fn height(&self) -> usize {
        self.rgb.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.rgb.dims()
    }

    pub fn rgb(&self) -> &Grid<[u8; 3]> {
        &self.rgb
    }

    pub fn depth(&self) -> &Grid<T> {
        &self.depth
    }

    pub fn gray(&self) -> Grid<T> {
        luma(&self.rgb)
    }
}

/// Rec. 601 luma in `[0, 255]`.
pub fn luma<T: Real>(rgb: &Grid<[u8; 3]>) -> Grid<T> {
    let (wr, wg, wb) = (T::lit(0.299), T::lit(0.587), T::lit(0.114));
    rgb.map(|p| wr * T::lit(p[0] as f64) + wg * T::lit(p[1] as f64) + wb * T::lit(p[2] as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interaction {
    Sight,
    Touch,
}

impl Interaction {
    pub fn as_str(self) -> &'static str {
        match self {
            Interaction::Sight => "sight",
            Interaction::Touch => "touch",
        }
    }
}

impl std::fmt::Display for Interaction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Interaction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "sight" => Ok(Interaction::Sight),
            "touch" => Ok(Interaction::Touch),
            other => Err(format!("unknown interaction label {:?}", other)),
        }
    }
}

/// A ground-truth salient annotation. An annotation with no set pixels is
/// legal and overlaps nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub mask: Option<RegionMask>,
}

impl GroundTruth {
    pub fn empty() -> Self {
        Self { mask: None }
    }

    pub fn iou(&self, region: &RegionMask) -> Result<f64> {
        match &self.mask {
            Some(m) => super::mask::iou(m, region),
            None => Ok(0.0),
        }
    }
}

impl From<RegionMask> for GroundTruth {
    fn from(mask: RegionMask) -> Self {
        Self { mask: Some(mask) }
    }
}

/// Annotation, in the earlier frame, of the object that is salient
/// `horizon_s` seconds later.
#[derive(Debug, Clone, PartialEq)]
pub struct FutureTarget {
    pub later_index: usize,
    pub horizon_s: u32,
    pub mask: GroundTruth,
}

/// One frame together with all its annotations.
#[derive(Debug, Clone)]
pub struct FrameRecord<T> {
    pub frame: RgbdFrame<T>,
    pub gt: Option<GroundTruth>,
    pub interaction: Option<Interaction>,
    pub future: Vec<FutureTarget>,
}

impl<T> FrameRecord<T> {
    pub fn future_at(&self, horizon_s: u32) -> Option<&FutureTarget> {
        self.future.iter().find(|f| f.horizon_s == horizon_s)
    }
}
