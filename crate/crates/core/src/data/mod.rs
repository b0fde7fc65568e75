//! Core value types, dataset ingestion and synthetic scene generation.

mod frame;
mod io;
mod manifest;
mod mask;
pub mod synth;

pub use frame::{luma, FrameRecord, FutureTarget, GroundTruth, Interaction, RgbdFrame};
pub use io::{
    decode_depth, encode_depth, read_depth_png, read_gray_png, read_mask_png, read_rgb_png, write_depth_png,
    write_gray_png, write_mask_png, write_rgb_png, DEFAULT_DEPTH_SCALE,
};
pub use manifest::{load_dataset, DatasetManifest, FrameEntry, FutureLink, SequenceEntry, VALID_HORIZONS};
pub use mask::{iou, BBox, RegionMask};
