//! `dataset.json` ingestion and validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{ingestion, Error, Result};
use crate::num::Real;

use super::frame::{FrameRecord, FutureTarget, GroundTruth, Interaction, RgbdFrame};
use super::io::{read_depth_png, read_mask_png, read_rgb_png, DEFAULT_DEPTH_SCALE};

/// Allowed future-pair horizons, in seconds.
pub const VALID_HORIZONS: [u32; 3] = [2, 4, 6];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FutureLink {
    pub later_index: usize,
    pub horizon_s: u32,
    /// Annotation of the future object in this (earlier) frame.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub index: usize,
    pub rgb: PathBuf,
    pub depth: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_mask: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction: Option<Interaction>,
    #[serde(default, skip_serializing_if = "Vec::is_empty", with = "one_or_many")]
    pub future: Vec<FutureLink>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceEntry {
    pub id: String,
    pub frames: Vec<FrameEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ManifestDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    depth_scale: Option<f64>,
    sequences: Vec<SequenceEntry>,
}

/// A validated dataset. Relative paths resolve against the manifest's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    root: PathBuf,
    depth_scale: Option<f64>,
    pub sequences: Vec<SequenceEntry>,
}

mod one_or_many {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::FutureLink;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        One(FutureLink),
        Many(Vec<FutureLink>),
    }

    pub fn serialize<S: Serializer>(v: &[FutureLink], s: S) -> Result<S::Ok, S::Error> {
        match v {
            [one] => one.serialize(s),
            many => many.serialize(s),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<FutureLink>, D::Error> {
        Ok(match Repr::deserialize(d)? {
            Repr::One(one) => vec![one],
            Repr::Many(many) => many,
        })
    }
}

pub fn load_dataset(manifest_path: &Path) -> Result<DatasetManifest> {
    DatasetManifest::load(manifest_path)
}

fn field_err(location: String, reason: impl Into<String>) -> Error {
    Error::Parse {
        location,
        reason: reason.into(),
    }
}

impl DatasetManifest {
    pub fn new(root: impl Into<PathBuf>, sequences: Vec<SequenceEntry>) -> Self {
        Self {
            root: root.into(),
            depth_scale: None,
            sequences,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ingestion(path, e))?;
        let doc: ManifestDoc = serde_json::from_str(&text).map_err(|e| Error::Parse {
            location: format!("{}:{}:{}", path.display(), e.line(), e.column()),
            reason: e.to_string(),
        })?;
        let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let manifest = Self {
            root,
            depth_scale: doc.depth_scale,
            sequences: doc.sequences,
        };
        manifest.validate()?;
        Ok(manifest)
    }

    /// Checks ordering, link and horizon rules, and that every referenced file exists.
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.depth_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(field_err("depth_scale".into(), "must be positive"));
            }
        }
        let mut seen_ids = std::collections::HashSet::new();
        for (si, seq) in self.sequences.iter().enumerate() {
            if !seen_ids.insert(seq.id.as_str()) {
                return Err(field_err(
                    format!("sequences[{}].id", si),
                    format!("duplicate sequence id {:?}", seq.id),
                ));
            }
            for (fi, fr) in seq.frames.iter().enumerate() {
                let at = format!("sequences[{}].frames[{}]", si, fi);
                if fi > 0 && seq.frames[fi - 1].index >= fr.index {
                    return Err(field_err(
                        format!("{}.index", at),
                        "frame entries must be strictly ordered by index",
                    ));
                }
                for link in &fr.future {
                    if !VALID_HORIZONS.contains(&link.horizon_s) {
                        return Err(field_err(
                            format!("{}.future.horizon_s", at),
                            "horizon must be 2, 4, or 6",
                        ));
                    }
                    if link.later_index <= fr.index || !seq.frames.iter().any(|f| f.index == link.later_index) {
                        return Err(field_err(
                            format!("{}.future.later_index", at),
                            format!("no later frame with index {}", link.later_index),
                        ));
                    }
                }
                let mut paths = vec![&fr.rgb, &fr.depth];
                paths.extend(fr.gt_mask.iter());
                paths.extend(fr.future.iter().filter_map(|l| l.mask.as_ref()));
                for p in paths {
                    let full = self.resolve(p);
                    if !full.is_file() {
                        return Err(ingestion(full, "referenced file does not exist"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn depth_scale(&self) -> f64 {
        self.depth_scale.unwrap_or(DEFAULT_DEPTH_SCALE)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root.join(p)
        }
    }

    pub fn sequence(&self, id: &str) -> Option<&SequenceEntry> {
        self.sequences.iter().find(|s| s.id == id)
    }

    pub fn to_json(&self) -> String {
        let doc = ManifestDoc {
            depth_scale: self.depth_scale,
            sequences: self.sequences.clone(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Reads every raster of one frame entry.
    pub fn load_frame<T: Real>(&self, seq: &SequenceEntry, entry: &FrameEntry) -> Result<FrameRecord<T>> {
        let rgb = read_rgb_png(&self.resolve(&entry.rgb))?;
        let depth = read_depth_png(&self.resolve(&entry.depth), self.depth_scale())?;
        let frame = RgbdFrame::new(
            rgb,
            depth,
            seq.id.clone(),
            entry.index,
            entry.timestamp.unwrap_or(entry.index as f64),
        )
        .map_err(|e| ingestion(self.resolve(&entry.rgb), e))?;
        let dims = frame.dims();
        let read_gt = |p: &Path| -> Result<GroundTruth> {
            let full = self.resolve(p);
            let mask = read_mask_png(&full)?;
            if let Some(m) = &mask {
                if m.dims() != dims {
                    return Err(ingestion(full, "mask dims differ from frame"));
                }
            }
            Ok(GroundTruth { mask })
        };
        let gt = entry.gt_mask.as_deref().map(read_gt).transpose()?;
        let mut future = Vec::new();
        for link in &entry.future {
            if let Some(p) = &link.mask {
                future.push(FutureTarget {
                    later_index: link.later_index,
                    horizon_s: link.horizon_s,
                    mask: read_gt(p)?,
                });
            }
        }
        Ok(FrameRecord {
            frame,
            gt,
            interaction: entry.interaction,
            future,
        })
    }
}
