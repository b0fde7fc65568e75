//! Deterministic synthetic RGBD scenes and panning-camera datasets.
//!
//! A generated dataset mimics head-mounted footage: the camera pans along a
//! strip of "target" objects at roughly eye level, the target nearest the
//! view center is the salient one, and distractors are either far away near
//! the center or within reach at the periphery.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::raster::Grid;

use super::frame::{FrameRecord, FutureTarget, GroundTruth, Interaction, RgbdFrame};
use super::io::{write_depth_png, write_mask_png, write_rgb_png, DEFAULT_DEPTH_SCALE};
use super::manifest::{DatasetManifest, FrameEntry, FutureLink, SequenceEntry, VALID_HORIZONS};
use super::mask::RegionMask;

/// Objects closer than this are labeled `touch` by the generators.
pub const TOUCH_DEPTH_M: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Rect,
    Ellipse,
}

/// An object occupying the box `[top, top+height) x [left, left+width)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectSpec {
    pub shape: ShapeKind,
    pub top: i64,
    pub left: i64,
    pub height: usize,
    pub width: usize,
    pub depth: f64,
    pub color: [u8; 3],
}

impl ObjectSpec {
    pub fn contains(&self, row: i64, col: i64) -> bool {
        let (h, w) = (self.height as i64, self.width as i64);
        if row < self.top || row >= self.top + h || col < self.left || col >= self.left + w {
            return false;
        }
        match self.shape {
            ShapeKind::Rect => true,
            ShapeKind::Ellipse => {
                let ry = self.height as f64 / 2.0;
                let rx = self.width as f64 / 2.0;
                let dy = (row - self.top) as f64 + 0.5 - ry;
                let dx = (col - self.left) as f64 + 0.5 - rx;
                (dy / ry).powi(2) + (dx / rx).powi(2) <= 1.0
            }
        }
    }

    /// Center of the object's box in pixel-index coordinates (the mean of
    /// its pixel coordinates for either shape).
    pub fn center(&self) -> (f64, f64) {
        (
            self.top as f64 + (self.height as f64 - 1.0) / 2.0,
            self.left as f64 + (self.width as f64 - 1.0) / 2.0,
        )
    }

    fn shifted(&self, dcol: i64) -> Self {
        Self {
            left: self.left - dcol,
            ..self.clone()
        }
    }

    fn inside_frame(&self, width: usize, height: usize) -> bool {
        self.top >= 0
            && self.left >= 0
            && self.top + self.height as i64 <= height as i64
            && self.left + self.width as i64 <= width as i64
    }
}

/// Single-frame scene description.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub background_depth: f64,
    pub background_color: [u8; 3],
    /// Amplitude of the static background texture, in gray levels.
    pub texture: f64,
    /// Amplitude of per-pixel color noise, in gray levels.
    pub rgb_noise: f64,
    /// Relative background depth noise.
    pub depth_noise: f64,
    pub salient: ObjectSpec,
    pub distractors: Vec<ObjectSpec>,
}

impl SceneSpec {
    /// A plain scene with one salient object and no distractors.
    pub fn single(width: usize, height: usize, salient: ObjectSpec) -> Self {
        Self {
            width,
            height,
            background_depth: 3.0,
            background_color: [110, 110, 110],
            texture: 20.0,
            rgb_noise: 4.0,
            depth_noise: 0.01,
            salient,
            distractors: Vec::new(),
        }
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Static texture value in `[-1, 1]` anchored to world coordinates.
fn texture_at(seed: u64, row: i64, col: i64) -> f64 {
    let h = splitmix(seed ^ splitmix((row.div_euclid(3) as u64) << 32 ^ col.div_euclid(3) as u64));
    (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

struct Background {
    seed: u64,
    color: [u8; 3],
    texture: f64,
    /// Depth at the top and bottom rows; linearly interpolated in between.
    depth_top: f64,
    depth_bottom: f64,
}

struct Rendered<T> {
    rgb: Grid<[u8; 3]>,
    depth: Grid<T>,
    owner: Grid<Option<usize>>,
}

/// Draws `objects` (later ones on top) over the background, viewed through a
/// window whose left edge sits at world column `offset`.
fn render<T: Real>(
    width: usize,
    height: usize,
    offset: i64,
    bg: &Background,
    objects: &[ObjectSpec],
    rgb_noise: f64,
    depth_noise: f64,
    rng: &mut ChaCha8Rng,
) -> Rendered<T> {
    let mut rgb = Grid::filled(width, height, [0u8; 3]);
    let mut depth = Grid::filled(width, height, T::zero());
    let mut owner = Grid::filled(width, height, None);
    for r in 0..height {
        let t = if height > 1 {
            r as f64 / (height - 1) as f64
        } else {
            0.0
        };
        let bg_depth = bg.depth_top + (bg.depth_bottom - bg.depth_top) * t;
        for c in 0..width {
            let wc = c as i64 + offset;
            let hit = objects.iter().enumerate().rev().find(|(_, o)| o.contains(r as i64, wc));
            let (base, d) = match hit {
                Some((i, o)) => {
                    owner.set(r, c, Some(i));
                    (o.color.map(|v| v as f64), o.depth)
                }
                None => {
                    let tex = bg.texture * texture_at(bg.seed, r as i64, wc);
                    let noisy = bg_depth * (1.0 + depth_noise * rng.random_range(-1.0..=1.0));
                    (bg.color.map(|v| v as f64 + tex), noisy)
                }
            };
            let px = base.map(|v| {
                let n = if rgb_noise > 0.0 {
                    rng.random_range(-rgb_noise..=rgb_noise)
                } else {
                    0.0
                };
                (v + n).round().clamp(0.0, 255.0) as u8
            });
            rgb.set(r, c, px);
            depth.set(r, c, T::lit(d));
        }
    }
    Rendered { rgb, depth, owner }
}

fn owned_mask<T>(rendered: &Rendered<T>, id: usize) -> Option<RegionMask> {
    let o = &rendered.owner;
    RegionMask::from_predicate(o.width(), o.height(), |r, c| *o.get(r, c) == Some(id))
}

/// Renders one labeled scene. The salient object is drawn last, so its mask
/// is its full shape; the label is `touch` iff its depth is below
/// [`TOUCH_DEPTH_M`].
pub fn gen_synthetic_scene<T: Real>(
    spec: &SceneSpec,
    rng_seed: u64,
) -> Result<(RgbdFrame<T>, RegionMask, Interaction)> {
    for o in spec.distractors.iter().chain(std::iter::once(&spec.salient)) {
        if !o.inside_frame(spec.width, spec.height) || o.height == 0 || o.width == 0 {
            return Err(Error::Spec(format!(
                "object at ({}, {}) size {}x{} is outside the {}x{} frame",
                o.top, o.left, o.height, o.width, spec.height, spec.width
            )));
        }
        if !(o.depth > 0.0 && o.depth.is_finite()) {
            return Err(Error::Spec("object depth must be positive".into()));
        }
    }
    if !(spec.background_depth > 0.0) {
        return Err(Error::Spec("background depth must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let bg = Background {
        seed: splitmix(rng_seed),
        color: spec.background_color,
        texture: spec.texture,
        depth_top: spec.background_depth,
        depth_bottom: spec.background_depth,
    };
    let mut objects = spec.distractors.clone();
    objects.push(spec.salient.clone());
    let rendered: Rendered<T> = render(
        spec.width,
        spec.height,
        0,
        &bg,
        &objects,
        spec.rgb_noise,
        spec.depth_noise,
        &mut rng,
    );
    let mask =
        owned_mask(&rendered, objects.len() - 1).ok_or_else(|| Error::Spec("salient object covers no pixel".into()))?;
    let label = if spec.salient.depth < TOUCH_DEPTH_M {
        Interaction::Touch
    } else {
        Interaction::Sight
    };
    let frame = RgbdFrame::new(rendered.rgb, rendered.depth, "synthetic", 0, 0.0)?;
    Ok((frame, mask, label))
}

/// Parameters of a panning-camera dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub sequences: usize,
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub fps: f64,
    /// Camera pan, in pixels per frame.
    pub pan_speed: usize,
    /// Horizontal spacing of consecutive targets, in pixels.
    pub target_spacing: usize,
    /// Fraction of activity phases whose targets are out of reach (labeled
    /// `sight`).
    pub sight_fraction: f64,
    /// Consecutive targets sharing one activity phase.
    pub phase_length: usize,
    pub far_distractors: bool,
    pub near_distractors: bool,
    pub rgb_noise: f64,
    pub depth_noise: f64,
    /// Sensor minimum range in meters; nearer surfaces read as missing.
    pub min_range: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            sequences: 4,
            frames: 50,
            width: 64,
            height: 64,
            fps: 2.0,
            pan_speed: 2,
            target_spacing: 48,
            sight_fraction: 0.0,
            phase_length: 1,
            far_distractors: true,
            near_distractors: true,
            rgb_noise: 4.0,
            depth_noise: 0.01,
            min_range: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticSequence<T> {
    pub id: String,
    pub frames: Vec<FrameRecord<T>>,
}

fn random_color(rng: &mut ChaCha8Rng) -> [u8; 3] {
    [0; 3].map(|_| rng.random_range(30u8..=230))
}

fn random_object(
    rng: &mut ChaCha8Rng,
    center_row: f64,
    center_col: f64,
    size: (usize, usize),
    depth: f64,
) -> ObjectSpec {
    let height = rng.random_range(size.0..=size.1);
    let width = rng.random_range(size.0..=size.1);
    ObjectSpec {
        shape: if rng.random_bool(0.5) {
            ShapeKind::Rect
        } else {
            ShapeKind::Ellipse
        },
        top: (center_row - height as f64 / 2.0).round() as i64,
        left: (center_col - width as f64 / 2.0).round() as i64,
        height,
        width,
        depth,
        color: random_color(rng),
    }
}

fn boxes_overlap(a: &ObjectSpec, b: &ObjectSpec, margin: i64) -> bool {
    a.top - margin < b.top + b.height as i64
        && b.top - margin < a.top + a.height as i64
        && a.left - margin < b.left + b.width as i64
        && b.left - margin < a.left + a.width as i64
}

struct World {
    targets: Vec<ObjectSpec>,
    distractors: Vec<ObjectSpec>,
    /// World column of the view's left edge at frame 0.
    start: i64,
    direction: i64,
}

fn build_world(cfg: &DatasetConfig, rng: &mut ChaCha8Rng) -> World {
    let h = cfg.height as f64;
    let travel = (cfg.pan_speed * cfg.frames.saturating_sub(1)) as i64;
    let margin = cfg.target_spacing as i64;
    let world_width = cfg.width as i64 + travel + 2 * margin;
    let direction = if rng.random_bool(0.5) { 1 } else { -1 };
    let start = if direction > 0 {
        margin
    } else {
        world_width - cfg.width as i64 - margin
    };
    let spacing = cfg.target_spacing as f64;
    let obj_min = (cfg.height / 7).max(3);
    let obj_max = (cfg.height / 4).max(obj_min);

    let mut targets = Vec::new();
    let mut col = spacing / 2.0 + rng.random_range(0.0..spacing / 2.0);
    let phase = cfg.phase_length.max(1);
    let mut sight = false;
    while col < world_width as f64 {
        if targets.len() % phase == 0 {
            sight = rng.random_bool(cfg.sight_fraction.clamp(0.0, 1.0));
        }
        let depth = if sight {
            rng.random_range(1.1..2.2)
        } else {
            rng.random_range(0.35..0.75)
        };
        let row = h / 2.0 + rng.random_range(-h / 12.0..=h / 12.0);
        let jitter = rng.random_range(-spacing / 12.0..=spacing / 12.0);
        targets.push(random_object(rng, row, col + jitter, (obj_min, obj_max), depth));
        col += spacing;
    }

    let mut distractors: Vec<ObjectSpec> = Vec::new();
    let clear = |o: &ObjectSpec, targets: &[ObjectSpec], others: &[ObjectSpec]| {
        targets.iter().chain(others).all(|t| !boxes_overlap(o, t, 2))
    };
    for pair in targets.windows(2) {
        let (_, c0) = pair[0].center();
        let (_, c1) = pair[1].center();
        if cfg.far_distractors {
            let row = h / 2.0 + rng.random_range(-h / 12.0..=h / 12.0);
            let gap = c1 - c0;
            let col = c0 + gap * rng.random_range(0.3..0.7);
            let depth = rng.random_range(1.6..3.0);
            let o = random_object(rng, row, col, (obj_min, obj_max), depth);
            if clear(&o, &targets, &distractors) {
                distractors.push(o);
            }
        }
        let in_reach = pair.iter().all(|t| t.depth < TOUCH_DEPTH_M);
        if cfg.near_distractors && in_reach && rng.random_bool(0.7) {
            let band = if rng.random_bool(0.5) {
                rng.random_range(h * 0.1..h * 0.2)
            } else {
                rng.random_range(h * 0.8..h * 0.9)
            };
            let col = rng.random_range(c0..c1);
            let depth = rng.random_range(0.35..0.75);
            let size = (obj_min.saturating_sub(2).max(3), obj_max.saturating_sub(2).max(3));
            let o = random_object(rng, band, col, size, depth);
            if clear(&o, &targets, &distractors) {
                distractors.push(o);
            }
        }
    }
    World {
        targets,
        distractors,
        start,
        direction,
    }
}

impl World {
    fn offset(&self, cfg: &DatasetConfig, t: usize) -> i64 {
        self.start + self.direction * (cfg.pan_speed * t) as i64
    }

    /// Index of the target nearest the view center at frame `t`.
    fn salient_target(&self, cfg: &DatasetConfig, t: usize) -> usize {
        let center = self.offset(cfg, t) as f64 + (cfg.width as f64 - 1.0) / 2.0;
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, o) in self.targets.iter().enumerate() {
            let d = (o.center().1 - center).abs();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

/// Generates `cfg.sequences` sequences named `seq0`, `seq1`, ... Each frame
/// carries its salient mask, interaction label and future-object masks for
/// every horizon whose later frame exists and shows a different target.
pub fn gen_synthetic_dataset<T: Real>(cfg: &DatasetConfig, seed: u64) -> Result<Vec<SyntheticSequence<T>>> {
    if cfg.width < 16 || cfg.height < 16 || cfg.frames == 0 || cfg.fps <= 0.0 {
        return Err(Error::Spec("dataset needs frames of at least 16x16 and fps > 0".into()));
    }
    if cfg.target_spacing * 2 > cfg.width * 3 || cfg.target_spacing < cfg.height / 4 + 4 {
        return Err(Error::Spec("target spacing incompatible with frame width".into()));
    }
    (0..cfg.sequences)
        .map(|s| {
            let seq_seed = splitmix(seed ^ splitmix(s as u64 + 1));
            let mut rng = ChaCha8Rng::seed_from_u64(seq_seed);
            let world = build_world(cfg, &mut rng);
            let bg = Background {
                seed: splitmix(seq_seed),
                color: [120, 112, 100],
                texture: 25.0,
                depth_top: 3.6,
                depth_bottom: 2.2,
            };
            let n_t = world.targets.len();
            let mut objects = world.distractors.clone();
            objects.extend(world.targets.iter().cloned());
            let id = format!("seq{}", s);
            let mut frames = Vec::with_capacity(cfg.frames);
            for t in 0..cfg.frames {
                let offset = world.offset(cfg, t);
                let rendered: Rendered<T> = render(
                    cfg.width,
                    cfg.height,
                    offset,
                    &bg,
                    &objects,
                    cfg.rgb_noise,
                    cfg.depth_noise,
                    &mut rng,
                );
                let first_target = objects.len() - n_t;
                let salient = world.salient_target(cfg, t);
                let gt = GroundTruth {
                    mask: owned_mask(&rendered, first_target + salient),
                };
                let interaction = if world.targets[salient].depth < TOUCH_DEPTH_M {
                    Interaction::Touch
                } else {
                    Interaction::Sight
                };
                let mut future = Vec::new();
                for h in VALID_HORIZONS {
                    let later = t + (h as f64 * cfg.fps).round() as usize;
                    if later >= cfg.frames {
                        continue;
                    }
                    let next = world.salient_target(cfg, later);
                    let visible = world.targets[next].shifted(offset).inside_frame(cfg.width, cfg.height);
                    if next != salient && visible {
                        if let Some(mask) = owned_mask(&rendered, first_target + next) {
                            future.push(FutureTarget {
                                later_index: later,
                                horizon_s: h,
                                mask: mask.into(),
                            });
                        }
                    }
                }
                let mut depth = rendered.depth;
                if cfg.min_range > 0.0 {
                    for d in depth.data_mut() {
                        if d.as_f64() < cfg.min_range {
                            *d = T::nan();
                        }
                    }
                }
                let frame = RgbdFrame::new(rendered.rgb, depth, id.clone(), t, t as f64 / cfg.fps)?;
                frames.push(FrameRecord {
                    frame,
                    gt: Some(gt),
                    interaction: Some(interaction),
                    future,
                });
            }
            Ok(SyntheticSequence { id, frames })
        })
        .collect()
}

/// Writes sequences as PNG rasters plus a `dataset.json` manifest under `dir`.
pub fn write_dataset<T: Real>(sequences: &[SyntheticSequence<T>], dir: &Path) -> Result<DatasetManifest> {
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for seq in sequences {
        std::fs::create_dir_all(dir.join(&seq.id))?;
        let mut frames = Vec::new();
        for rec in &seq.frames {
            let i = rec.frame.frame_index;
            let rel = |name: &str| Path::new(&seq.id).join(format!("{}_{:04}.png", name, i));
            write_rgb_png(&dir.join(rel("rgb")), rec.frame.rgb())?;
            write_depth_png(&dir.join(rel("depth")), rec.frame.depth(), DEFAULT_DEPTH_SCALE)?;
            let write_gt = |name: &str, gt: &GroundTruth| -> Result<std::path::PathBuf> {
                let p = rel(name);
                match &gt.mask {
                    Some(m) => write_mask_png(&dir.join(&p), m)?,
                    None => {
                        let (w, h) = rec.frame.dims();
                        let blank = Grid::filled(w, h, 0u8);
                        super::io::write_gray_png(&dir.join(&p), &blank)?;
                    }
                }
                Ok(p)
            };
            let gt_mask = rec.gt.as_ref().map(|g| write_gt("gt", g)).transpose()?;
            let mut future = Vec::new();
            for f in &rec.future {
                future.push(FutureLink {
                    later_index: f.later_index,
                    horizon_s: f.horizon_s,
                    mask: Some(write_gt(&format!("future{}", f.horizon_s), &f.mask)?),
                });
            }
            frames.push(FrameEntry {
                index: i,
                rgb: rel("rgb"),
                depth: rel("depth"),
                timestamp: Some(rec.frame.timestamp),
                gt_mask,
                interaction: rec.interaction,
                future,
            });
        }
        entries.push(SequenceEntry {
            id: seq.id.clone(),
            frames,
        });
    }
    let manifest = DatasetManifest::new(dir, entries);
    manifest.write(&dir.join("dataset.json"))?;
    Ok(manifest)
}
