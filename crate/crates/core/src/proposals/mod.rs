//! Candidate regions: contour strength, grid-seeded superpixels merged
//! greedily into an ultrametric hierarchy, and external mask ingestion.

mod contour;
mod merge;
mod superpixels;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{read_mask_png, RegionMask, RgbdFrame};
use crate::error::{contract, ingestion, Result};
use crate::num::Real;

pub use contour::{contour_strength, ContourMap};
pub use merge::{ucm_bounds, Merge, MergeTree};
pub use superpixels::superpixels;

/// Regions smaller than this many pixels are never emitted.
pub const MIN_PROPOSAL_AREA: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProposalParams {
    pub n_superpixels: usize,
    pub max_proposals: usize,
}

impl Default for ProposalParams {
    fn default() -> Self {
        Self {
            n_superpixels: 256,
            max_proposals: 2000,
        }
    }
}

/// Output of the built-in proposer.
#[derive(Debug, Clone)]
pub struct Proposals<T> {
    pub regions: Vec<RegionMask>,
    /// Merge-tree node of each region.
    pub nodes: Vec<usize>,
    pub tree: MergeTree<T>,
    pub contour: ContourMap<T>,
}

pub fn propose_regions<T: Real>(frame: &RgbdFrame<T>, params: &ProposalParams) -> Result<Proposals<T>> {
    let contour = contour_strength(frame.rgb());
    propose_regions_with_contour(frame, contour, params)
}

/// Like [`propose_regions`] with an externally supplied contour map.
///
/// Every merge-tree node of at least [`MIN_PROPOSAL_AREA`] pixels is a
/// proposal; nodes are taken in order of formation (ascending merge
/// threshold, leaves first) until `max_proposals` is reached.
pub fn propose_regions_with_contour<T: Real>(
    frame: &RgbdFrame<T>,
    contour: ContourMap<T>,
    params: &ProposalParams,
) -> Result<Proposals<T>> {
    let (w, h) = frame.dims();
    if w < 3 || h < 3 {
        return contract(format!("frame {}x{} is smaller than 3x3", w, h));
    }
    if params.n_superpixels < 2 {
        return contract("n_superpixels must be >= 2");
    }
    if contour.strength.dims() != frame.dims() {
        return contract("contour map dims differ from frame");
    }
    let labels = superpixels(frame.rgb(), params.n_superpixels);
    let tree = MergeTree::build(labels, &contour)?;
    let mut regions = Vec::new();
    let mut nodes = Vec::new();
    tree.for_each_node_pixels(|node, pixels| {
        if regions.len() >= params.max_proposals {
            return false;
        }
        if pixels.len() >= MIN_PROPOSAL_AREA {
            regions.push(RegionMask::from_indices(w, h, pixels.to_vec()).expect("non-empty node"));
            nodes.push(node);
        }
        true
    });
    Ok(Proposals {
        regions,
        nodes,
        tree,
        contour,
    })
}

/// Loads every `*.png` in `dir` in lexicographic order. Masks with no set
/// pixel are skipped with a warning.
pub fn load_masks<T: Real>(dir: &Path, frame: &RgbdFrame<T>) -> Result<Vec<RegionMask>> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| ingestion(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
        .collect();
    files.sort();
    let mut out = Vec::with_capacity(files.len());
    for f in files {
        match read_mask_png(&f)? {
            Some(m) if m.dims() != frame.dims() => {
                return Err(ingestion(
                    &f,
                    format!("mask is {:?}, frame is {:?}", m.dims(), frame.dims()),
                ))
            }
            Some(m) => out.push(m),
            None => {
                let gray = crate::data::read_gray_png(&f)?;
                if gray.dims() != frame.dims() {
                    return Err(ingestion(&f, "mask dims differ from frame"));
                }
                log::warn!("skipping empty mask {}", f.display());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::write_mask_png;
    use crate::raster::Grid;
    use std::collections::VecDeque;

    fn frame_from(rgb: Grid<[u8; 3]>) -> RgbdFrame<f64> {
        let (w, h) = rgb.dims();
        RgbdFrame::new(rgb, Grid::filled(w, h, 1.0), "t", 0, 0.0).unwrap()
    }

    /// 4-connected components of equal color, by flood fill.
    fn color_components(rgb: &Grid<[u8; 3]>) -> Vec<Vec<u32>> {
        let (w, h) = rgb.dims();
        let mut seen = vec![false; w * h];
        let mut out = Vec::new();
        for start in 0..w * h {
            if seen[start] {
                continue;
            }
            let color = rgb.data()[start];
            let mut comp = Vec::new();
            let mut q = VecDeque::from([start]);
            seen[start] = true;
            while let Some(p) = q.pop_front() {
                comp.push(p as u32);
                let (r, c) = (p / w, p % w);
                let mut nbrs = vec![];
                if r > 0 {
                    nbrs.push(p - w);
                }
                if r + 1 < h {
                    nbrs.push(p + w);
                }
                if c > 0 {
                    nbrs.push(p - 1);
                }
                if c + 1 < w {
                    nbrs.push(p + 1);
                }
                for n in nbrs {
                    if !seen[n] && rgb.data()[n] == color {
                        seen[n] = true;
                        q.push_back(n);
                    }
                }
            }
            comp.sort();
            out.push(comp);
        }
        out
    }

    fn is_connected(m: &RegionMask) -> bool {
        let bits = m.to_bitmap();
        let w = m.width();
        let start = m.indices()[0] as usize;
        let mut seen = vec![false; bits.len()];
        seen[start] = true;
        let mut q = VecDeque::from([start]);
        let mut n = 0;
        while let Some(p) = q.pop_front() {
            n += 1;
            let (r, c) = (p / w, p % w);
            let mut nbrs = vec![];
            if r > 0 {
                nbrs.push(p - w);
            }
            if p + w < bits.len() {
                nbrs.push(p + w);
            }
            if c > 0 {
                nbrs.push(p - 1);
            }
            if c + 1 < w {
                nbrs.push(p + 1);
            }
            for x in nbrs {
                if bits[x] && !seen[x] {
                    seen[x] = true;
                    q.push_back(x);
                }
            }
        }
        n == m.area()
    }

    #[test]
    fn two_color_halves_are_proposed() {
        let rgb = Grid::from_fn(32, 24, |_, c| if c < 16 { [200, 30, 30] } else { [20, 40, 210] });
        let comps = color_components(&rgb);
        assert_eq!(comps.len(), 2);
        let p = propose_regions(
            &frame_from(rgb),
            &ProposalParams {
                n_superpixels: 16,
                max_proposals: 2000,
            },
        )
        .unwrap();
        for comp in comps {
            assert!(p.regions.iter().any(|r| r.indices() == &comp[..]));
        }
    }

    #[test]
    fn constant_image_is_deterministic() {
        let rgb = Grid::filled(20, 20, [90u8, 90, 90]);
        let params = ProposalParams {
            n_superpixels: 9,
            max_proposals: 100,
        };
        let a = propose_regions(&frame_from(rgb.clone()), &params).unwrap();
        let b = propose_regions(&frame_from(rgb), &params).unwrap();
        assert_eq!(a.regions, b.regions);
        assert_eq!(a.tree, b.tree);
    }

    #[test]
    fn cap_is_respected() {
        let rgb = Grid::from_fn(40, 40, |r, c| [(r * 6) as u8, (c * 6) as u8, 100]);
        let p = propose_regions(
            &frame_from(rgb),
            &ProposalParams {
                n_superpixels: 64,
                max_proposals: 5,
            },
        )
        .unwrap();
        assert!(p.regions.len() <= 5);
        assert!(!p.regions.is_empty());
    }

    #[test]
    fn proposals_are_connected_and_large_enough() {
        let spec = crate::data::synth::SceneSpec::single(
            48,
            40,
            crate::data::synth::ObjectSpec {
                shape: crate::data::synth::ShapeKind::Ellipse,
                top: 10,
                left: 14,
                height: 14,
                width: 18,
                depth: 0.5,
                color: [220, 200, 30],
            },
        );
        let (frame, _, _) = crate::data::synth::gen_synthetic_scene::<f64>(&spec, 4).unwrap();
        let p = propose_regions(
            &frame,
            &ProposalParams {
                n_superpixels: 40,
                max_proposals: 500,
            },
        )
        .unwrap();
        for r in &p.regions {
            assert!(r.area() >= MIN_PROPOSAL_AREA);
            assert!(is_connected(r));
            let (a, d) = ucm_bounds(r, &p.tree).unwrap();
            assert!(0.0 <= a && a <= d && d <= 1.0);
        }
        // The full frame (the root) is among the proposals.
        assert!(p.regions.iter().any(|r| r.area() == 48 * 40));
    }

    #[test]
    fn rejects_tiny_frames_and_few_superpixels() {
        let tiny = frame_from(Grid::filled(2, 5, [0u8; 3]));
        assert!(propose_regions(&tiny, &ProposalParams::default()).is_err());
        let ok = frame_from(Grid::filled(5, 5, [0u8; 3]));
        assert!(propose_regions(
            &ok,
            &ProposalParams {
                n_superpixels: 1,
                max_proposals: 3
            }
        )
        .is_err());
    }

    #[test]
    fn mask_directory_loading() {
        let dir = tempfile::tempdir().unwrap();
        let frame = frame_from(Grid::filled(8, 6, [0u8; 3]));
        let m1 = RegionMask::rect(8, 6, 0, 0, 1, 1).unwrap();
        let m2 = RegionMask::rect(8, 6, 2, 2, 4, 6).unwrap();
        write_mask_png(&dir.path().join("b.png"), &m1).unwrap();
        write_mask_png(&dir.path().join("a.png"), &m2).unwrap();
        write_mask_png(&dir.path().join("c.png"), &m1).unwrap();
        crate::data::write_gray_png(&dir.path().join("d_empty.png"), &Grid::filled(8, 6, 0u8)).unwrap();
        let loaded = load_masks(dir.path(), &frame).unwrap();
        assert_eq!(loaded, vec![m2, m1.clone(), m1.clone()]);

        write_mask_png(&dir.path().join("e.png"), &RegionMask::rect(9, 6, 0, 0, 1, 1).unwrap()).unwrap();
        let err = load_masks(dir.path(), &frame).unwrap_err();
        assert!(err.to_string().contains("e.png"));
    }
}
