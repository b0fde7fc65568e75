use std::path::Path;

use crate::error::{ingestion, Error, Result};
use crate::num::Real;

use super::{Forest, Mode, Node, Tree};

const MAGIC: &[u8; 4] = b"EGOF";
const VERSION: u32 = 1;

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.at < n {
            return Err(Error::Deserialize(format!("truncated while reading {}", what)));
        }
        let s = &self.buf[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let n = self.u32(what)? as usize;
        let bytes = self.take(n, what)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| Error::Deserialize(format!("{} is not UTF-8", what)))
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend((s.len() as u32).to_le_bytes());
    out.extend(s.as_bytes());
}

impl<T: Real> Forest<T> {
    /// Serializes to the EGOF container: magic, version, mode, feature
    /// count, layout id, metadata, trees in preorder, per-feature
    /// importance. All numbers little-endian; scalars as `f64`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend(MAGIC);
        out.extend(VERSION.to_le_bytes());
        out.push(match self.mode {
            Mode::Regression => 0,
            Mode::Classification => 1,
        });
        out.extend((self.feature_dim as u64).to_le_bytes());
        put_str(&mut out, &self.layout_id);
        put_str(&mut out, &self.metadata);
        out.extend((self.trees.len() as u64).to_le_bytes());
        for tree in &self.trees {
            out.extend((tree.nodes.len() as u64).to_le_bytes());
            for node in &tree.nodes {
                match node {
                    Node::Leaf { value } => {
                        out.push(0);
                        out.extend(value.as_f64().to_le_bytes());
                    }
                    Node::Split { feature, threshold, .. } => {
                        out.push(1);
                        out.extend((*feature as u64).to_le_bytes());
                        out.extend(threshold.as_f64().to_le_bytes());
                    }
                }
            }
        }
        for v in &self.importance {
            out.extend(v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let mut r = Reader { buf, at: 0 };
        if r.take(4, "magic")? != MAGIC {
            return Err(Error::Deserialize("not an EGOF model".into()));
        }
        let version = r.u32("version")?;
        if version != VERSION {
            return Err(Error::Deserialize(format!("unsupported format version {}", version)));
        }
        let mode = match r.u8("mode")? {
            0 => Mode::Regression,
            1 => Mode::Classification,
            m => return Err(Error::Deserialize(format!("unknown mode {}", m))),
        };
        let feature_dim = r.u64("feature count")? as usize;
        let layout_id = r.string("layout id")?;
        let metadata = r.string("metadata")?;
        let n_trees = r.u64("tree count")? as usize;
        if n_trees == 0 {
            return Err(Error::Deserialize("model has no trees".into()));
        }
        let mut trees = Vec::new();
        for _ in 0..n_trees {
            let n_nodes = r.u64("node count")? as usize;
            // Each node takes at least 9 bytes.
            if n_nodes == 0 || n_nodes > (buf.len() - r.at) / 9 {
                return Err(Error::Deserialize("node count exceeds file size".into()));
            }
            trees.push(read_tree(&mut r, n_nodes, feature_dim)?);
        }
        let mut importance = Vec::with_capacity(feature_dim.min(buf.len() / 8));
        for _ in 0..feature_dim {
            importance.push(r.f64("importance")?);
        }
        if r.at != buf.len() {
            return Err(Error::Deserialize("trailing bytes after model".into()));
        }
        Ok(Self {
            mode,
            feature_dim,
            layout_id,
            metadata,
            trees,
            importance,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| ingestion(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let buf = std::fs::read(path).map_err(|e| ingestion(path, e))?;
        Self::from_bytes(&buf)
    }
}

/// Rebuilds child links from a preorder node list with an explicit stack.
fn read_tree<T: Real>(r: &mut Reader<'_>, n_nodes: usize, dim: usize) -> Result<Tree<T>> {
    let mut nodes = Vec::with_capacity(n_nodes);
    // Split nodes still waiting for their right child.
    let mut open: Vec<usize> = Vec::new();
    for id in 0..n_nodes {
        if id > 0 {
            let Some(&parent) = open.last() else {
                return Err(Error::Deserialize("nodes after a complete tree".into()));
            };
            if let Node::Split { left, right, .. } = &mut nodes[parent] {
                if *left == usize::MAX {
                    *left = id;
                } else {
                    *right = id;
                    open.pop();
                }
            }
        }
        match r.u8("node tag")? {
            0 => nodes.push(Node::Leaf {
                value: T::lit(r.f64("leaf value")?),
            }),
            1 => {
                let feature = r.u64("split feature")? as usize;
                if feature >= dim {
                    return Err(Error::Deserialize(format!("split feature {} out of range", feature)));
                }
                let threshold = T::lit(r.f64("split threshold")?);
                nodes.push(Node::Split {
                    feature,
                    threshold,
                    left: usize::MAX,
                    right: usize::MAX,
                });
                open.push(id);
            }
            t => return Err(Error::Deserialize(format!("unknown node tag {}", t))),
        }
    }
    if !open.is_empty() {
        return Err(Error::Deserialize("tree ends inside a split".into()));
    }
    Ok(Tree { nodes })
}

#[cfg(test)]
mod tests {
    use super::super::TrainConfig;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model() -> Forest<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x: Vec<Vec<f64>> = (0..120).map(|_| (0..5).map(|_| rng.random()).collect()).collect();
        let y: Vec<f64> = x.iter().map(|r| r[2] * r[3]).collect();
        let cfg = TrainConfig {
            n_trees: 7,
            ..TrainConfig::default()
        };
        Forest::train(&x, &y, &cfg, Mode::Regression)
            .unwrap()
            .with_layout("ego77-v1", "task=test")
    }

    #[test]
    fn round_trip() {
        let f = model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.egof");
        f.save(&path).unwrap();
        let g = Forest::<f64>::load(&path).unwrap();
        assert_eq!(f, g);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x: Vec<f64> = (0..5).map(|_| rng.random()).collect();
            assert_eq!(f.predict(&x).unwrap(), g.predict(&x).unwrap());
        }
        assert_eq!(g.metadata(), "task=test");
    }

    #[test]
    fn truncation_and_corruption() {
        let bytes = model().to_bytes();
        for cut in [0, 3, 10, bytes.len() / 2, bytes.len() - 1] {
            assert!(matches!(
                Forest::<f64>::from_bytes(&bytes[..cut]),
                Err(Error::Deserialize(_))
            ));
        }
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Forest::<f64>::from_bytes(&bad).is_err());
        let mut long = bytes;
        long.push(0);
        assert!(Forest::<f64>::from_bytes(&long).is_err());
    }

    #[test]
    fn layout_guard() {
        let f = model();
        assert!(f.ensure_layout("ego77-v1").is_ok());
        assert!(f.ensure_layout("ego77-v2").is_err());
    }
}
