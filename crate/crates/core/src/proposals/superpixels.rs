use crate::raster::Grid;

const ITERATIONS: usize = 5;
const COMPACTNESS: f64 = 10.0;

/// Grid-seeded k-means superpixels over color and position (SLIC style),
/// made 4-connected afterwards.
///
/// Labels are dense, numbered by each superpixel's first pixel in raster
/// order. Distance ties go to the lowest cluster index, so the output is a
/// pure function of the image and `n`.
pub fn superpixels(rgb: &Grid<[u8; 3]>, n: usize) -> Grid<u32> {
    let (w, h) = rgb.dims();
    let n = n.clamp(1, w * h);
    let gx = ((n as f64 * w as f64 / h as f64).sqrt().round() as usize).clamp(1, w);
    let gy = (n / gx).clamp(1, h);
    let step = ((w * h) as f64 / (gx * gy) as f64).sqrt();
    let spatial = (COMPACTNESS / step).powi(2);

    let cell = |r: usize, c: usize| (r * gy / h, c * gx / w);
    let mut labels = Grid::from_fn(w, h, |r, c| {
        let (i, j) = cell(r, c);
        (i * gx + j) as u32
    });

    let k = gx * gy;
    for _ in 0..ITERATIONS {
        // Cluster centers: mean color and position.
        let mut acc = vec![[0.0f64; 6]; k];
        for r in 0..h {
            for c in 0..w {
                let l = *labels.get(r, c) as usize;
                let p = rgb.get(r, c);
                let a = &mut acc[l];
                a[0] += p[0] as f64;
                a[1] += p[1] as f64;
                a[2] += p[2] as f64;
                a[3] += r as f64;
                a[4] += c as f64;
                a[5] += 1.0;
            }
        }
        let centers: Vec<Option<[f64; 5]>> = acc
            .iter()
            .map(|a| (a[5] > 0.0).then(|| [a[0] / a[5], a[1] / a[5], a[2] / a[5], a[3] / a[5], a[4] / a[5]]))
            .collect();
        let mut next = labels.clone();
        for r in 0..h {
            for c in 0..w {
                let (ci, cj) = cell(r, c);
                let p = rgb.get(r, c);
                let mut best = (f64::INFINITY, u32::MAX);
                for i in ci.saturating_sub(1)..=(ci + 1).min(gy - 1) {
                    for j in cj.saturating_sub(1)..=(cj + 1).min(gx - 1) {
                        let id = i * gx + j;
                        if let Some(ctr) = &centers[id] {
                            let dc = (p[0] as f64 - ctr[0]).powi(2)
                                + (p[1] as f64 - ctr[1]).powi(2)
                                + (p[2] as f64 - ctr[2]).powi(2);
                            let ds = (r as f64 - ctr[3]).powi(2) + (c as f64 - ctr[4]).powi(2);
                            let d = dc + spatial * ds;
                            if d < best.0 || (d == best.0 && (id as u32) < best.1) {
                                best = (d, id as u32);
                            }
                        }
                    }
                }
                if best.1 != u32::MAX {
                    next.set(r, c, best.1);
                }
            }
        }
        labels = next;
    }
    enforce_connectivity(&labels, (step * step / 4.0).max(1.0) as usize)
}

/// Splits labels into 4-connected components and absorbs components smaller
/// than `min_size` into the component they first touch (above or left).
fn enforce_connectivity(labels: &Grid<u32>, min_size: usize) -> Grid<u32> {
    let (w, h) = labels.dims();
    let mut comp = Grid::filled(w, h, u32::MAX);
    let mut sizes: Vec<usize> = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if comp.data()[start] != u32::MAX {
            continue;
        }
        let id = sizes.len() as u32;
        let label = labels.data()[start];
        let mut size = 0;
        comp.data_mut()[start] = id;
        stack.push(start);
        while let Some(p) = stack.pop() {
            size += 1;
            let (r, c) = (p / w, p % w);
            let nbrs = [
                (r > 0).then(|| p - w),
                (r + 1 < h).then(|| p + w),
                (c > 0).then(|| p - 1),
                (c + 1 < w).then(|| p + 1),
            ];
            for q in nbrs.into_iter().flatten() {
                if comp.data()[q] == u32::MAX && labels.data()[q] == label {
                    comp.data_mut()[q] = id;
                    stack.push(q);
                }
            }
        }
        sizes.push(size);
    }

    // Small components join the neighbor seen just before their first pixel.
    let mut parent: Vec<u32> = (0..sizes.len() as u32).collect();
    let mut first_pixel = vec![usize::MAX; sizes.len()];
    for p in 0..w * h {
        let id = comp.data()[p] as usize;
        if first_pixel[id] == usize::MAX {
            first_pixel[id] = p;
        }
    }
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    for id in 0..sizes.len() {
        if sizes[id] >= min_size || sizes.len() == 1 {
            continue;
        }
        let p = first_pixel[id];
        let (r, c) = (p / w, p % w);
        let target = if c > 0 {
            Some(comp.data()[p - 1])
        } else if r > 0 {
            Some(comp.data()[p - w])
        } else {
            // Top-left component: attach to the first different neighbor.
            (p..w * h).map(|q| comp.data()[q]).find(|&q| q != id as u32)
        };
        if let Some(t) = target {
            let (a, b) = (find(&mut parent, id as u32), find(&mut parent, t));
            if a != b {
                let keep = a.min(b);
                parent[a.max(b) as usize] = keep;
            }
        }
    }

    let mut remap = vec![u32::MAX; sizes.len()];
    let mut next = 0u32;
    let mut out = Grid::filled(w, h, 0u32);
    for p in 0..w * h {
        let root = find(&mut parent, comp.data()[p]) as usize;
        if remap[root] == u32::MAX {
            remap[root] = next;
            next += 1;
        }
        out.data_mut()[p] = remap[root];
    }
    out
}
