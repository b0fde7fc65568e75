use crate::data::{GroundTruth, Interaction};
use crate::error::{contract, Error, Result};
use crate::num::Real;
use crate::raster::Grid;

/// Thresholds `0, 1/255, ..., 1`.
pub const N_THRESHOLDS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Points in strictly increasing threshold order.
#[derive(Debug, Clone, PartialEq)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
}

/// Confusion counts at each of the 256 thresholds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Confusion {
    pub tp: Vec<u64>,
    pub fp: Vec<u64>,
    pub positives: u64,
}

impl Default for Confusion {
    fn default() -> Self {
        Self {
            tp: vec![0; N_THRESHOLDS],
            fp: vec![0; N_THRESHOLDS],
            positives: 0,
        }
    }
}

impl Confusion {
    pub fn merge(&mut self, other: &Confusion) {
        self.tp.iter_mut().zip(&other.tp).for_each(|(a, b)| *a += b);
        self.fp.iter_mut().zip(&other.fp).for_each(|(a, b)| *a += b);
        self.positives += other.positives;
    }
}

/// Number of thresholds `i / 255` that `score` reaches.
pub fn threshold_count(score: f64) -> usize {
    if score.is_nan() || score < 0.0 {
        return 0;
    }
    let mut i = ((score * 255.0).floor() as i64).clamp(0, 255);
    while i < 255 && (i + 1) as f64 / 255.0 <= score {
        i += 1;
    }
    while i >= 0 && i as f64 / 255.0 > score {
        i -= 1;
    }
    (i + 1) as usize
}

fn check_dims<T>(pred: &Grid<T>, gt: &GroundTruth) -> Result<()> {
    match &gt.mask {
        Some(m) if m.dims() != pred.dims() => contract(format!(
            "prediction is {}x{} but ground truth is {}x{}",
            pred.width(),
            pred.height(),
            m.width(),
            m.height()
        )),
        _ => Ok(()),
    }
}

/// Per-frame confusion counts: a pixel is predicted positive at threshold
/// `t` when its score is at least `t`.
pub fn frame_confusion<T: Real>(pred: &Grid<T>, gt: &GroundTruth) -> Result<Confusion> {
    check_dims(pred, gt)?;
    let mut hist_pos = [0u64; N_THRESHOLDS + 1];
    let mut hist_neg = [0u64; N_THRESHOLDS + 1];
    let bitmap = gt.mask.as_ref().map(|m| m.to_bitmap());
    for (p, &s) in pred.data().iter().enumerate() {
        let k = threshold_count(s.as_f64());
        if bitmap.as_ref().is_some_and(|b| b[p]) {
            hist_pos[k] += 1;
        } else {
            hist_neg[k] += 1;
        }
    }
    let mut c = Confusion::default();
    let (mut tp, mut fp) = (0, 0);
    // Pixels counted in bin k reach thresholds 0..k.
    for i in (0..N_THRESHOLDS).rev() {
        tp += hist_pos[i + 1];
        fp += hist_neg[i + 1];
        c.tp[i] = tp;
        c.fp[i] = fp;
    }
    c.positives = gt.mask.as_ref().map_or(0, |m| m.area() as u64);
    Ok(c)
}

/// Streaming pooled PR evaluation over many frames.
#[derive(Debug, Clone, Default)]
pub struct PrAccumulator {
    counts: Confusion,
    frames: usize,
}

impl PrAccumulator {
    pub fn add<T: Real>(&mut self, pred: &Grid<T>, gt: &GroundTruth) -> Result<()> {
        self.counts.merge(&frame_confusion(pred, gt)?);
        self.frames += 1;
        Ok(())
    }

    pub fn counts(&self) -> &Confusion {
        &self.counts
    }

    pub fn curve(&self) -> Result<PrCurve> {
        let c = &self.counts;
        if c.positives == 0 {
            return Err(Error::Evaluation("ground truth has no positive pixels".into()));
        }
        let points = (0..N_THRESHOLDS)
            .map(|i| {
                let predicted = c.tp[i] + c.fp[i];
                PrPoint {
                    threshold: i as f64 / 255.0,
                    precision: if predicted == 0 {
                        1.0
                    } else {
                        c.tp[i] as f64 / predicted as f64
                    },
                    recall: c.tp[i] as f64 / c.positives as f64,
                }
            })
            .collect();
        Ok(PrCurve { points })
    }
}

/// Pooled PR curve over all frames at the 256 fixed thresholds.
pub fn pr_curve<T: Real>(preds: &[Grid<T>], gts: &[GroundTruth]) -> Result<PrCurve> {
    if preds.len() != gts.len() {
        return contract(format!("{} predictions but {} ground truths", preds.len(), gts.len()));
    }
    let mut acc = PrAccumulator::default();
    for (p, g) in preds.iter().zip(gts) {
        acc.add(p, g)?;
    }
    acc.curve()
}

/// Pooled PR curve with one point per distinct predicted score.
pub fn pr_curve_exact<T: Real>(preds: &[Grid<T>], gts: &[GroundTruth]) -> Result<PrCurve> {
    if preds.len() != gts.len() {
        return contract(format!("{} predictions but {} ground truths", preds.len(), gts.len()));
    }
    let mut scored: Vec<(f64, bool)> = Vec::new();
    for (p, g) in preds.iter().zip(gts) {
        check_dims(p, g)?;
        let bitmap = g.mask.as_ref().map(|m| m.to_bitmap());
        scored.extend(
            p.data()
                .iter()
                .enumerate()
                .map(|(i, s)| (s.as_f64(), bitmap.as_ref().is_some_and(|b| b[i]))),
        );
    }
    let positives = scored.iter().filter(|s| s.1).count();
    if positives == 0 {
        return Err(Error::Evaluation("ground truth has no positive pixels".into()));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut points = Vec::new();
    let mut k = 0;
    while k < scored.len() {
        let t = scored[k].0;
        while k < scored.len() && scored[k].0 == t {
            if scored[k].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        points.push(PrPoint {
            threshold: t,
            precision: tp as f64 / (tp + fp) as f64,
            recall: tp as f64 / positives as f64,
        });
    }
    points.reverse();
    Ok(PrCurve { points })
}

/// Largest `2PR / (P + R)` along the curve.
pub fn max_f_score(curve: &PrCurve) -> f64 {
    curve
        .points
        .iter()
        .map(|p| {
            let s = p.precision + p.recall;
            if s > 0.0 {
                2.0 * p.precision * p.recall / s
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

/// Step integration of precision over recall, with precision replaced by
/// the best precision at any equal or higher recall.
pub fn average_precision(curve: &PrCurve) -> f64 {
    let mut pts: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.recall, p.precision)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    for i in (0..pts.len().saturating_sub(1)).rev() {
        pts[i].1 = pts[i].1.max(pts[i + 1].1);
    }
    let mut prev = 0.0;
    let mut ap = 0.0;
    for (r, p) in pts {
        ap += p * (r - prev);
        prev = r;
    }
    ap
}

pub fn interaction_accuracy(preds: &[Interaction], gts: &[Interaction]) -> Result<f64> {
    if preds.len() != gts.len() {
        return contract(format!("{} predictions but {} labels", preds.len(), gts.len()));
    }
    if preds.is_empty() {
        return Err(Error::Evaluation("no labelled frames to score".into()));
    }
    let hits = preds.iter().zip(gts).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / preds.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::RegionMask;
    use proptest::prelude::*;

    fn gt(w: usize, h: usize, bits: &[bool]) -> GroundTruth {
        GroundTruth {
            mask: RegionMask::from_predicate(w, h, |r, c| bits[r * w + c]),
        }
    }

    #[test]
    fn hand_counted_frame() {
        let pred = Grid::from_vec(2, 2, vec![1.0, 0.5, 0.0, 0.0]).unwrap();
        let g = gt(2, 2, &[true, true, false, false]);
        let c = frame_confusion(&pred, &g).unwrap();
        // tau = 0.4 rounds up to the next grid threshold; check the raw counts.
        let i04 = (0..256).find(|&i| i as f64 / 255.0 >= 0.4).unwrap();
        let i06 = (0..256).find(|&i| i as f64 / 255.0 >= 0.6).unwrap();
        assert_eq!((c.tp[i04], c.fp[i04]), (2, 0));
        assert_eq!((c.tp[i06], c.fp[i06]), (1, 0));
        assert_eq!(
            (threshold_count(1.0), threshold_count(0.0), threshold_count(1.0 / 255.0)),
            (256, 1, 2)
        );
        let curve = pr_curve(&[pred], &[g]).unwrap();
        assert_eq!(curve.points[i04].precision, 1.0);
        assert_eq!(curve.points[i04].recall, 1.0);
        assert_eq!(curve.points[i06].recall, 0.5);
    }

    #[test]
    fn perfect_and_zero_predictors() {
        let bits: Vec<bool> = (0..30).map(|i| i % 3 == 0).collect();
        let g = gt(6, 5, &bits);
        let perfect = Grid::from_vec(6, 5, bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()).unwrap();
        let curve = pr_curve(&[perfect], std::slice::from_ref(&g)).unwrap();
        assert!(curve.points[1..].iter().all(|p| p.precision == 1.0 && p.recall == 1.0));
        assert_eq!(max_f_score(&curve), 1.0);
        assert_eq!(average_precision(&curve), 1.0);
        let zero = pr_curve(&[Grid::filled(6, 5, 0.0f64)], &[g]).unwrap();
        assert!(zero.points[1..].iter().all(|p| p.recall == 0.0));
    }

    #[test]
    fn f_and_ap_formulas() {
        let pt = |precision, recall| PrPoint {
            threshold: 0.0,
            precision,
            recall,
        };
        assert_eq!(
            max_f_score(&PrCurve {
                points: vec![pt(0.5, 0.5)]
            }),
            0.5
        );
        let two = PrCurve {
            points: vec![pt(1.0, 0.2), pt(0.5, 1.0)],
        };
        assert!((max_f_score(&two) - 2.0 / 3.0).abs() < 1e-15);
        let steps = PrCurve {
            points: vec![pt(1.0, 0.5), pt(0.5, 1.0)],
        };
        assert!((average_precision(&steps) - 0.75).abs() < 1e-15);
        let flat = PrCurve {
            points: vec![pt(0.5, 1.0)],
        };
        assert_eq!(average_precision(&flat), 0.5);
        assert_eq!(
            max_f_score(&PrCurve {
                points: vec![pt(0.0, 0.0)]
            }),
            0.0
        );
    }

    #[test]
    fn errors() {
        let g = gt(2, 2, &[false; 4]);
        assert!(matches!(
            pr_curve(&[Grid::filled(2, 2, 0.3f64)], &[g]),
            Err(Error::Evaluation(_))
        ));
        let g = gt(2, 2, &[true; 4]);
        assert!(pr_curve(&[Grid::filled(3, 2, 0.3f64)], &[g]).is_err());
        assert!(interaction_accuracy(&[], &[]).is_err());
        assert!(interaction_accuracy(&[Interaction::Touch], &[]).is_err());
        let p = [
            Interaction::Touch,
            Interaction::Sight,
            Interaction::Sight,
            Interaction::Touch,
        ];
        let t = [
            Interaction::Touch,
            Interaction::Sight,
            Interaction::Touch,
            Interaction::Touch,
        ];
        assert_eq!(interaction_accuracy(&p, &t).unwrap(), 0.75);
        assert_eq!(interaction_accuracy(&t, &t).unwrap(), 1.0);
    }

    fn frames() -> impl Strategy<Value = Vec<(Vec<f64>, Vec<bool>)>> {
        proptest::collection::vec(
            (
                proptest::collection::vec(0.0f64..=1.0, 12),
                proptest::collection::vec(any::<bool>(), 12),
            ),
            1..5,
        )
        .prop_filter("some positive", |f| f.iter().any(|(_, b)| b.iter().any(|&x| x)))
    }

    proptest! {
        #[test]
        fn pooled_counts_are_additive_and_match_oracle(fs in frames()) {
            let preds: Vec<Grid<f64>> = fs.iter().map(|(s, _)| Grid::from_vec(4, 3, s.clone()).unwrap()).collect();
            let gts: Vec<GroundTruth> = fs.iter().map(|(_, b)| gt(4, 3, b)).collect();
            let mut acc = PrAccumulator::default();
            let mut sum = Confusion::default();
            for (p, g) in preds.iter().zip(&gts) {
                acc.add(p, g).unwrap();
                sum.merge(&frame_confusion(p, g).unwrap());
            }
            prop_assert_eq!(acc.counts(), &sum);
            for i in 0..N_THRESHOLDS {
                let t = i as f64 / 255.0;
                let (mut tp, mut fp) = (0u64, 0u64);
                for (s, b) in &fs {
                    for k in 0..12 {
                        if s[k] >= t {
                            if b[k] { tp += 1 } else { fp += 1 }
                        }
                    }
                }
                prop_assert_eq!((sum.tp[i], sum.fp[i]), (tp, fp));
            }
            let curve = acc.curve().unwrap();
            prop_assert!(curve.points.windows(2).all(|w| w[1].recall <= w[0].recall && w[1].threshold > w[0].threshold));
            let (mf, ap) = (max_f_score(&curve), average_precision(&curve));
            prop_assert!((0.0..=1.0).contains(&mf) && (0.0..=1.0 + 1e-12).contains(&ap));
        }

        #[test]
        fn exact_ap_invariant_under_monotone_rescaling(fs in frames()) {
            let preds: Vec<Grid<f64>> = fs.iter().map(|(s, _)| Grid::from_vec(4, 3, s.clone()).unwrap()).collect();
            let squashed: Vec<Grid<f64>> = preds.iter().map(|g| g.map(|v| (3.0 * v).exp() / 40.0)).collect();
            let gts: Vec<GroundTruth> = fs.iter().map(|(_, b)| gt(4, 3, b)).collect();
            let a = average_precision(&pr_curve_exact(&preds, &gts).unwrap());
            let b = average_precision(&pr_curve_exact(&squashed, &gts).unwrap());
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
