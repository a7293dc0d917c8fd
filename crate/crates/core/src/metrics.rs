//! Pixel-level confusion counting, the metric suite (IoU, F1, precision,
//! recall, accuracy, balanced accuracy), image-level verdicts, and split
//! aggregation. 0/0 cases stay explicitly undefined instead of silently
//! becoming 0 or 1.

use crate::error::{Error, Result};
use crate::image::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Exact per-pixel counts; positive class = forged.
pub fn confusion(pred: &BinaryMask, truth: &BinaryMask) -> Result<Confusion> {
    if pred.width != truth.width || pred.height != truth.height {
        return Err(Error::arg(format!(
            "mask dims {}x{} vs {}x{}",
            pred.width, pred.height, truth.width, truth.height
        )));
    }
    let mut c = Confusion {
        tp: 0,
        fp: 0,
        fn_: 0,
        tn: 0,
    };
    for (&p, &t) in pred.bits.iter().zip(&truth.bits) {
        match (p, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// Metric bundle; `None` marks an undefined (0/0) value.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Metrics {
    pub iou: Option<f64>,
    pub f1: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub accuracy: Option<f64>,
    pub balanced_accuracy: Option<f64>,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    if den == 0.0 {
        None
    } else {
        Some(num / den)
    }
}

pub fn metric_suite(c: &Confusion) -> Metrics {
    let (tp, fp, fn_, tn) = (c.tp as f64, c.fp as f64, c.fn_ as f64, c.tn as f64);
    let recall = ratio(tp, tp + fn_);
    let tnr = ratio(tn, tn + fp);
    Metrics {
        iou: ratio(tp, tp + fp + fn_),
        f1: ratio(2.0 * tp, 2.0 * tp + fp + fn_),
        precision: ratio(tp, tp + fp),
        recall,
        accuracy: ratio(tp + tn, tp + fp + fn_ + tn),
        balanced_accuracy: match (recall, tnr) {
            (Some(r), Some(t)) => Some((r + t) / 2.0),
            _ => None,
        },
    }
}

/// True when the forged fraction exceeds `min_area_fraction`.
pub fn image_level_verdict(pred: &BinaryMask, min_area_fraction: f64) -> bool {
    let total = (pred.width * pred.height) as f64;
    pred.count_true() as f64 / total > min_area_fraction
}

/// One evaluated image.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ImageReport {
    pub name: String,
    pub confusion: Confusion,
    pub metrics: Metrics,
    pub image_level_pred: bool,
    pub image_level_truth: bool,
}

#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct UndefinedCounts {
    pub iou: usize,
    pub f1: usize,
    pub precision: usize,
    pub recall: usize,
    pub accuracy: usize,
    pub balanced_accuracy: usize,
}

/// Unweighted means of the defined per-image metrics.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SplitAggregate {
    pub split: String,
    pub images: usize,
    pub mean: Metrics,
    pub undefined_counts: UndefinedCounts,
    /// Fraction of images whose image-level verdict matched the truth
    /// verdict, balanced over the two truth classes when both occur.
    pub image_level_balanced_accuracy: Option<f64>,
}

pub fn aggregate(reports: &[ImageReport], split: &str) -> Result<SplitAggregate> {
    if reports.is_empty() {
        return Err(Error::arg("cannot aggregate an empty report list"));
    }
    let mut undef = UndefinedCounts::default();
    let mut sums = [0.0f64; 6];
    let mut counts = [0usize; 6];
    for r in reports {
        let vals = [
            r.metrics.iou,
            r.metrics.f1,
            r.metrics.precision,
            r.metrics.recall,
            r.metrics.accuracy,
            r.metrics.balanced_accuracy,
        ];
        let slots = [
            &mut undef.iou,
            &mut undef.f1,
            &mut undef.precision,
            &mut undef.recall,
            &mut undef.accuracy,
            &mut undef.balanced_accuracy,
        ];
        for ((v, sum_i), slot) in vals.iter().zip(0..).zip(slots) {
            match v {
                Some(x) => {
                    sums[sum_i] += x;
                    counts[sum_i] += 1;
                }
                None => *slot += 1,
            }
        }
    }
    let mean_of = |i: usize| -> Option<f64> {
        if counts[i] == 0 {
            None
        } else {
            Some(sums[i] / counts[i] as f64)
        }
    };
    // image-level balanced accuracy over the split
    let pos: Vec<&ImageReport> = reports.iter().filter(|r| r.image_level_truth).collect();
    let neg: Vec<&ImageReport> = reports.iter().filter(|r| !r.image_level_truth).collect();
    let tpr = if pos.is_empty() {
        None
    } else {
        Some(pos.iter().filter(|r| r.image_level_pred).count() as f64 / pos.len() as f64)
    };
    let tnr = if neg.is_empty() {
        None
    } else {
        Some(neg.iter().filter(|r| !r.image_level_pred).count() as f64 / neg.len() as f64)
    };
    let image_level = match (tpr, tnr) {
        (Some(a), Some(b)) => Some((a + b) / 2.0),
        (Some(a), None) => Some(a),
        (None, Some(b)) => Some(b),
        (None, None) => None,
    };
    Ok(SplitAggregate {
        split: split.to_string(),
        images: reports.len(),
        mean: Metrics {
            iou: mean_of(0),
            f1: mean_of(1),
            precision: mean_of(2),
            recall: mean_of(3),
            accuracy: mean_of(4),
            balanced_accuracy: mean_of(5),
        },
        undefined_counts: undef,
        image_level_balanced_accuracy: image_level,
    })
}
