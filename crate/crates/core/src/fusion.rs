//! Noise-aware texture fusion: classify segment/candidate-mask overlap,
//! run patch-noise analysis on partially overlapping segments, and emit the
//! refined forgery mask with a per-segment explanation record.

use std::collections::BTreeSet;

use crate::dtcwt::{self, DtcwtPyramid, FilterBank};
use crate::error::{Error, Result};
use crate::image::{binarize, to_grayscale, BinaryMask, Image, ProbabilityMask};
use crate::noise::{flag_inconsistent_patches, patch_statistics, PatchGrid};
use crate::segmentation::{filter_small_segments, merge_regions, slic_superpixels, SegmentMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OverlapClass {
    None,
    Partial,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapInfo {
    pub class: OverlapClass,
    pub fraction: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct FusionConfig {
    /// Overlap fraction at or below which a segment is ignored.
    pub t_none: f64,
    /// Overlap fraction at or above which a segment counts as fully inside.
    pub t_full: f64,
    /// Robust z threshold for patch flagging.
    pub flag_k: f64,
    pub grid: PatchGrid,
    /// Segments smaller than this fraction of the image are not analyzed.
    pub min_segment_fraction: f64,
    /// Keep candidate pixels of fully covered segments in the verdict.
    pub keep_full: bool,
    /// Keep candidate pixels of discarded (too small) segments.
    pub keep_unsegmented: bool,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            t_none: 0.01,
            t_full: 0.95,
            flag_k: 2.5,
            grid: PatchGrid::default(),
            min_segment_fraction: 0.1,
            keep_full: true,
            keep_unsegmented: true,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.t_none && self.t_none < self.t_full && self.t_full <= 1.0) {
            return Err(Error::arg(format!(
                "overlap thresholds must satisfy 0 <= t_none < t_full <= 1, got {} and {}",
                self.t_none, self.t_full
            )));
        }
        Ok(())
    }
}

/// Classify how much of a segment lies under the candidate mask.
pub fn classify_overlap(
    segment_pixels: &[usize],
    candidate: &BinaryMask,
    cfg: &FusionConfig,
) -> Result<OverlapInfo> {
    cfg.validate()?;
    if segment_pixels.is_empty() {
        return Err(Error::arg("segment has no pixels"));
    }
    let n = candidate.width * candidate.height;
    if segment_pixels.iter().any(|&i| i >= n) {
        return Err(Error::arg("segment pixel index outside the candidate mask"));
    }
    let inside = segment_pixels
        .iter()
        .filter(|&&i| candidate.bits[i])
        .count();
    let fraction = inside as f64 / segment_pixels.len() as f64;
    let class = if fraction <= cfg.t_none {
        OverlapClass::None
    } else if fraction >= cfg.t_full {
        OverlapClass::Full
    } else {
        OverlapClass::Partial
    };
    Ok(OverlapInfo { class, fraction })
}

/// Why a segment did or did not contribute to the refined mask.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SegmentReport {
    pub id: u32,
    pub area: usize,
    pub overlap_fraction: f64,
    /// "none" | "partial" | "full" | "discarded"
    pub class: String,
    pub flagged_cells: Vec<usize>,
    pub flag_inconclusive: bool,
    pub contributed_pixels: usize,
    /// Per-cell noise statistics, populated for partially covered segments.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub patch_stats: Vec<crate::noise::PatchStats>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Explanation {
    pub schema_version: u32,
    pub width: usize,
    pub height: usize,
    pub segments: Vec<SegmentReport>,
}

/// Refine a candidate mask against segment texture and patch-noise evidence.
///
/// The output is the union of (a) candidate pixels of fully covered
/// segments, (b) for each partially covered segment the whole in-segment
/// area of every flagged grid cell that touches the candidate, and (c)
/// candidate pixels of discarded segments; segments without overlap
/// contribute nothing.
pub fn refine_mask(
    img: &Image,
    candidate: &BinaryMask,
    seg: &SegmentMap,
    pyr: &DtcwtPyramid,
    fb: &FilterBank,
    cfg: &FusionConfig,
) -> Result<(BinaryMask, Explanation)> {
    cfg.validate()?;
    if candidate.width != img.width || candidate.height != img.height {
        return Err(Error::arg(format!(
            "candidate mask {}x{} does not match image {}x{}",
            candidate.width, candidate.height, img.width, img.height
        )));
    }
    if seg.width != img.width || seg.height != img.height {
        return Err(Error::arg("segment map does not match image dimensions"));
    }
    if pyr.orig_width != img.width || pyr.orig_height != img.height {
        return Err(Error::arg("pyramid was not built from this image"));
    }
    let (seg, discarded) = {
        let (s, d) = filter_small_segments(seg, cfg.min_segment_fraction);
        (s, d)
    };
    let (w, h) = (img.width, img.height);
    let mut out = BinaryMask::empty(w, h);
    let mut reports = Vec::with_capacity(seg.k);

    let sb = pyr.subband(1, dtcwt::Orientation::Deg15);
    let (sub_w, sub_h) = (sb.width, sb.height);

    for id in 0..seg.k as u32 {
        let pixels = seg.segment_pixels(id);
        let area = pixels.len();
        if discarded.contains(&id) {
            let mut contributed = 0usize;
            if cfg.keep_unsegmented {
                for &i in &pixels {
                    if candidate.bits[i] {
                        out.bits[i] = true;
                        contributed += 1;
                    }
                }
            }
            let inside = pixels.iter().filter(|&&i| candidate.bits[i]).count();
            reports.push(SegmentReport {
                id,
                area,
                overlap_fraction: inside as f64 / area as f64,
                class: "discarded".into(),
                flagged_cells: Vec::new(),
                flag_inconclusive: false,
                contributed_pixels: contributed,
                patch_stats: Vec::new(),
            });
            continue;
        }
        let overlap = classify_overlap(&pixels, candidate, cfg)?;
        match overlap.class {
            OverlapClass::None => {
                reports.push(SegmentReport {
                    id,
                    area,
                    overlap_fraction: overlap.fraction,
                    class: "none".into(),
                    flagged_cells: Vec::new(),
                    flag_inconclusive: false,
                    contributed_pixels: 0,
                    patch_stats: Vec::new(),
                });
            }
            OverlapClass::Full => {
                let mut contributed = 0usize;
                if cfg.keep_full {
                    for &i in &pixels {
                        if candidate.bits[i] {
                            out.bits[i] = true;
                            contributed += 1;
                        }
                    }
                }
                reports.push(SegmentReport {
                    id,
                    area,
                    overlap_fraction: overlap.fraction,
                    class: "full".into(),
                    flagged_cells: Vec::new(),
                    flag_inconclusive: false,
                    contributed_pixels: contributed,
                    patch_stats: Vec::new(),
                });
            }
            OverlapClass::Partial => {
                let mut in_seg = vec![false; w * h];
                for &i in &pixels {
                    in_seg[i] = true;
                }
                let stats = patch_statistics(pyr, fb, &in_seg, &cfg.grid)?;
                let flags = flag_inconsistent_patches(&stats, cfg.flag_k);
                let flagged: BTreeSet<usize> = flags.flagged_cells();
                let mut contributed = 0usize;
                for &cell in &flagged {
                    let r = cfg.grid.cell_rect_image(cell, sub_w, sub_h, w, h);
                    // whole in-segment cell area, provided the cell touches
                    // the candidate inside this segment
                    let mut touches = false;
                    for y in r.y0..r.y1 {
                        for x in r.x0..r.x1 {
                            let i = y * w + x;
                            if in_seg[i] && candidate.bits[i] {
                                touches = true;
                                break;
                            }
                        }
                        if touches {
                            break;
                        }
                    }
                    if !touches {
                        continue;
                    }
                    for y in r.y0..r.y1 {
                        for x in r.x0..r.x1 {
                            let i = y * w + x;
                            if in_seg[i] && !out.bits[i] {
                                out.bits[i] = true;
                                contributed += 1;
                            }
                        }
                    }
                }
                reports.push(SegmentReport {
                    id,
                    area,
                    overlap_fraction: overlap.fraction,
                    class: "partial".into(),
                    flagged_cells: flagged.into_iter().collect(),
                    flag_inconclusive: flags.inconclusive,
                    contributed_pixels: contributed,
                    patch_stats: stats,
                });
            }
        }
    }
    Ok((
        out,
        Explanation {
            schema_version: 1,
            width: w,
            height: h,
            segments: reports,
        },
    ))
}

/// End-to-end pipeline parameters for [`detect`].
#[derive(Debug, Clone, Copy)]
pub struct DetectParams {
    pub binarize_threshold: f64,
    pub slic_count: usize,
    pub slic_compactness: f64,
    pub merge_color_threshold: f64,
    pub seed: u64,
    pub fusion: FusionConfig,
}

impl Default for DetectParams {
    fn default() -> Self {
        DetectParams {
            binarize_threshold: 0.5,
            slic_count: 32,
            slic_compactness: 10.0,
            merge_color_threshold: 12.0,
            seed: 0,
            fusion: FusionConfig::default(),
        }
    }
}

/// Full right-side pipeline: binarize the candidate, segment the image,
/// decompose, and refine. Deterministic end to end.
pub fn detect(
    img: &Image,
    candidate: &ProbabilityMask,
    params: &DetectParams,
    fb: &FilterBank,
) -> Result<(BinaryMask, Explanation)> {
    if candidate.width != img.width || candidate.height != img.height {
        return Err(Error::arg(format!(
            "candidate mask {}x{} does not match image {}x{}",
            candidate.width, candidate.height, img.width, img.height
        )));
    }
    let binary = binarize(candidate, params.binarize_threshold);
    let gray = to_grayscale(img);
    let pyr = dtcwt::forward(&gray, 1, fb)?;
    let seg = slic_superpixels(img, params.slic_count, params.slic_compactness, params.seed)?;
    let merged = merge_regions(&seg, img, params.merge_color_threshold)?;
    refine_mask(img, &binary, &merged, &pyr, fb, &params.fusion)
}
